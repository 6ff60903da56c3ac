#pragma once

#include <cstdint>
#include <vector>

namespace hbmsim {

inline constexpr std::uint64_t kMiB = 1ull << 20;
inline constexpr std::uint64_t kGiB = 1ull << 30;

/// Physical organization of the banked memory: two stacks of pseudo
/// channels, narrow raw ports merged pairwise into double-width ports.
/// Defaults describe the 8 GiB / 32-port device at 200 MHz; `efficiency`
/// is the calibrated fraction of wire speed a saturated port sustains.
struct HbmGeometry {
    int num_stacks = 2;
    int channels_per_stack = 16;
    std::uint64_t channel_capacity = 256 * kMiB;
    int raw_port_width_bits = 256;
    int shim_port_width_bits = 512;
    double clock_hz = 200e6;
    double efficiency = 0.93;

    std::uint64_t total_capacity() const {
        return static_cast<std::uint64_t>(num_stacks) * channels_per_stack * channel_capacity;
    }
    int raw_port_count() const { return num_stacks * channels_per_stack; }
    int shim_port_count() const { return raw_port_count() / 2; }

    /// Wire-speed port bandwidth in bytes/s, before any efficiency derating.
    double raw_port_peak_bytes() const { return raw_port_width_bits / 8.0 * clock_hz; }
    double shim_port_peak_bytes() const { return shim_port_width_bits / 8.0 * clock_hz; }

    /// Sustained per-channel service rate used by the contention model.
    double channel_peak_bytes() const { return raw_port_peak_bytes() * efficiency; }

    /// Constant offset added to the second raw port of a merged pair:
    /// one stack's worth of address space.
    std::uint64_t second_port_offset() const {
        return static_cast<std::uint64_t>(channels_per_stack) * channel_capacity;
    }

    /// 200 MHz device, efficiency calibrated so 32 ideally separated
    /// ports aggregate to 190 GB/s.
    static HbmGeometry mhz200() { return HbmGeometry{}; }

    /// 300 MHz device, efficiency recalibrated for the 282 GB/s aggregate.
    static HbmGeometry mhz300() {
        HbmGeometry g;
        g.clock_hz = 300e6;
        g.efficiency = 0.92;
        return g;
    }
};

/// Half-open byte range [base, base + length).
struct Extent {
    std::uint64_t base = 0;
    std::uint64_t length = 0;

    std::uint64_t end() const { return base + length; }
    bool operator==(const Extent&) const = default;
};

/// Validates an extent against the memory map. Throws AddressRangeError.
void validate_extent(const HbmGeometry& geometry, const Extent& extent);

/// Channel holding `address`. Channels are contiguous, equal-size slices
/// of the flat address space. Throws AddressRangeError when out of range.
int channel_of(const HbmGeometry& geometry, std::uint64_t address);

/// Static pairing of raw ports behind one double-width port: raw ports
/// (p, p + channels_per_stack), one from each stack.
struct ShimPortMap {
    int shim_port_id = 0;
    int first_raw_port = 0;
    int second_raw_port = 0;
    std::uint64_t second_port_offset = 0;
};

ShimPortMap shim_port_map(const HbmGeometry& geometry, int shim_port_id);

/// One piece of a resolved shim access: the raw port carrying it and the
/// physical extent it touches.
struct ResolvedAccess {
    int raw_port = 0;
    Extent extent;
};

/// Maps an extent in a shim port's logical window (two channels' worth of
/// address space) onto the pair's raw ports. The first channel's capacity
/// resolves to the first raw port; the rest lands in the partner stack at
/// the constant offset. Never touches channels outside the pair.
/// Throws CapacityError when the extent does not fit the window.
std::vector<ResolvedAccess> shim_resolve(const HbmGeometry& geometry, int shim_port_id,
                                         const Extent& logical);

} // namespace hbmsim
