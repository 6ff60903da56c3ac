#include "hbmsim/geometry.hpp"

#include <string>

#include "hbmsim/errors.hpp"

namespace hbmsim {

void validate_extent(const HbmGeometry& geometry, const Extent& extent) {
    if (extent.length == 0) {
        throw AddressRangeError("extent has zero length");
    }
    const std::uint64_t total = geometry.total_capacity();
    if (extent.base >= total || extent.length > total - extent.base) {
        throw AddressRangeError("extent [" + std::to_string(extent.base) + ", " +
                                std::to_string(extent.end()) + ") exceeds capacity " +
                                std::to_string(total));
    }
}

int channel_of(const HbmGeometry& geometry, std::uint64_t address) {
    if (address >= geometry.total_capacity()) {
        throw AddressRangeError("address " + std::to_string(address) + " beyond capacity " +
                                std::to_string(geometry.total_capacity()));
    }
    return static_cast<int>(address / geometry.channel_capacity);
}

ShimPortMap shim_port_map(const HbmGeometry& geometry, int shim_port_id) {
    if (shim_port_id < 0 || shim_port_id >= geometry.shim_port_count()) {
        throw ConfigError("shim port " + std::to_string(shim_port_id) + " out of range");
    }
    ShimPortMap map;
    map.shim_port_id = shim_port_id;
    map.first_raw_port = shim_port_id;
    map.second_raw_port = shim_port_id + geometry.channels_per_stack;
    map.second_port_offset = geometry.second_port_offset();
    return map;
}

std::vector<ResolvedAccess> shim_resolve(const HbmGeometry& geometry, int shim_port_id,
                                         const Extent& logical) {
    const ShimPortMap map = shim_port_map(geometry, shim_port_id);
    const std::uint64_t cap = geometry.channel_capacity;
    const std::uint64_t window = 2 * cap;
    if (logical.length == 0) {
        throw AddressRangeError("extent has zero length");
    }
    if (logical.length > window || logical.base >= window || logical.end() > window) {
        throw CapacityError("extent [" + std::to_string(logical.base) + ", " +
                            std::to_string(logical.end()) + ") exceeds the shim window of " +
                            std::to_string(window) + " bytes");
    }

    // First channel of the pair backs logical [0, cap); the partner channel
    // in the other stack backs [cap, 2*cap) via the constant offset.
    const std::uint64_t first_channel_base = static_cast<std::uint64_t>(shim_port_id) * cap;
    std::vector<ResolvedAccess> parts;
    if (logical.base < cap) {
        const std::uint64_t len = std::min(logical.end(), cap) - logical.base;
        parts.push_back({map.first_raw_port, Extent{first_channel_base + logical.base, len}});
    }
    if (logical.end() > cap) {
        const std::uint64_t lo = std::max(logical.base, cap);
        parts.push_back({map.second_raw_port,
                         Extent{first_channel_base + map.second_port_offset + (lo - cap),
                                logical.end() - lo}});
    }
    return parts;
}

} // namespace hbmsim
