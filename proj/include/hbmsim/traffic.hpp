#pragma once

#include <cstdint>
#include <vector>

#include "hbmsim/bandwidth.hpp"
#include "hbmsim/geometry.hpp"

namespace hbmsim {

/// One standalone traffic generator, one per raw port.
struct TrafficGeneratorConfig {
    int port_id = 0;
    std::uint64_t address = 0;
    std::uint64_t size = kMiB;
    std::uint64_t iterations = 1;
    Direction direction = Direction::read;
};

/// Sweep description for the bandwidth-vs-separation experiment.
/// `clock_hz_override` of 0 keeps the geometry's clock.
struct MicrobenchSpec {
    int num_ports = 32;
    std::uint64_t separation_mib = 256;
    Direction direction = Direction::read;
    double clock_hz_override = 0.0;
    std::uint64_t transfer_size = kMiB;
    std::uint64_t iterations = 1;
};

/// Start address of generator `tg_id` (1-based) at `separation_mib` MiB of
/// spacing. Throws AddressRangeError when the offset leaves the map.
std::uint64_t tg_offset(const HbmGeometry& geometry, std::uint64_t separation_mib, int tg_id);

struct MicrobenchPoint {
    int num_ports = 0;
    double aggregate_bytes_per_sec = 0.0;

    double aggregate_gbps() const { return aggregate_bytes_per_sec / 1e9; }
};

/// Builds the access plan for `num_ports` generators at the given spacing.
AccessPlan microbench_plan(const HbmGeometry& geometry, const MicrobenchSpec& spec,
                           int num_ports);

/// Aggregate bandwidth for every port count 1..spec.num_ports.
std::vector<MicrobenchPoint> run_microbenchmark(const HbmGeometry& geometry,
                                                const MicrobenchSpec& spec);

} // namespace hbmsim
