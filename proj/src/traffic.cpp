#include "hbmsim/traffic.hpp"

#include <string>

#include "hbmsim/errors.hpp"

namespace hbmsim {

std::uint64_t tg_offset(const HbmGeometry& geometry, std::uint64_t separation_mib, int tg_id) {
    if (tg_id < 1 || tg_id > geometry.raw_port_count()) {
        throw ConfigError("traffic generator id " + std::to_string(tg_id) + " out of 1.." +
                          std::to_string(geometry.raw_port_count()));
    }
    const std::uint64_t offset = separation_mib * kMiB * static_cast<std::uint64_t>(tg_id - 1);
    if (offset >= geometry.total_capacity()) {
        throw AddressRangeError("generator offset " + std::to_string(offset) +
                                " beyond capacity " + std::to_string(geometry.total_capacity()));
    }
    return offset;
}

AccessPlan microbench_plan(const HbmGeometry& geometry, const MicrobenchSpec& spec,
                           int num_ports) {
    if (num_ports < 1 || num_ports > geometry.raw_port_count()) {
        throw ConfigError("port count " + std::to_string(num_ports) + " out of 1.." +
                          std::to_string(geometry.raw_port_count()));
    }
    AccessPlan plan;
    for (int id = 1; id <= num_ports; ++id) {
        TrafficGeneratorConfig tg;
        tg.port_id = id - 1;
        tg.address = tg_offset(geometry, spec.separation_mib, id);
        tg.size = spec.transfer_size;
        tg.iterations = spec.iterations;
        tg.direction = spec.direction;
        if (tg.address + tg.size > geometry.total_capacity()) {
            throw AddressRangeError("generator " + std::to_string(id) + " transfer exceeds capacity");
        }
        PortAccess& port = plan.add_port(tg.port_id);
        port.accesses.push_back({Extent{tg.address, tg.size}, tg.direction, tg.iterations});
    }
    return plan;
}

std::vector<MicrobenchPoint> run_microbenchmark(const HbmGeometry& geometry,
                                                const MicrobenchSpec& spec) {
    HbmGeometry effective = geometry;
    if (spec.clock_hz_override > 0.0) {
        effective.clock_hz = spec.clock_hz_override;
    }
    std::vector<MicrobenchPoint> curve;
    curve.reserve(static_cast<std::size_t>(spec.num_ports));
    for (int k = 1; k <= spec.num_ports; ++k) {
        const AccessPlan plan = microbench_plan(effective, spec, k);
        const BandwidthReport report = effective_bandwidth(effective, plan);
        curve.push_back({k, report.aggregate_bytes_per_sec});
    }
    return curve;
}

} // namespace hbmsim
