#include "hbmsim/placement.hpp"

#include <algorithm>
#include <string>

#include "hbmsim/errors.hpp"

namespace hbmsim {

int SystemConfig::engine_shim_port(int engine_index) const {
    if (engine_index < 0 || engine_index >= usable_engine_ports) {
        throw ConfigError("engine index " + std::to_string(engine_index) + " out of 0.." +
                          std::to_string(usable_engine_ports - 1));
    }
    int port = 0;
    int remaining = engine_index;
    for (; port < geometry.shim_port_count(); ++port) {
        if (port == datamover_shim_ports[0] || port == datamover_shim_ports[1]) continue;
        if (remaining == 0) return port;
        --remaining;
    }
    throw ConfigError("no shim port available for engine " + std::to_string(engine_index));
}

namespace {

/// Slice sizes with the remainder folded into the last slice.
std::vector<std::uint64_t> slice_sizes(std::uint64_t total, int parts) {
    const std::uint64_t base = total / static_cast<std::uint64_t>(parts);
    std::vector<std::uint64_t> sizes(static_cast<std::size_t>(parts), base);
    sizes.back() += total - base * static_cast<std::uint64_t>(parts);
    return sizes;
}

/// Stripes `bytes` across the channel pair of `shim_port`: half in the
/// stack-0 channel, half in the partner channel, so both raw ports of the
/// merged port serve the engine.
std::vector<Extent> striped_pair_extents(const HbmGeometry& geometry, int shim_port,
                                         std::uint64_t bytes) {
    const std::uint64_t cap = geometry.channel_capacity;
    if (bytes > 2 * cap) {
        throw CapacityError("placement of " + std::to_string(bytes) +
                            " bytes exceeds the channel pair capacity " + std::to_string(2 * cap));
    }
    const std::uint64_t first = (bytes + 1) / 2;
    const std::uint64_t second = bytes - first;
    const std::uint64_t first_base = static_cast<std::uint64_t>(shim_port) * cap;
    const std::uint64_t second_base = first_base + geometry.second_port_offset();
    std::vector<Extent> extents;
    if (first > 0) extents.push_back({first_base, first});
    if (second > 0) extents.push_back({second_base, second});
    return extents;
}

} // namespace

PlacementPlan plan_placement(const SystemConfig& config, std::uint64_t data_bytes,
                             int num_engines, PlacementMode mode) {
    const HbmGeometry& geometry = config.geometry;
    if (num_engines < 1 || num_engines > config.usable_engine_ports) {
        throw ConfigError("engine count " + std::to_string(num_engines) + " out of 1.." +
                          std::to_string(config.usable_engine_ports));
    }
    if (data_bytes == 0) {
        throw ConfigError("placement of zero bytes");
    }
    const std::uint64_t copies = mode == PlacementMode::replicated
                                     ? static_cast<std::uint64_t>(num_engines)
                                     : 1;
    if (data_bytes > geometry.total_capacity() / copies) {
        throw CapacityError("data of " + std::to_string(data_bytes) + " bytes x" +
                            std::to_string(copies) + " copies exceeds capacity");
    }

    PlacementPlan plan;
    plan.mode = mode;
    plan.data_bytes = data_bytes;

    switch (mode) {
    case PlacementMode::partitioned: {
        const auto sizes = slice_sizes(data_bytes, num_engines);
        for (int e = 0; e < num_engines; ++e) {
            const int shim = config.engine_shim_port(e);
            plan.engines.push_back(
                {e, shim, striped_pair_extents(geometry, shim, sizes[static_cast<std::size_t>(e)])});
        }
        break;
    }
    case PlacementMode::replicated: {
        if (data_bytes > 2 * geometry.channel_capacity) {
            throw CapacityError("replicated copy of " + std::to_string(data_bytes) +
                                " bytes exceeds the per-engine window of " +
                                std::to_string(2 * geometry.channel_capacity) + " bytes");
        }
        for (int e = 0; e < num_engines; ++e) {
            const int shim = config.engine_shim_port(e);
            plan.engines.push_back({e, shim, striped_pair_extents(geometry, shim, data_bytes)});
        }
        break;
    }
    case PlacementMode::nonpartitioned: {
        // One copy from address 0; engines consume disjoint slices of it.
        const auto sizes = slice_sizes(data_bytes, num_engines);
        std::uint64_t base = 0;
        for (int e = 0; e < num_engines; ++e) {
            const int shim = config.engine_shim_port(e);
            EnginePlacement placement{e, shim, {}};
            if (sizes[static_cast<std::size_t>(e)] > 0) {
                placement.extents.push_back({base, sizes[static_cast<std::size_t>(e)]});
            }
            base += sizes[static_cast<std::size_t>(e)];
            plan.engines.push_back(std::move(placement));
        }
        break;
    }
    }
    return plan;
}

AccessPlan engine_read_plan(const SystemConfig& config, const PlacementPlan& plan,
                            std::optional<double> per_engine_cap_bytes) {
    const HbmGeometry& geometry = config.geometry;
    const std::uint64_t stack_bytes = geometry.second_port_offset();
    AccessPlan access;
    for (const EnginePlacement& engine : plan.engines) {
        // Stack 0 addresses ride the first raw port of the pair, stack 1
        // the second; extents straddling the stack boundary are split.
        std::uint64_t bytes_first = 0;
        std::uint64_t bytes_second = 0;
        std::vector<ExtentAccess> first_accesses;
        std::vector<ExtentAccess> second_accesses;
        for (const Extent& extent : engine.extents) {
            const std::uint64_t lo = extent.base;
            const std::uint64_t hi = extent.end();
            if (lo < stack_bytes) {
                const std::uint64_t len = std::min(hi, stack_bytes) - lo;
                first_accesses.push_back({Extent{lo, len}, Direction::read, 1});
                bytes_first += len;
            }
            if (hi > stack_bytes) {
                const std::uint64_t lo2 = std::max(lo, stack_bytes);
                second_accesses.push_back({Extent{lo2, hi - lo2}, Direction::read, 1});
                bytes_second += hi - lo2;
            }
        }
        const double total = static_cast<double>(bytes_first + bytes_second);
        if (bytes_first > 0) {
            PortAccess& port = access.add_port(engine.shim_port);
            port.accesses = std::move(first_accesses);
            if (per_engine_cap_bytes && total > 0) {
                port.rate_cap_bytes = *per_engine_cap_bytes * static_cast<double>(bytes_first) / total;
            }
        }
        if (bytes_second > 0) {
            PortAccess& port = access.add_port(engine.shim_port + geometry.channels_per_stack);
            port.accesses = std::move(second_accesses);
            if (per_engine_cap_bytes && total > 0) {
                port.rate_cap_bytes =
                    *per_engine_cap_bytes * static_cast<double>(bytes_second) / total;
            }
        }
    }
    return access;
}

std::vector<double> per_engine_rates(const SystemConfig& config, const PlacementPlan& plan,
                                     const BandwidthReport& report) {
    std::vector<double> rates(plan.engines.size(), 0.0);
    for (std::size_t e = 0; e < plan.engines.size(); ++e) {
        const int first = plan.engines[e].shim_port;
        const int second = first + config.geometry.channels_per_stack;
        rates[e] = report.port_bytes(first) + report.port_bytes(second);
    }
    return rates;
}

double host_transfer_time(const SystemConfig& config, std::uint64_t bytes, int movers) {
    if (movers < 1 || movers > 2) {
        throw ConfigError("datamover count must be 1 or 2");
    }
    if (bytes == 0) return 0.0;
    return static_cast<double>(bytes) / (config.host_link_gbps * 1e9 * movers);
}

} // namespace hbmsim
