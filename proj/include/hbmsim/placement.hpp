#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hbmsim/bandwidth.hpp"
#include "hbmsim/geometry.hpp"

namespace hbmsim {

/// Platform wiring: two shim ports are reserved for the datamovers that
/// shuttle data over the host link; the rest drive compute engines.
struct SystemConfig {
    HbmGeometry geometry;
    double host_link_gbps = 25.0;
    std::array<int, 2> datamover_shim_ports{0, 15};
    int usable_engine_ports = 14;

    /// Shim port driven by engine `engine_index` (0-based): the engine
    /// ports are the shim ports not taken by datamovers.
    int engine_shim_port(int engine_index) const;
};

enum class PlacementMode { partitioned, nonpartitioned, replicated };

struct EnginePlacement {
    int engine_id = 0;
    int shim_port = 0;
    std::vector<Extent> extents; // what this engine reads
};

/// Data placement plus the per-engine read assignment it implies.
/// Partitioned and replicated placements keep every extent inside the
/// owning engine's channel pair, striped across the pair so both raw
/// ports of the merged port carry traffic. Nonpartitioned keeps a single
/// contiguous copy from address 0; engines read disjoint slices of it.
struct PlacementPlan {
    PlacementMode mode = PlacementMode::partitioned;
    std::uint64_t data_bytes = 0;
    std::vector<EnginePlacement> engines;
};

PlacementPlan plan_placement(const SystemConfig& config, std::uint64_t data_bytes,
                             int num_engines, PlacementMode mode);

/// Read-traffic plan for every engine in `plan`. When `per_engine_cap_bytes`
/// is set, each engine's budget is split over its raw ports proportional to
/// the bytes each port serves.
AccessPlan engine_read_plan(const SystemConfig& config, const PlacementPlan& plan,
                            std::optional<double> per_engine_cap_bytes);

/// Sums the rates of the raw ports belonging to each engine.
std::vector<double> per_engine_rates(const SystemConfig& config, const PlacementPlan& plan,
                                     const BandwidthReport& report);

/// Seconds to move `bytes` across the host link with `movers` datamovers.
double host_transfer_time(const SystemConfig& config, std::uint64_t bytes, int movers = 2);

} // namespace hbmsim
