#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hbmsim/geometry.hpp"

namespace hbmsim {

enum class Direction { read, write };

/// One configured access stream: an extent swept `iterations` times.
struct ExtentAccess {
    Extent extent;
    Direction direction = Direction::read;
    std::uint64_t iterations = 1;
};

/// Traffic demand of one raw port. `rate_cap_bytes` lets a caller bound
/// the port below wire speed (an engine splitting its budget over the
/// pair's two ports); unset means the port may run at channel speed.
struct PortAccess {
    int port_id = 0;
    std::vector<ExtentAccess> accesses;
    std::optional<double> rate_cap_bytes;
};

struct AccessPlan {
    std::vector<PortAccess> ports;

    PortAccess& add_port(int port_id) {
        ports.push_back(PortAccess{port_id, {}, {}});
        return ports.back();
    }
};

struct BandwidthReport {
    std::vector<int> port_ids;
    std::vector<double> port_bytes_per_sec;   // parallel to port_ids
    std::vector<double> channel_bytes_per_sec; // indexed by channel
    double aggregate_bytes_per_sec = 0.0;

    double aggregate_gbps() const { return aggregate_bytes_per_sec / 1e9; }
    double port_bytes(int port_id) const;
    double port_gbps(int port_id) const { return port_bytes(port_id) / 1e9; }
};

/// Steady-state rates under crossbar contention. Each port's demand is
/// spread over the channels its extents touch, proportional to bytes per
/// channel; channels serve contending ports max-min fair (progressive
/// filling), so a port is limited by its own peak or by the fair share of
/// its most contended channel. Empty plans yield a zero report.
BandwidthReport effective_bandwidth(const HbmGeometry& geometry, const AccessPlan& plan);

} // namespace hbmsim
