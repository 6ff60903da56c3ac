#include "hbmsim/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hbmsim/errors.hpp"

namespace hbmsim {

double BandwidthReport::port_bytes(int port_id) const {
    for (std::size_t i = 0; i < port_ids.size(); ++i) {
        if (port_ids[i] == port_id) return port_bytes_per_sec[i];
    }
    return 0.0;
}

namespace {

/// Bytes of `extent` falling into each channel, accumulated into `weights`.
void spread_extent(const HbmGeometry& geometry, const Extent& extent, std::uint64_t iterations,
                   std::vector<double>& weights) {
    std::uint64_t pos = extent.base;
    std::uint64_t remaining = extent.length;
    while (remaining > 0) {
        const int channel = static_cast<int>(pos / geometry.channel_capacity);
        const std::uint64_t channel_end =
            (static_cast<std::uint64_t>(channel) + 1) * geometry.channel_capacity;
        const std::uint64_t chunk = std::min<std::uint64_t>(remaining, channel_end - pos);
        weights[static_cast<std::size_t>(channel)] +=
            static_cast<double>(chunk) * static_cast<double>(iterations);
        pos += chunk;
        remaining -= chunk;
    }
}

} // namespace

BandwidthReport effective_bandwidth(const HbmGeometry& geometry, const AccessPlan& plan) {
    const int num_channels = geometry.raw_port_count();
    BandwidthReport report;
    report.channel_bytes_per_sec.assign(static_cast<std::size_t>(num_channels), 0.0);
    if (plan.ports.empty()) {
        return report;
    }

    const double channel_peak = geometry.channel_peak_bytes();
    const std::size_t num_ports = plan.ports.size();

    // Per-port demand fractions over channels.
    std::vector<std::vector<double>> fraction(num_ports);
    std::vector<double> port_peak(num_ports, 0.0);
    for (std::size_t p = 0; p < num_ports; ++p) {
        const PortAccess& port = plan.ports[p];
        if (port.port_id < 0 || port.port_id >= geometry.raw_port_count()) {
            throw ConfigError("port id " + std::to_string(port.port_id) + " out of range");
        }
        std::vector<double> weights(static_cast<std::size_t>(num_channels), 0.0);
        for (const ExtentAccess& access : port.accesses) {
            validate_extent(geometry, access.extent);
            spread_extent(geometry, access.extent, access.iterations, weights);
        }
        double total = 0.0;
        for (double w : weights) total += w;
        if (total > 0.0) {
            for (double& w : weights) w /= total;
        }
        fraction[p] = std::move(weights);
        port_peak[p] = std::min(channel_peak, port.rate_cap_bytes.value_or(channel_peak));
    }

    // Progressive filling: all unfrozen ports rise at a common rate t until
    // a port reaches its peak or a channel saturates; saturation freezes
    // every unfrozen port that uses the channel. Each round freezes at
    // least one port, so the loop is bounded by the port count.
    std::vector<double> rate(num_ports, 0.0);
    std::vector<bool> frozen(num_ports, false);
    for (std::size_t p = 0; p < num_ports; ++p) {
        bool has_demand = false;
        for (double f : fraction[p]) has_demand |= f > 0.0;
        if (!has_demand) frozen[p] = true; // idle port, rate stays 0
    }

    double t = 0.0;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    while (true) {
        bool any_active = false;
        for (std::size_t p = 0; p < num_ports; ++p) any_active |= !frozen[p];
        if (!any_active) break;

        // Residual capacity of each channel once frozen ports are charged.
        std::vector<double> frozen_load(static_cast<std::size_t>(num_channels), 0.0);
        std::vector<double> active_frac(static_cast<std::size_t>(num_channels), 0.0);
        for (std::size_t p = 0; p < num_ports; ++p) {
            for (int c = 0; c < num_channels; ++c) {
                const double f = fraction[p][static_cast<std::size_t>(c)];
                if (f <= 0.0) continue;
                if (frozen[p]) {
                    frozen_load[static_cast<std::size_t>(c)] += rate[p] * f;
                } else {
                    active_frac[static_cast<std::size_t>(c)] += f;
                }
            }
        }

        double next_t = kInf;
        int saturating_channel = -1;
        for (int c = 0; c < num_channels; ++c) {
            const double af = active_frac[static_cast<std::size_t>(c)];
            if (af <= 0.0) continue;
            const double avail = channel_peak - frozen_load[static_cast<std::size_t>(c)];
            const double tc = std::max(t, avail / af);
            if (tc < next_t) {
                next_t = tc;
                saturating_channel = c;
            }
        }
        double min_peak = kInf;
        for (std::size_t p = 0; p < num_ports; ++p) {
            if (!frozen[p]) min_peak = std::min(min_peak, port_peak[p]);
        }

        if (min_peak <= next_t) {
            t = min_peak;
            for (std::size_t p = 0; p < num_ports; ++p) {
                if (!frozen[p] && port_peak[p] <= t) {
                    rate[p] = port_peak[p];
                    frozen[p] = true;
                }
            }
        } else {
            t = next_t;
            for (std::size_t p = 0; p < num_ports; ++p) {
                if (!frozen[p] && fraction[p][static_cast<std::size_t>(saturating_channel)] > 0.0) {
                    rate[p] = t;
                    frozen[p] = true;
                }
            }
        }
    }

    report.port_ids.reserve(num_ports);
    report.port_bytes_per_sec.reserve(num_ports);
    for (std::size_t p = 0; p < num_ports; ++p) {
        report.port_ids.push_back(plan.ports[p].port_id);
        report.port_bytes_per_sec.push_back(rate[p]);
        report.aggregate_bytes_per_sec += rate[p];
        for (int c = 0; c < num_channels; ++c) {
            report.channel_bytes_per_sec[static_cast<std::size_t>(c)] +=
                rate[p] * fraction[p][static_cast<std::size_t>(c)];
        }
    }
    return report;
}

} // namespace hbmsim
