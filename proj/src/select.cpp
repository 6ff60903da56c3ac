#include "hbmsim/select.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "hbmsim/errors.hpp"
#include "hbmsim/placement.hpp"

namespace hbmsim {

LaneBuffers::LaneBuffers(std::size_t parallelism, std::size_t buffer_size)
    : lanes_(parallelism), buffer_size_(buffer_size) {
    if (parallelism == 0 || buffer_size == 0) {
        throw ConfigError("lane buffers need parallelism >= 1 and buffer_size >= 1");
    }
    for (auto& lane : lanes_) lane.reserve(buffer_size);
}

void LaneBuffers::push(std::size_t lane, std::uint32_t index) {
    if (lane >= lanes_.size()) {
        throw ConsistencyError("lane " + std::to_string(lane) + " out of range");
    }
    if (lanes_[lane].size() >= buffer_size_) {
        throw ConsistencyError("lane buffer overflow");
    }
    lanes_[lane].push_back(index);
}

bool LaneBuffers::any_full() const {
    return std::any_of(lanes_.begin(), lanes_.end(),
                       [this](const auto& lane) { return lane.size() >= buffer_size_; });
}

bool LaneBuffers::empty() const {
    return std::all_of(lanes_.begin(), lanes_.end(),
                       [](const auto& lane) { return lane.empty(); });
}

void LaneBuffers::clear() {
    for (auto& lane : lanes_) lane.clear();
}

SelectionResult select_oracle(const Column& input, const RangePredicate& predicate) {
    if (input.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw CapacityError("input too large for 32-bit result indices");
    }
    SelectionResult result;
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (predicate.matches(input[i])) {
            result.indices.push_back(static_cast<std::uint32_t>(i));
        }
    }
    result.num_matches = result.indices.size();
    return result;
}

namespace {

/// Drains every lane into padded lines; the burst is as long as the
/// fullest lane, shorter lanes are topped up with the dummy sentinel.
void egress_burst(LaneBuffers& buffers, PaddedResult& out) {
    const std::size_t parallelism = buffers.parallelism();
    std::size_t lines = 0;
    for (std::size_t l = 0; l < parallelism; ++l) {
        lines = std::max(lines, buffers.lane_count(l));
    }
    if (lines == 0) return;
    out.burst_offsets.push_back(out.num_lines());
    for (std::size_t j = 0; j < lines; ++j) {
        for (std::size_t l = 0; l < parallelism; ++l) {
            const auto& lane = buffers.lane(l);
            out.slots.push_back(j < lane.size() ? lane[j] : PaddedResult::kDummy);
        }
    }
    for (std::size_t l = 0; l < parallelism; ++l) {
        out.lane_valid[l] += buffers.lane_count(l);
        out.num_matches += buffers.lane_count(l);
    }
    buffers.clear();
}

} // namespace

SelectOutput engine_select(const Column& input, const RangePredicate& predicate,
                           std::size_t parallelism, std::size_t buffer_size) {
    if (input.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw CapacityError("input too large for 32-bit result indices");
    }
    LaneBuffers buffers(parallelism, buffer_size);
    SelectOutput out;
    out.padded.parallelism = parallelism;
    out.padded.lane_valid.assign(parallelism, 0);

    const std::size_t n = input.size();
    for (std::size_t group = 0; group < n; group += parallelism) {
        const std::size_t group_end = std::min(n, group + parallelism);
        for (std::size_t i = group; i < group_end; ++i) {
            if (predicate.matches(input[i])) {
                buffers.push(i - group, static_cast<std::uint32_t>(i));
            }
        }
        out.cost.ingress_cycles += 1;
        if (buffers.any_full()) {
            egress_burst(buffers, out.padded);
        }
    }
    egress_burst(buffers, out.padded);

    out.cost.egress_cycles = out.padded.num_lines();
    out.cost.bytes_read = 4ull * n;
    out.cost.bytes_written = 4ull * parallelism * out.padded.num_lines();
    return out;
}

SelectionResult compact(const PaddedResult& padded) {
    const std::size_t parallelism = padded.parallelism;
    if (parallelism == 0) {
        throw ConsistencyError("padded result with zero parallelism");
    }
    if (padded.slots.size() % parallelism != 0 || padded.lane_valid.size() != parallelism) {
        throw ConsistencyError("padded result shape mismatch");
    }

    std::vector<std::vector<std::uint32_t>> streams(parallelism);
    const std::size_t lines = padded.num_lines();
    for (std::size_t j = 0; j < lines; ++j) {
        for (std::size_t l = 0; l < parallelism; ++l) {
            const std::uint32_t v = padded.slot(j, l);
            if (v != PaddedResult::kDummy) streams[l].push_back(v);
        }
    }

    std::uint64_t total = 0;
    for (std::size_t l = 0; l < parallelism; ++l) {
        if (streams[l].size() != padded.lane_valid[l]) {
            throw ConsistencyError("lane " + std::to_string(l) + " holds " +
                                   std::to_string(streams[l].size()) + " values but claims " +
                                   std::to_string(padded.lane_valid[l]));
        }
        if (!std::is_sorted(streams[l].begin(), streams[l].end(),
                            [](auto a, auto b) { return a <= b; })) {
            throw ConsistencyError("lane " + std::to_string(l) + " stream not strictly increasing");
        }
        total += streams[l].size();
    }
    if (total != padded.num_matches) {
        throw ConsistencyError("lane totals disagree with the match count");
    }

    // 16-way merge of the ascending lane streams.
    SelectionResult result;
    result.indices.reserve(total);
    std::vector<std::size_t> cursor(parallelism, 0);
    for (std::uint64_t k = 0; k < total; ++k) {
        std::size_t best = parallelism;
        std::uint32_t best_value = 0;
        for (std::size_t l = 0; l < parallelism; ++l) {
            if (cursor[l] < streams[l].size()) {
                const std::uint32_t v = streams[l][cursor[l]];
                if (best == parallelism || v < best_value) {
                    best = l;
                    best_value = v;
                }
            }
        }
        result.indices.push_back(best_value);
        ++cursor[best];
    }
    result.num_matches = total;
    return result;
}

double model_selection_rate(const HbmGeometry& geometry, const SelectionModelParams& params) {
    SystemConfig config;
    config.geometry = geometry;
    if (params.num_engines < 1 || params.num_engines > config.usable_engine_ports) {
        throw ConfigError("selection supports 1.." + std::to_string(config.usable_engine_ports) +
                          " engines, got " + std::to_string(params.num_engines));
    }
    if (params.selectivity < 0.0 || params.selectivity > 1.0) {
        throw ConfigError("selectivity must be within [0, 1]");
    }

    const PlacementMode mode = params.placement == Placement::partitioned
                                   ? PlacementMode::partitioned
                                   : PlacementMode::nonpartitioned;
    const PlacementPlan plan =
        plan_placement(config, params.data_bytes, params.num_engines, mode);

    // Each engine consumes through its merged port at most at
    // shim peak x engine efficiency; memory may grant less.
    const double engine_cap = geometry.shim_port_peak_bytes() * params.engine_efficiency;
    const AccessPlan access = engine_read_plan(config, plan, engine_cap);
    const BandwidthReport report = effective_bandwidth(geometry, access);
    const std::vector<double> memory_rates = per_engine_rates(config, plan, report);

    double aggregate = 0.0;
    for (double rate : memory_rates) {
        aggregate += rate / (1.0 + params.selectivity);
    }
    if (aggregate <= 0.0) return 0.0;

    if (params.include_output_copy) {
        // Output volume is selectivity x input; the copy-out phase is
        // serialized after the scan, so fold it into the per-byte time.
        const double host_bytes_per_sec = params.host_link_gbps * 1e9;
        const double seconds_per_byte =
            1.0 / aggregate + params.selectivity / host_bytes_per_sec;
        return 1.0 / seconds_per_byte / 1e9;
    }
    return aggregate / 1e9;
}

} // namespace hbmsim
