#pragma once

#include <cstdint>
#include <vector>

#include "hbmsim/geometry.hpp"

namespace hbmsim {

using Column = std::vector<std::int32_t>;

/// Open-interval predicate: matches v with lower < v < upper.
struct RangePredicate {
    std::int32_t lower = 0;
    std::int32_t upper = 0;

    bool matches(std::int32_t v) const { return v > lower && v < upper; }
};

/// On-chip index buffers, one per comparison lane. Lane l only ever holds
/// indices congruent to l modulo the parallelism, in arrival order.
class LaneBuffers {
public:
    LaneBuffers(std::size_t parallelism, std::size_t buffer_size);

    void push(std::size_t lane, std::uint32_t index);
    bool any_full() const;
    bool empty() const;
    std::size_t parallelism() const { return lanes_.size(); }
    std::size_t buffer_size() const { return buffer_size_; }
    const std::vector<std::uint32_t>& lane(std::size_t l) const { return lanes_[l]; }
    std::size_t lane_count(std::size_t l) const { return lanes_[l].size(); }
    void clear();

private:
    std::vector<std::vector<std::uint32_t>> lanes_;
    std::size_t buffer_size_ = 0;
};

/// Egress output: full-width lines of index slots, one slot per lane, with
/// dummy sentinels where a lane produced fewer matches than its peers.
struct PaddedResult {
    static constexpr std::uint32_t kDummy = 0xFFFFFFFFu;

    std::size_t parallelism = 16;
    std::vector<std::uint32_t> slots;        // line-major, num_lines * parallelism
    std::vector<std::uint64_t> lane_valid;   // per-lane totals across all bursts
    std::vector<std::size_t> burst_offsets;  // first line index of each egress burst
    std::uint64_t num_matches = 0;

    std::size_t num_lines() const { return parallelism == 0 ? 0 : slots.size() / parallelism; }
    std::uint32_t slot(std::size_t line, std::size_t lane) const {
        return slots[line * parallelism + lane];
    }
};

struct SelectCost {
    std::uint64_t ingress_cycles = 0; // ceil(n / parallelism)
    std::uint64_t egress_cycles = 0;  // lines written
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
};

struct SelectOutput {
    PaddedResult padded;
    SelectCost cost;
};

/// Reference scan: ascending indices of values strictly inside the range.
struct SelectionResult {
    std::vector<std::uint32_t> indices;
    std::uint64_t num_matches = 0;
};

SelectionResult select_oracle(const Column& input, const RangePredicate& predicate);

/// Lane-parallel selection with ingress/egress scheduling. Elements are
/// dealt round-robin to lanes; egress fires when any lane buffer fills and
/// drains every lane into padded lines. Compacting the output reproduces
/// the oracle exactly.
SelectOutput engine_select(const Column& input, const RangePredicate& predicate,
                           std::size_t parallelism = 16, std::size_t buffer_size = 1024);

/// Drops dummies and merges the per-lane ascending streams back into one
/// ascending index list. Throws ConsistencyError on malformed counts.
SelectionResult compact(const PaddedResult& padded);

enum class Placement { partitioned, nonpartitioned };

struct SelectionModelParams {
    int num_engines = 14;
    double selectivity = 0.0; // fraction of input matching, 0..1
    Placement placement = Placement::partitioned;
    bool include_output_copy = false;
    double host_link_gbps = 25.0;
    double engine_efficiency = 0.86; // calibrated: 11 of 12.8 GB/s per engine
    std::uint64_t data_bytes = 512'000'000;
};

/// Modeled input-consumption rate in GB/s. Reads and result writes share
/// each engine's port, so consumption scales by 1/(1+selectivity); the
/// memory side comes from the placement's access plan under contention.
double model_selection_rate(const HbmGeometry& geometry, const SelectionModelParams& params);

} // namespace hbmsim
