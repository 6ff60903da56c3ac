#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hbmsim/geometry.hpp"
#include "hbmsim/select.hpp" // Column

namespace hbmsim {

/// Bounded build-side table: bucket-chained, insertion order preserved
/// within a chain. The 16 on-chip replicas that give the probe lanes
/// independent read ports are accounting only; one table serves lookups.
class HashTable {
public:
    explicit HashTable(std::size_t capacity = 8192, int replica_count = 16);

    void insert(std::int32_t key, std::uint32_t slot);

    /// Calls `fn(slot)` for every entry matching `key`, in insertion order.
    void for_each_match(std::int32_t key, const std::function<void(std::uint32_t)>& fn) const;

    /// Entries sharing `key`'s bucket (the probe walk length).
    std::size_t chain_length(std::int32_t key) const;

    std::size_t occupied() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    int replica_count() const { return replica_count_; }
    std::uint64_t build_cycles() const { return entries_.size(); } // one insert per cycle
    std::size_t bucket_of(std::int32_t key) const;
    bool saw_duplicate_key() const { return saw_duplicate_key_; }

private:
    struct Entry {
        std::int32_t key;
        std::uint32_t slot;
        std::int32_t next; // index into entries_, -1 terminates
    };

    std::size_t capacity_;
    int replica_count_;
    int bucket_bits_;
    std::vector<std::int32_t> heads_;
    std::vector<Entry> entries_;
    bool saw_duplicate_key_ = false;
};

HashTable build_hash_table(const Column& s_chunk, std::size_t capacity = 8192);

/// Key-equality join output: parallel value arrays, S_out[j] == L_out[j].
struct JoinResult {
    std::vector<std::int32_t> s_out;
    std::vector<std::int32_t> l_out;
    std::uint64_t num_matches = 0;
};

/// Every (s, l) value pair with s == l, by nested-loop enumeration,
/// sorted by key then by position in L.
JoinResult join_oracle(const Column& large, const Column& small);

/// Assembled probe output: paired value lines with an explicit per-line
/// validity mask, dummy sentinel in the invalid slots.
struct PaddedJoinResult {
    static constexpr std::int32_t kDummy = -1;

    std::size_t parallelism = 16;
    std::vector<std::int32_t> s_slots; // line-major
    std::vector<std::int32_t> l_slots;
    std::vector<std::uint16_t> valid;  // bit l set => lane l slot holds a match
    std::uint64_t num_matches = 0;

    std::size_t num_lines() const { return valid.size(); }
};

struct JoinCost {
    int passes = 0;
    std::uint64_t build_cycles = 0;
    std::uint64_t probe_cycles = 0;
    std::uint64_t l_bytes_read = 0;
    std::uint64_t s_bytes_read = 0;
    std::uint64_t bytes_written = 0;
};

struct JoinEngineFlags {
    bool s_unique_declared = false;
    bool handle_collisions = true;
};

struct JoinOutput {
    PaddedJoinResult padded;
    JoinCost cost;
};

/// Probe-optimized join over one partition of the large side. The small
/// side is chunked to the table capacity; every chunk rescans the whole
/// partition. 16 probes advance in lockstep per group, so a group costs
/// the longest lane chain walk. Throws ConfigError when the small side
/// was declared unique but holds duplicates and collision handling is off.
JoinOutput engine_join(const Column& l_partition, const Column& small,
                       std::size_t parallelism = 16, std::size_t table_capacity = 8192,
                       JoinEngineFlags flags = {});

JoinResult compact_join(const PaddedJoinResult& padded);

/// The two join operands plus their declared properties. Declaring the
/// small side unique is verified during the build. A small side larger
/// than the large side is legal but logged.
struct JoinInput {
    Column large;
    Column small;
    bool l_resident_in_hbm = false;
    bool s_unique = false;
};

/// Partition bounds for the large side: floor division, remainder to the
/// last worker.
std::vector<std::pair<std::size_t, std::size_t>> partition_ranges(std::size_t count, int parts);

/// Runs one engine per partition and concatenates in engine order.
JoinOutput join_scaleout(const Column& large, const Column& small, int num_engines,
                         std::size_t table_capacity = 8192, JoinEngineFlags flags = {});

JoinOutput join_scaleout(const JoinInput& input, int num_engines,
                         std::size_t table_capacity = 8192);

struct JoinModelParams {
    int num_engines = 7;
    std::uint64_t l_tuples = 512'000'000;
    std::uint64_t s_tuples = 4096;
    bool l_load = false;
    bool s_unique = true;
    bool handle_collisions = false;
    bool include_build = true;
    double host_link_gbps = 12.0;       // effective single-datamover load rate
    double engine_efficiency = 0.90;
    double collision_ii = 6.0;          // probe loop II with the collision path
    double nonunique_chain_factor = 1.15;
    std::uint64_t table_capacity = 8192;
};

struct JoinRateReport {
    int passes = 0;
    double seconds = 0.0;
    double gbps = 0.0; // sizeof(L) / seconds
    double load_seconds = 0.0;
    double build_seconds = 0.0;
    double probe_seconds = 0.0;
    double copy_out_seconds = 0.0;
};

/// End-to-end modeled rate for the multi-engine join, Table-style flags.
JoinRateReport model_join_rate(const HbmGeometry& geometry, const JoinModelParams& params);

} // namespace hbmsim
