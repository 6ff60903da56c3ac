#include "hbmsim/join.hpp"

#include <algorithm>
#include <string>

#include "hbmsim/errors.hpp"
#include "hbmsim/log.hpp"
#include "hbmsim/placement.hpp"

namespace hbmsim {

namespace {

int bits_for(std::size_t buckets) {
    int bits = 0;
    while ((std::size_t{1} << bits) < buckets) ++bits;
    return bits;
}

} // namespace

HashTable::HashTable(std::size_t capacity, int replica_count)
    : capacity_(capacity), replica_count_(replica_count) {
    if (capacity == 0) {
        throw ConfigError("hash table capacity must be positive");
    }
    bucket_bits_ = bits_for(capacity);
    heads_.assign(std::size_t{1} << bucket_bits_, -1);
    entries_.reserve(capacity);
}

std::size_t HashTable::bucket_of(std::int32_t key) const {
    // Fibonacci hashing: golden-ratio multiply, top bits index the bucket.
    const std::uint32_t h = static_cast<std::uint32_t>(key) * 2654435769u;
    return bucket_bits_ == 0 ? 0 : h >> (32 - bucket_bits_);
}

void HashTable::insert(std::int32_t key, std::uint32_t slot) {
    if (entries_.size() >= capacity_) {
        throw CapacityError("hash table full at " + std::to_string(capacity_) + " tuples");
    }
    const std::size_t bucket = bucket_of(key);
    const std::int32_t index = static_cast<std::int32_t>(entries_.size());
    entries_.push_back({key, slot, -1});
    std::int32_t head = heads_[bucket];
    if (head < 0) {
        heads_[bucket] = index;
        return;
    }
    // Append at the chain tail so lookups see insertion order.
    while (true) {
        if (entries_[static_cast<std::size_t>(head)].key == key) saw_duplicate_key_ = true;
        const std::int32_t next = entries_[static_cast<std::size_t>(head)].next;
        if (next < 0) break;
        head = next;
    }
    entries_[static_cast<std::size_t>(head)].next = index;
}

void HashTable::for_each_match(std::int32_t key,
                               const std::function<void(std::uint32_t)>& fn) const {
    for (std::int32_t i = heads_[bucket_of(key)]; i >= 0;
         i = entries_[static_cast<std::size_t>(i)].next) {
        if (entries_[static_cast<std::size_t>(i)].key == key) {
            fn(entries_[static_cast<std::size_t>(i)].slot);
        }
    }
}

std::size_t HashTable::chain_length(std::int32_t key) const {
    std::size_t length = 0;
    for (std::int32_t i = heads_[bucket_of(key)]; i >= 0;
         i = entries_[static_cast<std::size_t>(i)].next) {
        ++length;
    }
    return length;
}

HashTable build_hash_table(const Column& s_chunk, std::size_t capacity) {
    if (s_chunk.size() > capacity) {
        throw CapacityError("build side of " + std::to_string(s_chunk.size()) +
                            " tuples exceeds the table capacity " + std::to_string(capacity));
    }
    HashTable table(capacity);
    for (std::size_t i = 0; i < s_chunk.size(); ++i) {
        table.insert(s_chunk[i], static_cast<std::uint32_t>(i));
    }
    return table;
}

JoinResult join_oracle(const Column& large, const Column& small) {
    JoinResult result;
    // Canonical order: key ascending, then position in L.
    std::vector<std::pair<std::int32_t, std::size_t>> matches;
    for (std::size_t li = 0; li < large.size(); ++li) {
        for (const std::int32_t s : small) {
            if (s == large[li]) matches.emplace_back(s, li);
        }
    }
    std::sort(matches.begin(), matches.end());
    result.s_out.reserve(matches.size());
    result.l_out.reserve(matches.size());
    for (const auto& [key, li] : matches) {
        result.s_out.push_back(key);
        result.l_out.push_back(large[li]);
    }
    result.num_matches = matches.size();
    return result;
}

JoinOutput engine_join(const Column& l_partition, const Column& small, std::size_t parallelism,
                       std::size_t table_capacity, JoinEngineFlags flags) {
    if (parallelism == 0) {
        throw ConfigError("join parallelism must be positive");
    }
    JoinOutput out;
    out.padded.parallelism = parallelism;
    const std::size_t num_chunks = (small.size() + table_capacity - 1) / table_capacity;
    out.cost.passes = static_cast<int>(num_chunks);
    out.cost.s_bytes_read = 4ull * small.size();
    out.cost.l_bytes_read = 4ull * l_partition.size() * num_chunks;

    std::vector<std::vector<std::int32_t>> lane_matches(parallelism);
    for (std::size_t pass = 0; pass < num_chunks; ++pass) {
        const std::size_t chunk_base = pass * table_capacity;
        const std::size_t chunk_end = std::min(small.size(), chunk_base + table_capacity);
        Column chunk(small.begin() + static_cast<std::ptrdiff_t>(chunk_base),
                     small.begin() + static_cast<std::ptrdiff_t>(chunk_end));
        const HashTable table = build_hash_table(chunk, table_capacity);
        out.cost.build_cycles += table.build_cycles();
        if (table.saw_duplicate_key() && flags.s_unique_declared) {
            if (!flags.handle_collisions) {
                throw ConfigError("small side declared unique but holds duplicate keys");
            }
            log::warn("join: small side declared unique but holds duplicate keys");
        }

        for (std::size_t group = 0; group < l_partition.size(); group += parallelism) {
            const std::size_t group_end = std::min(l_partition.size(), group + parallelism);
            std::size_t group_lines = 0;
            std::size_t worst_chain = 1; // empty buckets still take the probe cycle
            for (std::size_t l = 0; l < parallelism; ++l) {
                lane_matches[l].clear();
                const std::size_t i = group + l;
                if (i >= group_end) continue;
                const std::int32_t probe = l_partition[i];
                table.for_each_match(
                    probe, [&](std::uint32_t) { lane_matches[l].push_back(probe); });
                worst_chain = std::max(worst_chain, table.chain_length(probe));
                group_lines = std::max(group_lines, lane_matches[l].size());
            }
            // Lanes advance in lockstep: the group stalls for its slowest walk.
            out.cost.probe_cycles += worst_chain;

            for (std::size_t j = 0; j < group_lines; ++j) {
                std::uint16_t mask = 0;
                for (std::size_t l = 0; l < parallelism; ++l) {
                    if (j < lane_matches[l].size()) {
                        mask = static_cast<std::uint16_t>(mask | (1u << l));
                        out.padded.s_slots.push_back(lane_matches[l][j]);
                        out.padded.l_slots.push_back(lane_matches[l][j]);
                        ++out.padded.num_matches;
                    } else {
                        out.padded.s_slots.push_back(PaddedJoinResult::kDummy);
                        out.padded.l_slots.push_back(PaddedJoinResult::kDummy);
                    }
                }
                out.padded.valid.push_back(mask);
            }
        }
    }

    // Two value streams, a full line each.
    out.cost.bytes_written = 2ull * 4ull * parallelism * out.padded.num_lines();
    return out;
}

JoinResult compact_join(const PaddedJoinResult& padded) {
    const std::size_t parallelism = padded.parallelism;
    if (parallelism == 0 || parallelism > 16) {
        throw ConsistencyError("join result parallelism out of range");
    }
    if (padded.s_slots.size() != padded.l_slots.size() ||
        padded.s_slots.size() != padded.valid.size() * parallelism) {
        throw ConsistencyError("join result shape mismatch");
    }
    JoinResult result;
    for (std::size_t line = 0; line < padded.num_lines(); ++line) {
        for (std::size_t l = 0; l < parallelism; ++l) {
            if (padded.valid[line] & (1u << l)) {
                result.s_out.push_back(padded.s_slots[line * parallelism + l]);
                result.l_out.push_back(padded.l_slots[line * parallelism + l]);
            }
        }
    }
    result.num_matches = result.s_out.size();
    if (result.num_matches != padded.num_matches) {
        throw ConsistencyError("validity mask disagrees with the match count");
    }
    return result;
}

std::vector<std::pair<std::size_t, std::size_t>> partition_ranges(std::size_t count, int parts) {
    if (parts < 1) {
        throw ConfigError("partition count must be positive");
    }
    const std::size_t base = count / static_cast<std::size_t>(parts);
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    ranges.reserve(static_cast<std::size_t>(parts));
    std::size_t begin = 0;
    for (int p = 0; p < parts; ++p) {
        std::size_t end = begin + base;
        if (p == parts - 1) end = count;
        ranges.emplace_back(begin, end);
        begin = end;
    }
    return ranges;
}

JoinOutput join_scaleout(const Column& large, const Column& small, int num_engines,
                         std::size_t table_capacity, JoinEngineFlags flags) {
    if (small.size() > large.size()) {
        log::warn("join: small side larger than large side, proceeding");
    }
    JoinOutput combined;
    combined.padded.parallelism = 16;
    const auto ranges = partition_ranges(large.size(), num_engines);
    for (const auto& [begin, end] : ranges) {
        Column partition(large.begin() + static_cast<std::ptrdiff_t>(begin),
                         large.begin() + static_cast<std::ptrdiff_t>(end));
        JoinOutput part = engine_join(partition, small, 16, table_capacity, flags);
        combined.padded.s_slots.insert(combined.padded.s_slots.end(), part.padded.s_slots.begin(),
                                       part.padded.s_slots.end());
        combined.padded.l_slots.insert(combined.padded.l_slots.end(), part.padded.l_slots.begin(),
                                       part.padded.l_slots.end());
        combined.padded.valid.insert(combined.padded.valid.end(), part.padded.valid.begin(),
                                     part.padded.valid.end());
        combined.padded.num_matches += part.padded.num_matches;
        combined.cost.passes = part.cost.passes;
        // The small side streams to every engine at once, so the build is
        // paid once; probing runs in parallel and finishes with the slowest
        // partition.
        combined.cost.build_cycles = part.cost.build_cycles;
        combined.cost.probe_cycles = std::max(combined.cost.probe_cycles, part.cost.probe_cycles);
        combined.cost.l_bytes_read += part.cost.l_bytes_read;
        combined.cost.s_bytes_read = part.cost.s_bytes_read;
        combined.cost.bytes_written += part.cost.bytes_written;
    }
    return combined;
}

JoinOutput join_scaleout(const JoinInput& input, int num_engines, std::size_t table_capacity) {
    JoinEngineFlags flags;
    flags.s_unique_declared = input.s_unique;
    return join_scaleout(input.large, input.small, num_engines, table_capacity, flags);
}

JoinRateReport model_join_rate(const HbmGeometry& geometry, const JoinModelParams& params) {
    SystemConfig config;
    config.geometry = geometry;
    const int max_engines = config.usable_engine_ports / 2; // an engine reads and writes at once
    if (params.num_engines < 1 || params.num_engines > max_engines) {
        throw ConfigError("join supports 1.." + std::to_string(max_engines) + " engines, got " +
                          std::to_string(params.num_engines));
    }
    if (!params.handle_collisions && !params.s_unique) {
        throw ConfigError("collision handling disabled requires a unique small side");
    }
    if (params.l_tuples == 0 || params.s_tuples == 0) {
        throw ConfigError("join model needs nonempty inputs");
    }

    JoinRateReport report;
    report.passes = static_cast<int>((params.s_tuples + params.table_capacity - 1) /
                                     params.table_capacity);

    const double host_bytes_per_sec = params.host_link_gbps * 1e9;
    const double l_bytes = 4.0 * static_cast<double>(params.l_tuples);
    const double s_bytes = 4.0 * static_cast<double>(params.s_tuples);

    double stall = 1.0;
    if (params.handle_collisions) {
        stall = params.collision_ii;
        if (!params.s_unique) stall *= params.nonunique_chain_factor;
    }

    // The small side always streams in; the large side only when requested.
    report.load_seconds = s_bytes / host_bytes_per_sec;
    if (params.l_load) report.load_seconds += l_bytes / host_bytes_per_sec;

    if (params.include_build) {
        report.build_seconds =
            static_cast<double>(params.s_tuples) / geometry.clock_hz;
    }

    const double probe_rate =
        params.num_engines * geometry.shim_port_peak_bytes() * params.engine_efficiency / stall;
    report.probe_seconds = static_cast<double>(report.passes) * l_bytes / probe_rate;

    // Results always return to the host; assume one match per small tuple.
    const double out_bytes = 2.0 * 4.0 * static_cast<double>(params.s_tuples);
    report.copy_out_seconds = out_bytes / host_bytes_per_sec;

    report.seconds = report.load_seconds + report.build_seconds + report.probe_seconds +
                     report.copy_out_seconds;
    report.gbps = l_bytes / report.seconds / 1e9;
    return report;
}

} // namespace hbmsim
