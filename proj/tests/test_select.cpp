#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <thread>

#include "hbmsim/errors.hpp"
#include "hbmsim/select.hpp"

using namespace hbmsim;

namespace {

Column random_column(std::size_t n, std::mt19937_64& rng, std::int32_t lo = -1000,
                     std::int32_t hi = 1000) {
    std::uniform_int_distribution<std::int32_t> dist(lo, hi);
    Column column(n);
    for (auto& v : column) v = dist(rng);
    return column;
}

} // namespace

TEST_CASE("lane buffers police their own invariants") {
    LaneBuffers buffers(4, 2);
    buffers.push(0, 0);
    buffers.push(0, 4);
    CHECK(buffers.any_full());
    CHECK(!buffers.empty());
    CHECK_THROWS_AS(buffers.push(0, 8), ConsistencyError);  // overflow
    CHECK_THROWS_AS(buffers.push(4, 0), ConsistencyError);  // lane out of range
    buffers.clear();
    CHECK(buffers.empty());
    CHECK_THROWS_AS(LaneBuffers(0, 4), ConfigError);
    CHECK_THROWS_AS(LaneBuffers(4, 0), ConfigError);
}

TEST_CASE("oracle keeps strictly inner values in ascending index order") {
    CHECK(select_oracle({5, 10, 15}, {4, 16}).indices == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(select_oracle({5, 10, 15}, {5, 15}).indices == std::vector<std::uint32_t>{1});
    CHECK(select_oracle({}, {0, 100}).num_matches == 0);
    // Inverted and empty ranges match nothing.
    CHECK(select_oracle({1, 2, 3}, {3, 1}).num_matches == 0);
    CHECK(select_oracle({1, 2, 3}, {2, 3}).num_matches == 0);
}

TEST_CASE("engine fills exactly one line when a full group matches") {
    Column input(16, 1);
    const auto [padded, cost] = engine_select(input, {0, 2});
    CHECK(padded.num_lines() == 1);
    CHECK(padded.num_matches == 16);
    for (std::size_t l = 0; l < 16; ++l) {
        CHECK(padded.slot(0, l) != PaddedResult::kDummy);
        CHECK(padded.lane_valid[l] == 1);
    }
    CHECK(cost.bytes_written == 64);
}

TEST_CASE("uneven lanes pad the trailing line with dummies") {
    // Lane 0 matches twice (indices 0 and 16), lanes 1..15 once.
    Column input(32, 100);
    for (std::size_t i = 0; i < 16; ++i) input[i] = 1;
    input[16] = 1;
    const auto [padded, cost] = engine_select(input, {0, 2});
    CHECK(padded.num_lines() == 2);
    CHECK(padded.num_matches == 17);
    int dummies = 0;
    for (std::size_t l = 0; l < 16; ++l) {
        if (padded.slot(1, l) == PaddedResult::kDummy) ++dummies;
    }
    CHECK(dummies == 15);
    CHECK(padded.slot(1, 0) == 16);
}

TEST_CASE("zero selectivity writes nothing and costs only ingress") {
    Column input(1 << 16, 50);
    const auto [padded, cost] = engine_select(input, {100, 200});
    CHECK(padded.num_lines() == 0);
    CHECK(cost.bytes_written == 0);
    CHECK(cost.ingress_cycles == input.size() / 16);
    CHECK(cost.egress_cycles == 0);
    CHECK(cost.bytes_read == 4 * input.size());
}

TEST_CASE("tail shorter than the lane width is handled") {
    Column input(21, 1); // 16 + 5 tail
    const auto [padded, cost] = engine_select(input, {0, 2});
    CHECK(cost.ingress_cycles == 2); // ceil(21/16)
    CHECK(padded.num_matches == 21);
    const auto compacted = compact(padded);
    CHECK(compacted.indices == select_oracle(input, {0, 2}).indices);
}

TEST_CASE("egress fires when any lane buffer fills") {
    // Small buffer: lane 0 fills after 4 matches while others stay empty.
    Column input(16 * 8, 100);
    for (int g = 0; g < 8; ++g) input[static_cast<std::size_t>(g) * 16] = 1;
    const auto [padded, cost] = engine_select(input, {0, 2}, 16, 4);
    CHECK(padded.burst_offsets.size() == 2);
    CHECK(padded.num_matches == 8);
    // Within every burst each lane's dummies trail its valid slots.
    for (std::size_t b = 0; b < padded.burst_offsets.size(); ++b) {
        const std::size_t first = padded.burst_offsets[b];
        const std::size_t last = b + 1 < padded.burst_offsets.size()
                                     ? padded.burst_offsets[b + 1]
                                     : padded.num_lines();
        for (std::size_t l = 0; l < 16; ++l) {
            bool seen_dummy = false;
            for (std::size_t j = first; j < last; ++j) {
                if (padded.slot(j, l) == PaddedResult::kDummy) {
                    seen_dummy = true;
                } else {
                    CHECK(!seen_dummy);
                }
            }
        }
    }
}

TEST_CASE("single valid slot compacts to its index") {
    PaddedResult padded;
    padded.parallelism = 16;
    padded.lane_valid.assign(16, 0);
    padded.slots.assign(16, PaddedResult::kDummy);
    padded.slots[3] = 3;
    padded.lane_valid[3] = 1;
    padded.num_matches = 1;
    padded.burst_offsets = {0};
    const auto result = compact(padded);
    CHECK(result.indices == std::vector<std::uint32_t>{3});
}

TEST_CASE("empty padded result compacts to nothing") {
    PaddedResult padded;
    padded.parallelism = 16;
    padded.lane_valid.assign(16, 0);
    const auto result = compact(padded);
    CHECK(result.num_matches == 0);
    CHECK(result.indices.empty());
}

TEST_CASE("malformed lane counts are detected") {
    PaddedResult padded;
    padded.parallelism = 16;
    padded.lane_valid.assign(16, 0);
    padded.slots.assign(16, PaddedResult::kDummy);
    padded.slots[2] = 7;
    padded.num_matches = 1; // lane_valid[2] left at 0
    CHECK_THROWS_AS(compact(padded), ConsistencyError);
}

TEST_CASE("compacted engine output equals the oracle") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::int32_t> bound(-1200, 1200);
    for (int trial = 0; trial < 300; ++trial) {
        std::uniform_int_distribution<std::size_t> size(0, 5000);
        const std::size_t n = size(rng);
        const Column input = random_column(n, rng);
        std::int32_t a = bound(rng);
        std::int32_t b = bound(rng);
        const RangePredicate predicate{std::min(a, b), std::max(a, b)};
        const auto [padded, cost] = engine_select(input, predicate);
        const auto compacted = compact(padded);
        const auto expected = select_oracle(input, predicate);
        REQUIRE(compacted.indices == expected.indices);
        REQUIRE(compacted.num_matches == expected.num_matches);

        std::uint64_t lane_total = 0;
        for (const auto c : padded.lane_valid) lane_total += c;
        CHECK(lane_total == expected.num_matches);
        // Lane residue invariant.
        const std::size_t lines = padded.num_lines();
        for (std::size_t j = 0; j < lines; ++j) {
            for (std::size_t l = 0; l < 16; ++l) {
                const auto v = padded.slot(j, l);
                if (v != PaddedResult::kDummy) CHECK(v % 16 == l);
            }
        }
    }
}

TEST_CASE("oracle equivalence holds for other lane widths and buffer depths") {
    std::mt19937_64 rng(37);
    const struct {
        std::size_t parallelism;
        std::size_t buffer_size;
    } shapes[] = {{4, 2}, {8, 16}, {16, 3}, {16, 1024}, {1, 1}};
    for (const auto& shape : shapes) {
        for (int trial = 0; trial < 20; ++trial) {
            std::uniform_int_distribution<std::size_t> size(0, 2000);
            const Column input = random_column(size(rng), rng);
            const RangePredicate predicate{-300, 300};
            const auto out = engine_select(input, predicate, shape.parallelism, shape.buffer_size);
            CHECK(compact(out.padded).indices == select_oracle(input, predicate).indices);
        }
    }
}

TEST_CASE("boundary values are never selected") {
    std::mt19937_64 rng(23);
    const Column input = random_column(4096, rng, -50, 50);
    const RangePredicate predicate{-10, 10};
    const auto result = select_oracle(input, predicate);
    for (const auto i : result.indices) {
        CHECK(input[i] > -10);
        CHECK(input[i] < 10);
    }
    const auto compacted = compact(engine_select(input, predicate).padded);
    CHECK(compacted.indices == result.indices);
}

TEST_CASE("engine is a pure function, callable from many threads") {
    std::mt19937_64 rng(29);
    const Column input = random_column(100000, rng);
    const RangePredicate predicate{-500, 500};
    const auto expected = select_oracle(input, predicate);

    std::vector<std::thread> threads;
    std::vector<bool> ok(4, false);
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            const auto compacted = compact(engine_select(input, predicate).padded);
            ok[static_cast<std::size_t>(t)] = compacted.indices == expected.indices;
        });
    }
    for (auto& t : threads) t.join();
    for (const bool result : ok) CHECK(result);
}

TEST_CASE("selection rate model reproduces the calibrated points") {
    const HbmGeometry g;

    SelectionModelParams best;
    CHECK(model_selection_rate(g, best) == doctest::Approx(154.112).epsilon(1e-6));

    SelectionModelParams full = best;
    full.selectivity = 1.0;
    const double ratio = model_selection_rate(g, full) / model_selection_rate(g, best);
    CHECK(ratio == doctest::Approx(0.5).epsilon(1e-9));

    SelectionModelParams shared = best;
    shared.placement = Placement::nonpartitioned;
    CHECK(model_selection_rate(g, shared) == doctest::Approx(11.904).epsilon(1e-3));

    SelectionModelParams one = best;
    one.num_engines = 1;
    CHECK(model_selection_rate(g, one) == doctest::Approx(154.112 / 14).epsilon(1e-6));
}

TEST_CASE("selection rate model is monotone") {
    const HbmGeometry g;
    SelectionModelParams params;
    double previous = 1e18;
    for (double sel : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
        params.selectivity = sel;
        const double rate = model_selection_rate(g, params);
        CHECK(rate <= previous + 1e-9);
        previous = rate;
    }
    params.selectivity = 0.2;
    previous = 0.0;
    for (int engines = 1; engines <= 14; ++engines) {
        params.num_engines = engines;
        const double rate = model_selection_rate(g, params);
        CHECK(rate >= previous - 1e-9);
        previous = rate;
    }
}

TEST_CASE("output copy time lowers the effective rate") {
    const HbmGeometry g;
    SelectionModelParams params;
    params.selectivity = 0.5;
    params.include_output_copy = true;
    const double with_copy = model_selection_rate(g, params);
    params.include_output_copy = false;
    CHECK(with_copy < model_selection_rate(g, params));
}

TEST_CASE("engine count beyond the usable ports is rejected") {
    const HbmGeometry g;
    SelectionModelParams params;
    params.num_engines = 15;
    CHECK_THROWS_AS(model_selection_rate(g, params), ConfigError);
    params.num_engines = 14;
    params.selectivity = 1.5;
    CHECK_THROWS_AS(model_selection_rate(g, params), ConfigError);
    params.selectivity = -0.1;
    CHECK_THROWS_AS(model_selection_rate(g, params), ConfigError);
}
