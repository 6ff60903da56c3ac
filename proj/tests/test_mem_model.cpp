#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hbmsim/bandwidth.hpp"
#include "hbmsim/errors.hpp"
#include "hbmsim/geometry.hpp"

using namespace hbmsim;

namespace {

AccessPlan single_extent_plan(const std::vector<std::pair<int, Extent>>& loads) {
    AccessPlan plan;
    for (const auto& [port, extent] : loads) {
        plan.add_port(port).accesses.push_back({extent, Direction::read, 1});
    }
    return plan;
}

} // namespace

TEST_CASE("geometry defaults describe the 8 GiB two-stack device") {
    const HbmGeometry g;
    CHECK(g.total_capacity() == 8 * kGiB);
    CHECK(g.raw_port_count() == 32);
    CHECK(g.shim_port_count() == 16);
    CHECK(g.raw_port_peak_bytes() == doctest::Approx(6.4e9));
    CHECK(g.shim_port_peak_bytes() == doctest::Approx(12.8e9));
    CHECK(g.second_port_offset() == 4 * kGiB);
}

TEST_CASE("channel_of maps addresses to contiguous equal channels") {
    const HbmGeometry g;
    CHECK(channel_of(g, 0) == 0);
    CHECK(channel_of(g, 268435456) == 1); // first byte past channel 0
    CHECK(channel_of(g, 8 * kGiB - 1) == 31);
    CHECK_THROWS_AS(channel_of(g, 8 * kGiB), AddressRangeError);

    // Partition property: preimages are disjoint contiguous runs of equal
    // size covering all 32 channels.
    for (int c = 0; c < 32; ++c) {
        const std::uint64_t base = static_cast<std::uint64_t>(c) * g.channel_capacity;
        CHECK(channel_of(g, base) == c);
        CHECK(channel_of(g, base + g.channel_capacity - 1) == c);
    }
}

TEST_CASE("merged ports pair one raw port from each stack") {
    const HbmGeometry g;
    for (int s = 0; s < g.shim_port_count(); ++s) {
        const ShimPortMap map = shim_port_map(g, s);
        CHECK(map.first_raw_port / g.channels_per_stack == 0);
        CHECK(map.second_raw_port / g.channels_per_stack == 1);
        CHECK(map.second_port_offset == g.second_port_offset());
    }
    CHECK_THROWS_AS(shim_port_map(g, 16), ConfigError);
    CHECK_THROWS_AS(shim_port_map(g, -1), ConfigError);
}

TEST_CASE("shim_resolve splits a window extent at the channel boundary") {
    const HbmGeometry g;

    SUBCASE("first half stays on the first raw port") {
        const auto parts = shim_resolve(g, 0, Extent{0, 256 * kMiB});
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].raw_port == 0);
        CHECK(parts[0].extent == Extent{0, 256 * kMiB});
        CHECK(channel_of(g, parts[0].extent.base) == 0);
    }

    SUBCASE("full window covers both stacks' channels") {
        const auto parts = shim_resolve(g, 0, Extent{0, 512 * kMiB});
        REQUIRE(parts.size() == 2);
        CHECK(parts[0].raw_port == 0);
        CHECK(parts[0].extent.length == 256 * kMiB);
        CHECK(parts[1].raw_port == 16);
        CHECK(parts[1].extent.length == 256 * kMiB);
        CHECK(channel_of(g, parts[1].extent.base) == 16);
    }

    SUBCASE("degenerate length stays on the owning port") {
        const auto parts = shim_resolve(g, 15, Extent{0, 1});
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].raw_port == 15);
        CHECK(parts[0].extent == Extent{15 * 256 * kMiB, 1});
    }

    SUBCASE("oversized extent is rejected") {
        CHECK_THROWS_AS(shim_resolve(g, 0, Extent{0, 512 * kMiB + 1}), CapacityError);
        CHECK_THROWS_AS(shim_resolve(g, 0, Extent{256 * kMiB, 512 * kMiB}), CapacityError);
    }
}

TEST_CASE("shim isolation: any window access touches only the pair's channels") {
    const HbmGeometry g;
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> port(0, 15);
    std::uniform_int_distribution<std::uint64_t> base(0, 512 * kMiB - 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int s = port(rng);
        const std::uint64_t b = base(rng);
        std::uniform_int_distribution<std::uint64_t> len(1, 512 * kMiB - b);
        const Extent logical{b, len(rng)};
        const auto parts = shim_resolve(g, s, logical);
        REQUIRE(!parts.empty());
        REQUIRE(parts.size() <= 2);
        std::uint64_t covered = 0;
        for (const auto& part : parts) {
            covered += part.extent.length;
            const int first = channel_of(g, part.extent.base);
            const int last = channel_of(g, part.extent.end() - 1);
            CHECK(first == last);
            CHECK((first == s || first == s + 16));
        }
        CHECK(covered == logical.length);
    }
}

TEST_CASE("effective bandwidth of ideally separated ports is linear") {
    const HbmGeometry g;
    const double per_port = g.channel_peak_bytes();

    AccessPlan plan;
    for (int p = 0; p < 32; ++p) {
        plan.add_port(p).accesses.push_back(
            {Extent{static_cast<std::uint64_t>(p) * g.channel_capacity, kMiB},
             Direction::read, 1});
    }
    const BandwidthReport report = effective_bandwidth(g, plan);
    CHECK(report.aggregate_gbps() == doctest::Approx(190.464).epsilon(1e-9));
    CHECK(report.aggregate_bytes_per_sec == doctest::Approx(32 * per_port).epsilon(1e-12));

    for (int k = 1; k <= 32; ++k) {
        AccessPlan partial;
        for (int p = 0; p < k; ++p) {
            partial.add_port(p).accesses.push_back(
                {Extent{static_cast<std::uint64_t>(p) * g.channel_capacity, kMiB},
                 Direction::read, 1});
        }
        const BandwidthReport r = effective_bandwidth(g, partial);
        CHECK(r.aggregate_bytes_per_sec == doctest::Approx(k * per_port).epsilon(1e-12));
    }
}

TEST_CASE("all ports on one channel collapse to that channel's peak") {
    const HbmGeometry g;
    AccessPlan plan;
    for (int p = 0; p < 32; ++p) {
        plan.add_port(p).accesses.push_back({Extent{0, kMiB}, Direction::read, 1});
    }
    const BandwidthReport report = effective_bandwidth(g, plan);
    CHECK(report.aggregate_bytes_per_sec == doctest::Approx(g.channel_peak_bytes()).epsilon(1e-12));
    CHECK(report.aggregate_gbps() == doctest::Approx(5.952).epsilon(1e-9));
    // 1/32 of the ideal aggregate.
    CHECK(report.aggregate_gbps() == doctest::Approx(190.464 / 32.0).epsilon(1e-9));
    for (double rate : report.port_bytes_per_sec) {
        CHECK(rate == doctest::Approx(g.channel_peak_bytes() / 32.0).epsilon(1e-12));
    }
}

TEST_CASE("single port on a single channel runs at channel peak") {
    const HbmGeometry g;
    const auto report = effective_bandwidth(g, single_extent_plan({{3, Extent{0, kMiB}}}));
    CHECK(report.aggregate_bytes_per_sec == doctest::Approx(g.channel_peak_bytes()).epsilon(1e-12));
}

TEST_CASE("empty plan yields an empty report") {
    const HbmGeometry g;
    const auto report = effective_bandwidth(g, AccessPlan{});
    CHECK(report.aggregate_bytes_per_sec == 0.0);
    CHECK(report.port_ids.empty());
}

TEST_CASE("port rate caps bound the granted rate") {
    const HbmGeometry g;
    AccessPlan plan;
    auto& port = plan.add_port(0);
    port.accesses.push_back({Extent{0, kMiB}, Direction::read, 1});
    port.rate_cap_bytes = 1e9;
    const auto report = effective_bandwidth(g, plan);
    CHECK(report.aggregate_bytes_per_sec == doctest::Approx(1e9).epsilon(1e-12));
}

TEST_CASE("invalid plans are rejected") {
    const HbmGeometry g;
    CHECK_THROWS_AS(
        effective_bandwidth(g, single_extent_plan({{0, Extent{8 * kGiB - 1, 2}}})),
        AddressRangeError);
    AccessPlan plan;
    plan.add_port(32).accesses.push_back({Extent{0, kMiB}, Direction::read, 1});
    CHECK_THROWS_AS(effective_bandwidth(g, plan), ConfigError);
}

TEST_CASE("adding a port never raises an existing port's rate") {
    // Holds for single-channel demands (the traffic-generator shape); with
    // multi-channel splits, max-min fairness is famously non-monotone.
    const HbmGeometry g;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> num_ports(1, 31);
    std::uniform_int_distribution<std::uint64_t> channel(0, 31);

    for (int trial = 0; trial < 100; ++trial) {
        const int k = num_ports(rng);
        AccessPlan plan;
        for (int p = 0; p < k; ++p) {
            plan.add_port(p).accesses.push_back(
                {Extent{channel(rng) * g.channel_capacity, kMiB}, Direction::read, 1});
        }
        const BandwidthReport before = effective_bandwidth(g, plan);

        auto& added = plan.add_port(k);
        added.accesses.push_back(
            {Extent{channel(rng) * g.channel_capacity, kMiB}, Direction::read, 1});
        const BandwidthReport after = effective_bandwidth(g, plan);

        for (int p = 0; p < k; ++p) {
            CHECK(after.port_bytes_per_sec[static_cast<std::size_t>(p)] <=
                  before.port_bytes_per_sec[static_cast<std::size_t>(p)] + 1.0);
        }
        double max_channel_before = 0.0;
        for (double c : before.channel_bytes_per_sec) {
            max_channel_before = std::max(max_channel_before, c);
        }
        CHECK(after.aggregate_bytes_per_sec >= max_channel_before - 1.0);
    }
}

TEST_CASE("served channel rates never exceed channel peaks") {
    const HbmGeometry g;
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::uint64_t> base(0, 8 * kGiB - 2 * kMiB);
    std::uniform_int_distribution<int> num_ports(1, 32);

    for (int trial = 0; trial < 100; ++trial) {
        AccessPlan plan;
        const int k = num_ports(rng);
        for (int p = 0; p < k; ++p) {
            plan.add_port(p).accesses.push_back(
                {Extent{base(rng), 2 * kMiB}, Direction::read, 1});
        }
        const BandwidthReport report = effective_bandwidth(g, plan);
        double served = 0.0;
        for (double c : report.channel_bytes_per_sec) {
            CHECK(c <= g.channel_peak_bytes() * (1 + 1e-9));
            served += c;
        }
        CHECK(served == doctest::Approx(report.aggregate_bytes_per_sec).epsilon(1e-9));
    }
}
