#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hbmsim/errors.hpp"
#include "hbmsim/orchestrator.hpp"

using namespace hbmsim;

TEST_CASE("engine shim ports skip the datamovers") {
    SystemConfig config;
    CHECK(config.engine_shim_port(0) == 1);
    CHECK(config.engine_shim_port(13) == 14);
    CHECK_THROWS_AS(config.engine_shim_port(14), ConfigError);
}

TEST_CASE("partitioned placement slices evenly onto distinct channel pairs") {
    SystemConfig config;
    const std::uint64_t bytes = 512'000'000;
    const PlacementPlan plan = plan_placement(config, bytes, 14, PlacementMode::partitioned);
    REQUIRE(plan.engines.size() == 14);

    std::uint64_t placed = 0;
    std::set<int> channels;
    for (const auto& engine : plan.engines) {
        CHECK(engine.shim_port >= 1);
        CHECK(engine.shim_port <= 14);
        std::uint64_t engine_bytes = 0;
        for (const Extent& extent : engine.extents) {
            engine_bytes += extent.length;
            const int channel = channel_of(config.geometry, extent.base);
            CHECK(channel_of(config.geometry, extent.end() - 1) == channel);
            CHECK((channel == engine.shim_port || channel == engine.shim_port + 16));
            CHECK(channels.insert(channel).second); // pairwise disjoint channels
        }
        // Both raw ports of the pair carry half the slice.
        CHECK(engine.extents.size() == 2);
        placed += engine_bytes;
    }
    CHECK(placed == bytes);
    // ~36.6 MB per engine.
    CHECK(plan.engines[0].extents[0].length + plan.engines[0].extents[1].length ==
          bytes / 14);
}

TEST_CASE("replication respects the per-engine window") {
    SystemConfig config;
    const std::uint64_t im_bytes = 340'800'000;
    const PlacementPlan plan = plan_placement(config, im_bytes, 14, PlacementMode::replicated);
    for (const auto& engine : plan.engines) {
        std::uint64_t total = 0;
        for (const Extent& e : engine.extents) total += e.length;
        CHECK(total == im_bytes);
    }
    CHECK_THROWS_AS(plan_placement(config, 600 * kMiB, 2, PlacementMode::replicated),
                    CapacityError);
}

TEST_CASE("partitioned slices larger than a window are rejected") {
    SystemConfig config;
    CHECK_THROWS_AS(plan_placement(config, 8 * kGiB, 14, PlacementMode::partitioned),
                    CapacityError);
}

TEST_CASE("nonpartitioned placement is one contiguous copy from address zero") {
    SystemConfig config;
    const PlacementPlan plan =
        plan_placement(config, 512'000'000, 14, PlacementMode::nonpartitioned);
    std::uint64_t expected_base = 0;
    for (const auto& engine : plan.engines) {
        REQUIRE(engine.extents.size() == 1);
        CHECK(engine.extents[0].base == expected_base);
        expected_base = engine.extents[0].end();
    }
    CHECK(expected_base == 512'000'000);
}

TEST_CASE("engine traffic never rides the datamover ports") {
    SystemConfig config;
    const int mover_first = config.datamover_shim_ports[0];
    const int mover_second = config.datamover_shim_ports[1];
    for (const PlacementMode mode :
         {PlacementMode::partitioned, PlacementMode::nonpartitioned, PlacementMode::replicated}) {
        const std::uint64_t bytes = mode == PlacementMode::replicated ? 100 * kMiB : 512'000'000;
        const PlacementPlan plan = plan_placement(config, bytes, 14, mode);
        const AccessPlan access = engine_read_plan(config, plan, {});
        for (const PortAccess& port : access.ports) {
            CHECK(port.port_id != mover_first);
            CHECK(port.port_id != mover_second);
            CHECK(port.port_id != mover_first + 16);
            CHECK(port.port_id != mover_second + 16);
        }
    }
}

TEST_CASE("host transfers divide over the active datamovers") {
    SystemConfig config;
    CHECK(host_transfer_time(config, 0) == 0.0);
    CHECK(host_transfer_time(config, 2'000'000'000ull) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(host_transfer_time(config, 2'000'000'000ull, 1) ==
          doctest::Approx(0.08).epsilon(1e-12));
    CHECK_THROWS_AS(host_transfer_time(config, 1, 3), ConfigError);
}

TEST_CASE("engine status enforces idle -> running -> terminal") {
    EngineStatus status;
    status.start();
    CHECK_THROWS_AS(status.start(), ConsistencyError);
    status.finish(EngineState::done);
    CHECK(status.state == EngineState::done);
    CHECK_THROWS_AS(status.finish(EngineState::done), ConsistencyError);

    EngineStatus fresh;
    CHECK_THROWS_AS(fresh.finish(EngineState::done), ConsistencyError);
    fresh.start();
    CHECK_THROWS_AS(fresh.finish(EngineState::running), ConsistencyError);
}

TEST_CASE("cost reports add phases and derive rates") {
    CostReport report;
    report.principal_bytes = 1'000'000'000;
    report.phases.push_back({"a", 500, 0.25});
    report.phases.push_back({"b", 500, 0.75});
    CHECK(report.total_seconds() == doctest::Approx(1.0));
    CHECK(report.gbps() == doctest::Approx(1.0));
    CHECK(report.find("a") != nullptr);
    CHECK(report.find("missing") == nullptr);
}

TEST_CASE("selection experiment verifies and prices the benchmark shape") {
    SystemConfig config;
    SelectWorkload workload;
    workload.num_items = 128'000'000;
    workload.verify_items = 400'000;
    const ExperimentReport report = run_experiment(config, workload);
    CHECK(report.ok);
    CHECK(report.oracle_ok);
    CHECK(report.modeled_gbps == doctest::Approx(154.112).epsilon(1e-6));
    for (const auto& engine : report.engines) {
        CHECK(engine.state == EngineState::done);
    }
    CHECK(report.matches == 0); // selectivity 0
}

TEST_CASE("removing an optional phase never increases total time") {
    SystemConfig config;
    SelectWorkload workload;
    workload.num_items = 16'000'000;
    workload.verify_items = 100'000;
    workload.selectivity = 0.5;
    workload.include_output_copy = true;
    const double with_copy = run_experiment(config, workload).cost.total_seconds();
    workload.include_output_copy = false;
    const double no_copy = run_experiment(config, workload).cost.total_seconds();
    CHECK(no_copy <= with_copy);
}

TEST_CASE("join experiment reproduces the best-case table row") {
    SystemConfig config;
    JoinWorkload workload;
    workload.verify_l = 30'000;
    workload.verify_s = 2'000;
    const ExperimentReport report = run_experiment(config, workload);
    CHECK(report.ok);
    CHECK(report.oracle_ok);
    CHECK(report.modeled_gbps == doctest::Approx(80.95).epsilon(0.01));
    CHECK(report.cost.find("probe") != nullptr);
    CHECK(report.cost.find("copy_out") != nullptr);
    CHECK(report.cost.find("load") != nullptr); // small side always streams in
}

TEST_CASE("sgd experiment reaches the replicated peak rate") {
    SystemConfig config;
    SgdWorkload workload;
    workload.data.m = 512;
    workload.data.n = 2048;
    workload.data.kind = LabelKind::binary;
    workload.data.seed = 4;
    SgdConfig job;
    job.loss = LossKind::logistic;
    job.step_size = 0.01f;
    job.minibatch = 16;
    job.epochs = 2;
    workload.configs.assign(28, job);
    const ExperimentReport report = run_experiment(config, workload);
    CHECK(report.ok);
    CHECK(report.modeled_gbps == doctest::Approx(155.904).epsilon(0.01));
    CHECK(report.final_losses.size() == 28);
    CHECK(report.cost.find("host_copy") != nullptr);
}

TEST_CASE("failures land in the report with engines in error state") {
    SystemConfig config;
    SgdWorkload workload;
    workload.data.m = 8;
    workload.data.n = 4;
    SgdConfig bad;
    bad.minibatch = 64; // larger than m
    workload.configs = {bad};
    workload.num_engines = 2;
    const ExperimentReport report = run_experiment(config, workload);
    CHECK(!report.ok);
    CHECK(!report.error.empty());
    for (const auto& engine : report.engines) {
        CHECK(engine.state == EngineState::error);
    }
}
