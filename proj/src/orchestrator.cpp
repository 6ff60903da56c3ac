#include "hbmsim/orchestrator.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "hbmsim/errors.hpp"

namespace hbmsim {

void EngineStatus::start() {
    if (state != EngineState::idle) {
        throw ConsistencyError("engine " + std::to_string(engine_id) + " started twice");
    }
    state = EngineState::running;
}

void EngineStatus::finish(EngineState terminal) {
    if (state != EngineState::running ||
        (terminal != EngineState::done && terminal != EngineState::error)) {
        throw ConsistencyError("engine " + std::to_string(engine_id) + " bad state transition");
    }
    state = terminal;
}

double CostReport::total_seconds() const {
    double total = 0.0;
    for (const Phase& phase : phases) total += phase.seconds;
    return total;
}

double CostReport::gbps() const {
    const double seconds = total_seconds();
    return seconds > 0.0 ? static_cast<double>(principal_bytes) / seconds / 1e9 : 0.0;
}

const Phase* CostReport::find(const std::string& name) const {
    for (const Phase& phase : phases) {
        if (phase.name == name) return &phase;
    }
    return nullptr;
}

namespace {

std::vector<EngineStatus> make_engines(int count) {
    std::vector<EngineStatus> engines(static_cast<std::size_t>(count));
    for (int e = 0; e < count; ++e) engines[static_cast<std::size_t>(e)].engine_id = e;
    return engines;
}

/// Input whose match fraction approximates the requested selectivity:
/// values uniform over the non-negative int32 range, predicate open at 0.
Column selectivity_column(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int32_t> dist(0, std::numeric_limits<std::int32_t>::max() - 1);
    Column column(n);
    for (auto& v : column) v = dist(rng);
    return column;
}

RangePredicate selectivity_predicate(double selectivity) {
    const double upper =
        selectivity * static_cast<double>(std::numeric_limits<std::int32_t>::max());
    return RangePredicate{-1, static_cast<std::int32_t>(upper)};
}

ExperimentReport run_select(const SystemConfig& config, const SelectWorkload& workload) {
    ExperimentReport report;
    report.engines = make_engines(workload.num_engines);

    const std::uint64_t data_bytes = 4ull * workload.num_items;
    const PlacementMode mode = workload.placement == Placement::partitioned
                                   ? PlacementMode::partitioned
                                   : PlacementMode::nonpartitioned;
    plan_placement(config, data_bytes, workload.num_engines, mode); // validates the fit
    report.cost.principal_bytes = data_bytes;

    SelectionModelParams params;
    params.num_engines = workload.num_engines;
    params.selectivity = workload.selectivity;
    params.placement = workload.placement;
    params.include_output_copy = false;
    params.host_link_gbps = config.host_link_gbps;
    params.data_bytes = data_bytes;
    const double scan_gbps = model_selection_rate(config.geometry, params);

    // Functional pass over (a prefix of) the data, partitioned like the plan.
    const std::size_t items =
        workload.verify_items == 0 ? workload.num_items
                                   : std::min(workload.verify_items, workload.num_items);
    const Column column = selectivity_column(items, workload.seed);
    const RangePredicate predicate = selectivity_predicate(workload.selectivity);
    const auto ranges = partition_ranges(items, workload.num_engines);
    std::uint64_t matches = 0;
    bool oracle_ok = true;
    for (std::size_t e = 0; e < ranges.size(); ++e) {
        EngineStatus& status = report.engines[e];
        status.start();
        try {
            Column part(column.begin() + static_cast<std::ptrdiff_t>(ranges[e].first),
                        column.begin() + static_cast<std::ptrdiff_t>(ranges[e].second));
            const SelectOutput out = engine_select(part, predicate);
            const SelectionResult compacted = compact(out.padded);
            const SelectionResult expected = select_oracle(part, predicate);
            oracle_ok &= compacted.indices == expected.indices;
            matches += compacted.num_matches;
            status.cycles = out.cost.ingress_cycles + out.cost.egress_cycles;
            status.bytes_in = out.cost.bytes_read;
            status.bytes_out = out.cost.bytes_written;
            status.finish(EngineState::done);
        } catch (const Error& e2) {
            status.finish(EngineState::error);
            report.ok = false;
            report.error = e2.what();
        }
    }
    report.matches = matches;
    report.oracle_ok = oracle_ok;

    const double scan_seconds = static_cast<double>(data_bytes) / (scan_gbps * 1e9);
    report.cost.phases.push_back({"scan", data_bytes, scan_seconds});
    if (workload.include_output_copy) {
        const auto out_bytes =
            static_cast<std::uint64_t>(workload.selectivity * static_cast<double>(data_bytes));
        report.cost.phases.push_back(
            {"copy_out", out_bytes, host_transfer_time(config, out_bytes, 2)});
    }
    report.modeled_gbps = report.cost.gbps();
    return report;
}

ExperimentReport run_join(const SystemConfig& config, const JoinWorkload& workload) {
    ExperimentReport report;
    report.engines = make_engines(workload.model.num_engines);
    report.cost.principal_bytes = 4ull * workload.model.l_tuples;

    const JoinRateReport model = model_join_rate(config.geometry, workload.model);

    // Functional verification at reduced scale with the workload's flags.
    std::mt19937_64 rng(workload.seed);
    const std::int32_t key_space = workload.model.s_unique
                                       ? std::numeric_limits<std::int32_t>::max()
                                       : static_cast<std::int32_t>(workload.verify_s / 2 + 1);
    std::uniform_int_distribution<std::int32_t> keys(0, key_space - 1);
    Column small(workload.verify_s);
    if (workload.model.s_unique) {
        // Distinct keys: a strided sequence, shuffled.
        for (std::size_t i = 0; i < small.size(); ++i) small[i] = static_cast<std::int32_t>(i * 3 + 1);
        std::shuffle(small.begin(), small.end(), rng);
    } else {
        for (auto& v : small) v = keys(rng);
    }
    Column large(workload.verify_l);
    std::uniform_int_distribution<std::size_t> pick(0, small.size() - 1);
    std::bernoulli_distribution from_small(0.5);
    for (auto& v : large) v = from_small(rng) ? small[pick(rng)] : keys(rng);

    bool oracle_ok = true;
    std::uint64_t matches = 0;
    JoinEngineFlags flags{workload.model.s_unique, workload.model.handle_collisions ||
                                                       !workload.model.s_unique};
    for (auto& status : report.engines) status.start();
    try {
        const JoinOutput out = join_scaleout(large, small, workload.model.num_engines,
                                             workload.model.table_capacity, flags);
        JoinResult got = compact_join(out.padded);
        JoinResult expected = join_oracle(large, small);
        std::sort(got.s_out.begin(), got.s_out.end());
        std::sort(expected.s_out.begin(), expected.s_out.end());
        oracle_ok = got.s_out == expected.s_out && got.num_matches == expected.num_matches;
        matches = got.num_matches;
        for (auto& status : report.engines) {
            status.cycles = out.cost.probe_cycles;
            status.bytes_in = out.cost.l_bytes_read / report.engines.size();
            status.bytes_out = out.cost.bytes_written / report.engines.size();
            status.finish(EngineState::done);
        }
    } catch (const Error& e) {
        for (auto& status : report.engines) {
            if (status.state == EngineState::running) status.finish(EngineState::error);
        }
        report.ok = false;
        report.error = e.what();
    }
    report.matches = matches;
    report.oracle_ok = oracle_ok;

    if (model.load_seconds > 0.0) {
        const std::uint64_t load_bytes =
            4ull * (workload.model.s_tuples +
                    (workload.model.l_load ? workload.model.l_tuples : 0));
        report.cost.phases.push_back({"load", load_bytes, model.load_seconds});
    }
    if (model.build_seconds > 0.0) {
        report.cost.phases.push_back(
            {"build", 4ull * workload.model.s_tuples, model.build_seconds});
    }
    report.cost.phases.push_back({"probe",
                                  4ull * workload.model.l_tuples *
                                      static_cast<std::uint64_t>(model.passes),
                                  model.probe_seconds});
    report.cost.phases.push_back(
        {"copy_out", 8ull * workload.model.s_tuples, model.copy_out_seconds});
    report.modeled_gbps = model.gbps;
    return report;
}

ExperimentReport run_sgd(const SystemConfig& config, const SgdWorkload& workload) {
    ExperimentReport report;
    report.engines = make_engines(workload.num_engines);

    const SyntheticDataset synthetic = generate_synthetic(workload.data);
    const Dataset& dataset = synthetic.dataset;
    report.cost.principal_bytes = dataset.size_bytes();

    const PlacementMode mode = workload.placement == SgdPlacement::replicated
                                   ? PlacementMode::replicated
                                   : PlacementMode::nonpartitioned;
    plan_placement(config, dataset.size_bytes(), workload.num_engines, mode);

    for (auto& status : report.engines) status.start();
    try {
        const SearchReport search = hyperparam_search(dataset, workload.configs,
                                                      workload.num_engines, config.geometry,
                                                      config.host_link_gbps);
        std::uint64_t consumed = 0;
        for (const auto& job : search.jobs) {
            report.final_losses.push_back(job.result.loss_per_epoch.empty()
                                              ? 0.0
                                              : job.result.loss_per_epoch.back());
            consumed += static_cast<std::uint64_t>(
                            workload.configs[job.job_id].epochs) * dataset.size_bytes();
        }
        report.cost.phases.push_back(
            {"host_copy", dataset.size_bytes(), search.host_copy_seconds});
        report.cost.phases.push_back({"train", consumed, search.wall_seconds});
        report.modeled_gbps = search.aggregate_gbps;
        report.oracle_ok = true;
        for (auto& status : report.engines) {
            status.bytes_in = consumed / report.engines.size();
            status.finish(EngineState::done);
        }
    } catch (const Error& e) {
        for (auto& status : report.engines) {
            if (status.state == EngineState::running) status.finish(EngineState::error);
        }
        report.ok = false;
        report.error = e.what();
    }
    return report;
}

} // namespace

ExperimentReport run_experiment(const SystemConfig& config, const Workload& workload) {
    return std::visit(
        [&](const auto& w) -> ExperimentReport {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, SelectWorkload>) {
                return run_select(config, w);
            } else if constexpr (std::is_same_v<T, JoinWorkload>) {
                return run_join(config, w);
            } else {
                return run_sgd(config, w);
            }
        },
        workload);
}

} // namespace hbmsim
