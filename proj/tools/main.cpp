// Command-line front end: figure-shaped sweeps over the memory model and
// the three engines, emitted as self-describing CSV.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hbmsim/config.hpp"
#include "hbmsim/csv.hpp"
#include "hbmsim/errors.hpp"
#include "hbmsim/log.hpp"
#include "hbmsim/orchestrator.hpp"
#include "hbmsim/traffic.hpp"

namespace {

using namespace hbmsim;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 42;
    int engines = 0;          // 0: subcommand default
    std::string placement;    // empty: subcommand default
    ConfigFile config;
};

HbmGeometry geometry_from(const ConfigFile& config) {
    HbmGeometry g;
    g.num_stacks = static_cast<int>(config.get_int("geometry", "num_stacks", g.num_stacks));
    g.channels_per_stack = static_cast<int>(
        config.get_int("geometry", "channels_per_stack", g.channels_per_stack));
    g.channel_capacity = static_cast<std::uint64_t>(config.get_int(
        "geometry", "channel_capacity_mib",
        static_cast<std::int64_t>(g.channel_capacity / kMiB))) * kMiB;
    g.clock_hz = config.get_double("geometry", "clock_mhz", g.clock_hz / 1e6) * 1e6;
    g.efficiency = config.get_double("geometry", "efficiency", g.efficiency);
    return g;
}

SystemConfig system_from(const ConfigFile& config) {
    SystemConfig system;
    system.geometry = geometry_from(config);
    system.host_link_gbps = config.get_double("system", "host_link_gbps", system.host_link_gbps);
    return system;
}

int cmd_ubench(const RunManifest& manifest) {
    const HbmGeometry geometry = geometry_from(manifest.config);
    const auto separations = manifest.config.get_int_list("ubench", "separations_mib",
                                                          {256, 192, 128, 64, 0});
    const int max_ports = static_cast<int>(
        manifest.config.get_int("ubench", "max_ports", geometry.raw_port_count()));
    const auto directions =
        manifest.config.get_string_list("ubench", "directions", {"read"});
    if (separations.empty() || directions.empty() || max_ports < 1) {
        std::fprintf(stderr, "ubench: empty sweep list\n");
        return kExitUsage;
    }

    CsvWriter csv({"num_ports", "separation_mib", "direction", "aggregate_gbps"});
    for (const auto& direction : directions) {
        if (direction != "read" && direction != "write") {
            std::fprintf(stderr, "ubench: direction must be read or write\n");
            return kExitUsage;
        }
        for (const auto separation : separations) {
            MicrobenchSpec spec;
            spec.num_ports = max_ports;
            spec.separation_mib = static_cast<std::uint64_t>(separation);
            spec.direction = direction == "read" ? Direction::read : Direction::write;
            spec.transfer_size =
                static_cast<std::uint64_t>(
                    manifest.config.get_int("ubench", "transfer_mib", 1)) * kMiB;
            for (const MicrobenchPoint& point : run_microbenchmark(geometry, spec)) {
                csv.cell(point.num_ports)
                    .cell(separation)
                    .cell(direction)
                    .cell(point.aggregate_gbps());
                csv.end_row();
            }
        }
    }
    csv.write_file(manifest.out_path);
    std::printf("ubench: wrote %s\n", manifest.out_path.c_str());
    return 0;
}

Placement placement_from(const std::string& name) {
    if (name == "partitioned") return Placement::partitioned;
    if (name == "nonpartitioned") return Placement::nonpartitioned;
    throw ConfigError("unknown placement '" + name + "'");
}

int cmd_select(const RunManifest& manifest) {
    const SystemConfig system = system_from(manifest.config);
    const auto selectivities_pct = manifest.config.get_double_list(
        "select", "selectivities_pct", {0.001, 0.01, 0.1, 1, 10, 20, 40, 100});
    std::vector<std::int64_t> engine_list =
        manifest.config.get_int_list("select", "engines", {14});
    if (manifest.engines > 0) engine_list = {manifest.engines};
    std::vector<std::string> placements = manifest.config.get_string_list(
        "select", "placements", {"partitioned", "nonpartitioned"});
    if (!manifest.placement.empty()) placements = {manifest.placement};
    const bool include_copy = manifest.config.get_bool("select", "include_copy", false);
    const auto num_items = static_cast<std::size_t>(
        manifest.config.get_int("select", "items", 128'000'000));
    const auto verify_items = static_cast<std::size_t>(
        manifest.config.get_int("select", "verify_items", 1'000'000));
    if (selectivities_pct.empty() || engine_list.empty() || placements.empty()) {
        std::fprintf(stderr, "select: empty sweep list\n");
        return kExitUsage;
    }

    CsvWriter csv({"num_engines", "selectivity", "placement", "modeled_gbps", "oracle_matches",
                   "include_copy"});
    bool all_verified = true;
    for (const auto engines : engine_list) {
        for (const auto& placement : placements) {
            for (const double pct : selectivities_pct) {
                SelectWorkload workload;
                workload.num_items = num_items;
                workload.verify_items = verify_items;
                workload.selectivity = pct / 100.0;
                workload.num_engines = static_cast<int>(engines);
                workload.placement = placement_from(placement);
                workload.include_output_copy = include_copy;
                workload.seed = manifest.seed;
                const ExperimentReport report = run_experiment(system, workload);
                if (!report.ok) throw Error(report.error);
                all_verified &= report.oracle_ok;
                csv.cell(engines)
                    .cell(pct)
                    .cell(placement)
                    .cell(report.modeled_gbps)
                    .cell(report.matches)
                    .cell(std::int64_t{include_copy});
                csv.end_row();
            }
        }
    }
    csv.write_file(manifest.out_path);
    std::printf("select: wrote %s, oracle %s\n", manifest.out_path.c_str(),
                all_verified ? "ok" : "MISMATCH");
    return all_verified ? 0 : kExitError;
}

int cmd_join(const RunManifest& manifest) {
    const SystemConfig system = system_from(manifest.config);
    std::vector<std::int64_t> engine_list = manifest.config.get_int_list("join", "engines", {7});
    if (manifest.engines > 0) engine_list = {manifest.engines};
    const auto s_sizes = manifest.config.get_int_list("join", "s_sizes", {4096});
    const auto l_size =
        static_cast<std::uint64_t>(manifest.config.get_int("join", "l_size", 512'000'000));
    const bool sweep_flags = manifest.config.get_bool("join", "sweep_flags", true);
    const auto verify_l = static_cast<std::size_t>(
        manifest.config.get_int("join", "verify_l", 50'000));
    if (engine_list.empty() || s_sizes.empty()) {
        std::fprintf(stderr, "join: empty sweep list\n");
        return kExitUsage;
    }

    struct FlagRow {
        bool l_load;
        bool s_unique;
        bool handle_collisions;
    };
    std::vector<FlagRow> flag_rows = {{false, true, false}};
    if (sweep_flags) {
        flag_rows = {{false, true, false}, {false, true, true}, {false, false, true},
                     {true, true, false},  {true, true, true},  {true, false, true}};
    }

    CsvWriter csv({"num_engines", "s_size", "l_size", "s_unique", "l_load", "handle_collisions",
                   "passes", "modeled_gbps", "modeled_seconds", "matches"});
    bool all_verified = true;
    for (const auto engines : engine_list) {
        for (const auto s_size : s_sizes) {
            for (const FlagRow& flags : flag_rows) {
                JoinWorkload workload;
                workload.model.num_engines = static_cast<int>(engines);
                workload.model.l_tuples = l_size;
                workload.model.s_tuples = static_cast<std::uint64_t>(s_size);
                workload.model.l_load = flags.l_load;
                workload.model.s_unique = flags.s_unique;
                workload.model.handle_collisions = flags.handle_collisions;
                workload.seed = manifest.seed;
                workload.verify_l = verify_l;
                workload.verify_s = std::min<std::size_t>(
                    static_cast<std::size_t>(s_size), 20'000);
                const ExperimentReport report = run_experiment(system, workload);
                if (!report.ok) throw Error(report.error);
                all_verified &= report.oracle_ok;
                const JoinRateReport model = model_join_rate(system.geometry, workload.model);
                csv.cell(engines)
                    .cell(s_size)
                    .cell(static_cast<std::int64_t>(l_size))
                    .cell(std::int64_t{flags.s_unique})
                    .cell(std::int64_t{flags.l_load})
                    .cell(std::int64_t{flags.handle_collisions})
                    .cell(model.passes)
                    .cell(model.gbps)
                    .cell(model.seconds)
                    .cell(report.matches);
                csv.end_row();
            }
        }
    }
    csv.write_file(manifest.out_path);
    std::printf("join: wrote %s, oracle %s\n", manifest.out_path.c_str(),
                all_verified ? "ok" : "MISMATCH");
    return all_verified ? 0 : kExitError;
}

int cmd_sgd(const RunManifest& manifest) {
    const SystemConfig system = system_from(manifest.config);
    const auto minibatches =
        manifest.config.get_int_list("sgd", "minibatches", {1, 2, 4, 8, 16});
    const int engines = manifest.engines > 0
                            ? manifest.engines
                            : static_cast<int>(manifest.config.get_int("sgd", "engines", 14));
    const auto epochs =
        static_cast<std::size_t>(manifest.config.get_int("sgd", "epochs", 10));
    if (minibatches.empty() || epochs == 0) {
        std::fprintf(stderr, "sgd: empty sweep list\n");
        return kExitUsage;
    }

    Dataset dataset;
    const std::string dataset_path = manifest.config.get_string("sgd", "dataset", "");
    if (!dataset_path.empty()) {
        dataset = load_dataset(dataset_path);
    } else {
        SyntheticSpec spec;
        spec.m = static_cast<std::size_t>(manifest.config.get_int("sgd", "m", 16384));
        spec.n = static_cast<std::size_t>(manifest.config.get_int("sgd", "n", 256));
        spec.kind = manifest.config.get_string("sgd", "kind", "binary") == "regression"
                        ? LabelKind::regression
                        : LabelKind::binary;
        spec.seed = manifest.seed;
        spec.noise_std =
            static_cast<float>(manifest.config.get_double("sgd", "noise_std", 0.0));
        dataset = generate_synthetic(spec).dataset;
    }

    std::vector<SgdConfig> configs;
    for (const auto batch : minibatches) {
        SgdConfig config;
        config.loss = dataset.kind == LabelKind::binary ? LossKind::logistic : LossKind::ridge;
        config.step_size =
            static_cast<float>(manifest.config.get_double("sgd", "step_size", 0.01));
        config.regularization =
            static_cast<float>(manifest.config.get_double("sgd", "lambda", 0.0));
        config.minibatch = static_cast<std::size_t>(batch);
        config.epochs = epochs;
        configs.push_back(config);
    }

    const SearchReport report = hyperparam_search(dataset, configs, engines, system.geometry,
                                                  system.host_link_gbps);

    std::vector<std::string> header = {"job_id", "minibatch", "step_size", "lambda"};
    for (std::size_t e = 1; e <= epochs; ++e) {
        header.push_back("loss_epoch_" + std::to_string(e));
    }
    header.push_back("modeled_gbps");
    header.push_back("wall_time_modeled");
    CsvWriter csv(header);
    for (const SearchJobResult& job : report.jobs) {
        csv.cell(static_cast<std::int64_t>(job.job_id))
            .cell(static_cast<std::int64_t>(configs[job.job_id].minibatch))
            .cell(static_cast<double>(configs[job.job_id].step_size))
            .cell(static_cast<double>(configs[job.job_id].regularization));
        for (const double l : job.result.loss_per_epoch) csv.cell(l);
        csv.cell(job.modeled_gbps).cell(job.modeled_seconds);
        csv.end_row();
    }
    csv.write_file(manifest.out_path);
    std::printf("sgd: wrote %s (%zu jobs, wall %.6f s modeled)\n", manifest.out_path.c_str(),
                report.jobs.size(), report.wall_seconds);
    return 0;
}

int cmd_report(const RunManifest& manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(manifest.out_path);
    RunManifest sub = manifest;

    sub.out_path = (fs::path(manifest.out_path) / "ubench.csv").string();
    if (const int rc = cmd_ubench(sub); rc != 0) return rc;

    sub.out_path = (fs::path(manifest.out_path) / "select.csv").string();
    if (const int rc = cmd_select(sub); rc != 0) return rc;

    sub.out_path = (fs::path(manifest.out_path) / "join.csv").string();
    if (const int rc = cmd_join(sub); rc != 0) return rc;

    sub.out_path = (fs::path(manifest.out_path) / "sgd.csv").string();
    return cmd_sgd(sub);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Banked-memory analytics simulator: microbenchmarks, selection, join, SGD"};
    app.require_subcommand(1);

    RunManifest manifest;
    app.add_option("--config", manifest.config_path, "Experiment config file (TOML subset)");
    app.add_option("--out", manifest.out_path, "Output CSV path (directory for `report`)");
    app.add_option("--seed", manifest.seed, "Deterministic seed for generated data");
    app.add_option("--engines", manifest.engines, "Engine count override");
    app.add_option("--placement", manifest.placement,
                   "Placement override: partitioned|nonpartitioned");

    auto* ubench = app.add_subcommand("ubench", "Bandwidth vs port count and separation");
    auto* select = app.add_subcommand("select", "Range selection rates and verification");
    auto* join = app.add_subcommand("join", "Hash join rates and verification");
    auto* sgd = app.add_subcommand("sgd", "SGD training sweep and modeled rates");
    auto* report = app.add_subcommand("report", "All default sweeps into a directory");
    for (auto* sub : {ubench, select, join, sgd, report}) {
        sub->fallthrough(); // global flags may follow the subcommand
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    if (!manifest.config_path.empty()) {
        try {
            manifest.config = ConfigFile::parse_file(manifest.config_path);
        } catch (const Error& e) {
            std::fprintf(stderr, "usage error: %s\n", e.what());
            return kExitUsage;
        }
    }

    try {
        if (ubench->parsed()) {
            manifest.subcommand = "ubench";
            if (manifest.out_path.empty()) manifest.out_path = "ubench.csv";
            return cmd_ubench(manifest);
        }
        if (select->parsed()) {
            manifest.subcommand = "select";
            if (manifest.out_path.empty()) manifest.out_path = "select.csv";
            return cmd_select(manifest);
        }
        if (join->parsed()) {
            manifest.subcommand = "join";
            if (manifest.out_path.empty()) manifest.out_path = "join.csv";
            return cmd_join(manifest);
        }
        if (sgd->parsed()) {
            manifest.subcommand = "sgd";
            if (manifest.out_path.empty()) manifest.out_path = "sgd.csv";
            return cmd_sgd(manifest);
        }
        if (report->parsed()) {
            manifest.subcommand = "report";
            if (manifest.out_path.empty()) manifest.out_path = "report_out";
            return cmd_report(manifest);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitUsage;
}
