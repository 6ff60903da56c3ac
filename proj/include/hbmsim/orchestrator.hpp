#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hbmsim/join.hpp"
#include "hbmsim/placement.hpp"
#include "hbmsim/select.hpp"
#include "hbmsim/sgd.hpp"

namespace hbmsim {

enum class EngineState { idle, running, done, error };

/// Per-engine progress as the control unit sees it. Transitions only
/// idle -> running -> done | error.
struct EngineStatus {
    int engine_id = 0;
    EngineState state = EngineState::idle;
    std::uint64_t cycles = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;

    void start();
    void finish(EngineState terminal);
};

struct Phase {
    std::string name;
    std::uint64_t bytes = 0;
    double seconds = 0.0;
};

/// Sequential phase accounting; phases never overlap.
struct CostReport {
    std::vector<Phase> phases;
    std::uint64_t principal_bytes = 0;

    double total_seconds() const;
    double gbps() const; // principal bytes over total time
    const Phase* find(const std::string& name) const;
};

struct SelectWorkload {
    std::size_t num_items = 16'000'000;
    double selectivity = 0.0;
    int num_engines = 14;
    Placement placement = Placement::partitioned;
    bool include_output_copy = false;
    std::uint64_t seed = 42;
    /// Items actually pushed through the functional engine; the model
    /// always prices `num_items`. Zero means run them all.
    std::size_t verify_items = 0;
};

struct JoinWorkload {
    JoinModelParams model;
    std::uint64_t seed = 42;
    std::size_t verify_l = 50'000;
    std::size_t verify_s = 4096;
};

struct SgdWorkload {
    SyntheticSpec data;
    std::vector<SgdConfig> configs;
    int num_engines = 14;
    SgdPlacement placement = SgdPlacement::replicated;
};

using Workload = std::variant<SelectWorkload, JoinWorkload, SgdWorkload>;

struct ExperimentReport {
    CostReport cost;
    std::vector<EngineStatus> engines;
    bool ok = true;
    std::string error;

    // Workload-specific functional summary.
    std::uint64_t matches = 0;      // select / join
    bool oracle_ok = false;         // functional output checked against oracle
    double modeled_gbps = 0.0;
    std::vector<double> final_losses; // sgd, one per job
};

/// Plans placement, runs the optional host phases and the functional
/// engines, prices every phase with the workload's analytic model, and
/// assembles the report. Engine failures land in the report instead of
/// propagating, with completed phases preserved.
ExperimentReport run_experiment(const SystemConfig& config, const Workload& workload);

} // namespace hbmsim
