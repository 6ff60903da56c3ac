#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbmsim/geometry.hpp"

namespace hbmsim {

enum class LabelKind : std::uint32_t { regression = 0, binary = 1 };

/// Dense training set: m samples of n features in [-1, 1], one label each.
struct Dataset {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<float> samples; // row-major, m * n
    std::vector<float> labels;  // m
    LabelKind kind = LabelKind::regression;

    std::uint64_t size_bytes() const { return 4ull * m * n; }
    std::span<const float> sample(std::size_t i) const {
        return std::span<const float>(samples.data() + i * n, n);
    }
};

enum class LossKind { ridge, logistic };

/// `standard` applies the step size once, at the model update. `prescaled`
/// mirrors a dataflow whose scalar stage folds the step size into the
/// residual before accumulation, so the data term is scaled twice.
enum class UpdateRule { standard, prescaled };

struct SgdConfig {
    float step_size = 0.01f;      // alpha
    float regularization = 0.0f;  // lambda
    std::size_t minibatch = 16;
    std::size_t epochs = 1;
    LossKind loss = LossKind::ridge;
    UpdateRule rule = UpdateRule::standard;
};

struct Model {
    std::vector<float> x;

    static Model zeros(std::size_t n) { return Model{std::vector<float>(n, 0.0f)}; }
};

/// Mean sample loss plus the L2 penalty. Ridge: half squared error.
/// Logistic: cross-entropy with the sigmoid clamped away from 0 and 1
/// inside the logs. Dot products run in 32-bit to mirror the engine.
double loss(const Model& model, const Dataset& dataset, const SgdConfig& config);

/// One pass over the dataset in storage order, gradient accumulated over
/// each minibatch, model updated at full-batch boundaries only. Updates
/// are visible to the immediately following sample (no staleness).
/// Throws DivergenceError (with epoch/sample position) on non-finite state.
void sgd_epoch(Model& model, const Dataset& dataset, const SgdConfig& config,
               std::size_t epoch_index = 0);

struct TrainResult {
    Model model;
    std::vector<double> loss_per_epoch;
};

TrainResult train(const Dataset& dataset, const SgdConfig& config);

/// 64-bit reference path, same semantics, for oracle-grade comparisons.
namespace ref64 {

double loss(const std::vector<double>& x, const Dataset& dataset, const SgdConfig& config);

void sgd_epoch(std::vector<double>& x, const Dataset& dataset, const SgdConfig& config);

/// Gradient of the minibatch objective (mean loss over the range plus the
/// L2 term), evaluated in double.
std::vector<double> minibatch_gradient(const std::vector<double>& x, const Dataset& dataset,
                                       std::size_t first, std::size_t count,
                                       const SgdConfig& config);

} // namespace ref64

/// Dataflow pipeline shape: lanes consumed per cycle and the fill depth
/// that a dependent update must drain.
struct PipelineModel {
    int lanes = 16;
    int depth = 64;
    double clock_hz = 200e6;
};

enum class SgdPlacement { replicated, nonreplicated };

struct SgdModelParams {
    int num_engines = 14;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t minibatch = 16;
    SgdPlacement placement = SgdPlacement::replicated;
    PipelineModel pipeline;
    double engine_efficiency = 0.87;
};

/// Modeled consumption rate in GB/s. A sample occupies ceil(n/lanes)
/// cycles; honoring the read-after-write dependency means only
/// B * ceil(n/lanes) of every `depth` pipeline slots do useful work.
/// Replicated engines scale independently; a single shared copy is bounded
/// by the wire speed of the channels holding it.
double model_sgd_rate(const HbmGeometry& geometry, const SgdModelParams& params);

struct SearchJobResult {
    std::size_t job_id = 0;
    TrainResult result;
    double modeled_seconds = 0.0;
    double modeled_gbps = 0.0; // per-job consumption rate
};

struct SearchReport {
    std::vector<SearchJobResult> jobs;
    double wall_seconds = 0.0;     // slowest engine's queue
    double aggregate_gbps = 0.0;   // bytes consumed by all jobs / wall
    double host_copy_seconds = 0.0; // initial dataset transfer, reported apart
};

/// Trains every configuration on the shared dataset, jobs dealt
/// round-robin over the engines. Results do not depend on the assignment.
SearchReport hyperparam_search(const Dataset& dataset, const std::vector<SgdConfig>& configs,
                               int num_engines, const HbmGeometry& geometry,
                               double host_link_gbps = 25.0);

struct SyntheticSpec {
    std::size_t m = 0;
    std::size_t n = 0;
    LabelKind kind = LabelKind::regression;
    std::uint64_t seed = 0;
    float noise_std = 0.0f; // regression label noise
};

struct SyntheticDataset {
    Dataset dataset;
    std::vector<float> ground_truth;
};

/// Uniform features in [-1, 1], labels from a drawn ground-truth model:
/// the plain dot product for regression, its sign thresholded to {0, 1}
/// for binary. Bitwise deterministic per seed.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Dense binary format: three u32 header words (m, n, label kind), then
/// m*n row-major sample floats, then m label floats, all little-endian.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Delimited text import: one sample per line, label first, then features.
Dataset import_delimited(const std::string& path, char delimiter = ',',
                         LabelKind kind = LabelKind::regression);

} // namespace hbmsim
