#include "hbmsim/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "hbmsim/errors.hpp"
#include "hbmsim/placement.hpp"

namespace hbmsim {

namespace {

constexpr double kLogClamp = 1e-12;

template <typename Real>
Real dot_product(std::span<const float> sample, const std::vector<Real>& x) {
    Real acc = 0;
    for (std::size_t j = 0; j < sample.size(); ++j) {
        acc += static_cast<Real>(sample[j]) * x[j];
    }
    return acc;
}

template <typename Real>
Real sigmoid(Real z) {
    return Real(1) / (Real(1) + std::exp(-z));
}

void check_dimensions(std::size_t model_n, const Dataset& dataset) {
    if (model_n != dataset.n) {
        throw DimensionError("model has " + std::to_string(model_n) + " features, dataset has " +
                             std::to_string(dataset.n));
    }
    if (dataset.labels.size() != dataset.m || dataset.samples.size() != dataset.m * dataset.n) {
        throw DimensionError("dataset arrays disagree with m/n");
    }
}

template <typename Real>
double loss_impl(const std::vector<Real>& x, const Dataset& dataset, const SgdConfig& config) {
    check_dimensions(x.size(), dataset);
    double mean = 0.0;
    for (std::size_t i = 0; i < dataset.m; ++i) {
        const Real z = dot_product<Real>(dataset.sample(i), x);
        const double b = static_cast<double>(dataset.labels[i]);
        if (config.loss == LossKind::ridge) {
            const double r = static_cast<double>(z) - b;
            mean += 0.5 * r * r;
        } else {
            double h = sigmoid(static_cast<double>(z));
            h = std::clamp(h, kLogClamp, 1.0 - kLogClamp);
            mean += -b * std::log(h) - (1.0 - b) * std::log(1.0 - h);
        }
    }
    if (dataset.m > 0) mean /= static_cast<double>(dataset.m);
    double norm = 0.0;
    for (const Real v : x) norm += static_cast<double>(v) * static_cast<double>(v);
    return mean + static_cast<double>(config.regularization) * norm;
}

template <typename Real>
void epoch_impl(std::vector<Real>& x, const Dataset& dataset, const SgdConfig& config,
                std::size_t epoch_index) {
    check_dimensions(x.size(), dataset);
    if (config.minibatch == 0 || config.minibatch > dataset.m) {
        throw ConfigError("minibatch must be within 1..m");
    }
    if (config.step_size <= 0.0f) {
        throw ConfigError("step size must be positive");
    }

    const Real alpha = static_cast<Real>(config.step_size);
    const Real lambda = static_cast<Real>(config.regularization);
    const std::size_t n = dataset.n;

    std::vector<Real> g(n, Real(0));
    for (std::size_t i = 0; i < dataset.m; ++i) {
        const auto a = dataset.sample(i);
        Real z = dot_product<Real>(a, x);
        if (config.loss == LossKind::logistic) z = sigmoid(z);
        Real scale = z - static_cast<Real>(dataset.labels[i]);
        if (config.rule == UpdateRule::prescaled) scale *= alpha;
        for (std::size_t j = 0; j < n; ++j) {
            g[j] += scale * static_cast<Real>(a[j]);
        }
        if ((i + 1) % config.minibatch == 0) {
            for (std::size_t j = 0; j < n; ++j) {
                x[j] -= alpha * (g[j] + Real(2) * lambda * x[j]);
                g[j] = Real(0);
            }
            if (!std::isfinite(static_cast<double>(x[0]))) {
                throw DivergenceError("model diverged at epoch " + std::to_string(epoch_index) +
                                      ", sample " + std::to_string(i));
            }
        }
    }
    for (const Real v : x) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw DivergenceError("model diverged at epoch " + std::to_string(epoch_index));
        }
    }
}

} // namespace

double loss(const Model& model, const Dataset& dataset, const SgdConfig& config) {
    return loss_impl<float>(model.x, dataset, config);
}

void sgd_epoch(Model& model, const Dataset& dataset, const SgdConfig& config,
               std::size_t epoch_index) {
    epoch_impl<float>(model.x, dataset, config, epoch_index);
}

TrainResult train(const Dataset& dataset, const SgdConfig& config) {
    TrainResult result;
    result.model = Model::zeros(dataset.n);
    result.loss_per_epoch.reserve(config.epochs);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        sgd_epoch(result.model, dataset, config, epoch);
        result.loss_per_epoch.push_back(loss(result.model, dataset, config));
    }
    return result;
}

namespace ref64 {

double loss(const std::vector<double>& x, const Dataset& dataset, const SgdConfig& config) {
    return loss_impl<double>(x, dataset, config);
}

void sgd_epoch(std::vector<double>& x, const Dataset& dataset, const SgdConfig& config) {
    epoch_impl<double>(x, dataset, config, 0);
}

std::vector<double> minibatch_gradient(const std::vector<double>& x, const Dataset& dataset,
                                       std::size_t first, std::size_t count,
                                       const SgdConfig& config) {
    check_dimensions(x.size(), dataset);
    if (count == 0 || first + count > dataset.m) {
        throw ConfigError("gradient range out of bounds");
    }
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = first; i < first + count; ++i) {
        const auto a = dataset.sample(i);
        double z = dot_product<double>(a, x);
        if (config.loss == LossKind::logistic) z = sigmoid(z);
        const double scale = z - static_cast<double>(dataset.labels[i]);
        for (std::size_t j = 0; j < x.size(); ++j) {
            grad[j] += scale * static_cast<double>(a[j]);
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        grad[j] = grad[j] / static_cast<double>(count) +
                  2.0 * static_cast<double>(config.regularization) * x[j];
    }
    return grad;
}

} // namespace ref64

double model_sgd_rate(const HbmGeometry& geometry, const SgdModelParams& params) {
    SystemConfig config;
    config.geometry = geometry;
    if (params.num_engines < 1 || params.num_engines > config.usable_engine_ports) {
        throw ConfigError("sgd supports 1.." + std::to_string(config.usable_engine_ports) +
                          " engines, got " + std::to_string(params.num_engines));
    }
    if (params.n == 0 || params.m == 0) {
        throw ConfigError("sgd model needs a nonempty dataset shape");
    }
    if (params.pipeline.lanes < 1 || params.pipeline.depth < 1) {
        throw ConfigError("pipeline needs lanes >= 1 and depth >= 1");
    }

    const std::uint64_t bytes = 4ull * params.m * params.n;
    const std::uint64_t cycles_per_sample =
        (params.n + static_cast<std::size_t>(params.pipeline.lanes) - 1) /
        static_cast<std::size_t>(params.pipeline.lanes);
    const double fill = static_cast<double>(params.minibatch * cycles_per_sample);
    const double utilization = std::min(1.0, fill / params.pipeline.depth);
    const double per_engine =
        geometry.shim_port_peak_bytes() * utilization * params.engine_efficiency;

    if (params.placement == SgdPlacement::replicated) {
        if (bytes > 2 * geometry.channel_capacity) {
            throw CapacityError("replicated dataset of " + std::to_string(bytes) +
                                " bytes exceeds the per-engine window");
        }
        return params.num_engines * per_engine / 1e9;
    }

    // One shared copy: every engine funnels through the channels holding
    // it, so the aggregate is pinned at those channels' wire speed no
    // matter how many engines are started.
    if (bytes > geometry.total_capacity()) {
        throw CapacityError("dataset exceeds device capacity");
    }
    const std::uint64_t span_channels =
        (bytes + geometry.channel_capacity - 1) / geometry.channel_capacity;
    const double copy_bound =
        static_cast<double>(span_channels) * geometry.raw_port_peak_bytes();
    return std::min(params.num_engines * per_engine, copy_bound) / 1e9;
}

SearchReport hyperparam_search(const Dataset& dataset, const std::vector<SgdConfig>& configs,
                               int num_engines, const HbmGeometry& geometry,
                               double host_link_gbps) {
    if (configs.empty()) {
        throw ConfigError("hyperparameter search needs at least one configuration");
    }
    SystemConfig system;
    system.geometry = geometry;
    if (num_engines < 1 || num_engines > system.usable_engine_ports) {
        throw ConfigError("sgd supports 1.." + std::to_string(system.usable_engine_ports) +
                          " engines, got " + std::to_string(num_engines));
    }

    SearchReport report;
    report.jobs.resize(configs.size());
    report.host_copy_seconds = host_transfer_time(system, dataset.size_bytes(), 2);

    // Jobs are independent; training them on worker threads cannot change
    // any result.
    const std::size_t workers = std::min<std::size_t>(
        configs.size(), std::max<std::size_t>(1, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t j = w; j < configs.size(); j += workers) {
                    SearchJobResult& job = report.jobs[j];
                    job.job_id = j;
                    job.result = train(dataset, configs[j]);

                    SgdModelParams params;
                    params.num_engines = 1;
                    params.m = dataset.m;
                    params.n = dataset.n;
                    params.minibatch = configs[j].minibatch;
                    params.placement = SgdPlacement::replicated;
                    job.modeled_gbps = model_sgd_rate(geometry, params);
                    const double consumed =
                        static_cast<double>(configs[j].epochs) * dataset.size_bytes();
                    job.modeled_seconds = consumed / (job.modeled_gbps * 1e9);
                    // Trained model write-back rides the host link.
                    job.modeled_seconds += 4.0 * dataset.n / (host_link_gbps * 1e9);
                }
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    // Round-robin assignment; the wall clock is the busiest engine.
    std::vector<double> engine_busy(static_cast<std::size_t>(num_engines), 0.0);
    double consumed_total = 0.0;
    for (std::size_t j = 0; j < report.jobs.size(); ++j) {
        engine_busy[j % static_cast<std::size_t>(num_engines)] += report.jobs[j].modeled_seconds;
        consumed_total += static_cast<double>(configs[j].epochs) * dataset.size_bytes();
    }
    report.wall_seconds = *std::max_element(engine_busy.begin(), engine_busy.end());
    report.aggregate_gbps = consumed_total / report.wall_seconds / 1e9;
    return report;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.m == 0 || spec.n == 0) {
        throw ConfigError("synthetic dataset needs m, n >= 1");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<float> uniform(-1.0f, 1.0f);
    std::normal_distribution<float> gauss(0.0f, 1.0f);

    SyntheticDataset out;
    out.ground_truth.resize(spec.n);
    for (auto& v : out.ground_truth) v = uniform(rng);

    Dataset& data = out.dataset;
    data.m = spec.m;
    data.n = spec.n;
    data.kind = spec.kind;
    data.samples.resize(spec.m * spec.n);
    data.labels.resize(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < spec.n; ++j) {
            const float a = uniform(rng);
            data.samples[i * spec.n + j] = a;
            dot += static_cast<double>(a) * out.ground_truth[j];
        }
        if (spec.kind == LabelKind::regression) {
            float label = static_cast<float>(dot);
            if (spec.noise_std > 0.0f) label += spec.noise_std * gauss(rng);
            data.labels[i] = label;
        } else {
            data.labels[i] = dot > 0.0 ? 1.0f : 0.0f;
        }
    }
    return out;
}

} // namespace hbmsim
