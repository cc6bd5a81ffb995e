#include "rts/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "rts/errors.hpp"
#include "rts/spoloss.hpp"

namespace rts {

Method method_from_string(const std::string& s) {
    if (s == "predict-only") return Method::PredictOnly;
    if (s == "rts-pto") return Method::RtsPto;
    if (s == "rts-pno") return Method::RtsPno;
    throw InvalidSpec("unknown method: " + s);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::PredictOnly: return "predict-only";
        case Method::RtsPto: return "rts-pto";
        case Method::RtsPno: return "rts-pno";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in (0,1)");
    if (alpha <= 0.0 || alpha > 1.0) throw ConfigError("alpha must be in (0,1]");
    if (beta < 0.0) throw ConfigError("beta must be >= 0");
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (lookback == 0 || horizon == 0) throw ConfigError("M and H must be >= 1");
    if (!caps.empty() && caps.size() != horizon) throw ConfigError("caps length must equal H");
    for (double cap : caps)
        if (cap <= 0.0 || cap > 1.0) throw ConfigError("caps must lie in (0,1]");
}

namespace {

std::vector<double> effective_caps(const TrainConfig& config) {
    return config.caps.empty() ? std::vector<double>(config.horizon, 1.0) : config.caps;
}

FeasibleSpace base_space(const TrainConfig& config) {
    FeasibleSpace space = FeasibleSpace::simplex(config.horizon);
    space.caps = effective_caps(config);
    return space;
}

std::vector<WindowSample> normalize_split(const std::vector<WindowSample>& split,
                                          const NormalizerStats& stats) {
    std::vector<WindowSample> out;
    out.reserve(split.size());
    for (const auto& w : split) out.push_back(normalize(w, stats));
    return out;
}

void check_splits(const TrainConfig& config, const DatasetSplits& splits) {
    if (splits.train.empty() || splits.calibration.empty() || splits.test.empty())
        throw EmptySplit("training requires nonempty train/calibration/test splits");
    for (const auto* split : {&splits.train, &splits.calibration, &splits.test})
        for (const auto& w : *split)
            if (w.x.size() != config.lookback || w.y.size() != config.horizon)
                throw ShapeMismatch("window shape does not match config M/H");
}

// Per-sample loss/gradient used inside one epoch.
struct SampleObjective {
    double loss;
    std::vector<double> output_grad;
};

template <typename ObjectiveFn>
double run_epoch(ForecastModel& model, OptimizerState& optimizer,
                 const std::vector<WindowSample>& train, std::size_t batch_size,
                 std::mt19937_64& rng, const ObjectiveFn& objective) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batch_count = 0;
    std::vector<double> grad(model.parameters.size());
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            const auto& sample = train[order[k]];
            const auto y_hat = forward(model, sample.x, sample.c);
            const SampleObjective obj = objective(y_hat, sample);
            batch_loss += obj.loss;
            const auto sample_grad = backward(model, sample.x, sample.c, obj.output_grad);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += sample_grad[i];
        }
        const auto batch_n = static_cast<double>(end - start);
        for (double& g : grad) g /= batch_n;
        optimizer_step(optimizer, model.parameters, grad);
        loss_sum += batch_loss / batch_n;
        ++batch_count;
    }
    return loss_sum / static_cast<double>(batch_count);
}

double calibration_regret(const ForecastModel& model, const std::vector<WindowSample>& cal_raw,
                          const NormalizerStats& stats, const FeasibleSpace& space) {
    double total = 0.0;
    for (const auto& sample : cal_raw) {
        const auto y_hat = forward(model, normalize(sample.x, stats), sample.c);
        const auto decision = solve_allocation(y_hat, space);
        total += regret(decision, sample.y, space);
    }
    return total / static_cast<double>(cal_raw.size());
}

RiskProfile current_profile(const ForecastModel& model, const std::vector<WindowSample>& cal_norm,
                            double gamma, double alpha) {
    return make_risk_profile(collect_residuals(model, cal_norm), gamma, alpha);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Shared prediction-loss training loop with best-epoch checkpoint selection.
TrainedPolicy fit_prediction_stage(const TrainConfig& config, const DatasetSplits& splits) {
    config.validate();
    check_splits(config, splits);

    TrainedPolicy policy;
    policy.method = config.method;
    policy.normalizer = fit_normalizer(splits.train);
    policy.space = base_space(config);
    const auto train_norm = normalize_split(splits.train, policy.normalizer);

    policy.model = make_model(config.model_kind, config.lookback, config.horizon, config.seed, 0,
                              config.kernel);
    auto optimizer = make_optimizer(policy.model.parameters.size(), config.learning_rate);
    std::mt19937_64 rng(config.seed);

    std::vector<double> best_parameters = policy.model.parameters;
    double best_regret = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double train_loss = run_epoch(
            policy.model, optimizer, train_norm, config.batch_size, rng,
            [](const std::vector<double>& y_hat, const WindowSample& sample) {
                return SampleObjective{prediction_loss(y_hat, sample.y, LossMetric::Mse),
                                       prediction_loss_grad(y_hat, sample.y)};
            });
        const double cal_regret =
            calibration_regret(policy.model, splits.calibration, policy.normalizer, policy.space);
        policy.history.push_back({train_loss, cal_regret, 0.0});
        // Ties break toward the later epoch so a plateaued regret still
        // ships the most-trained forecaster.
        if (cal_regret <= best_regret) {
            best_regret = cal_regret;
            best_parameters = policy.model.parameters;
        }
    }
    policy.model.parameters = best_parameters;
    return policy;
}

}  // namespace

TrainedPolicy train_predict_only(const TrainConfig& config, const DatasetSplits& splits) {
    if (config.method != Method::PredictOnly) throw ConfigError("method must be predict-only");
    return fit_prediction_stage(config, splits);
}

TrainedPolicy train_pto(const TrainConfig& config, const DatasetSplits& splits) {
    if (config.method != Method::RtsPto) throw ConfigError("method must be rts-pto");
    TrainedPolicy policy = fit_prediction_stage(config, splits);

    const auto cal_norm = normalize_split(splits.calibration, policy.normalizer);
    policy.risk_profile = current_profile(policy.model, cal_norm, config.gamma, config.alpha);
    policy.space = FeasibleSpace::with_risk(policy.risk_profile->r, policy.risk_profile->threshold,
                                            effective_caps(config));
    return policy;
}

TrainedPolicy train_pno(const TrainConfig& config, const DatasetSplits& splits) {
    if (config.method != Method::RtsPno) throw ConfigError("method must be rts-pno");
    config.validate();
    check_splits(config, splits);

    TrainedPolicy policy;
    policy.method = config.method;
    policy.normalizer = fit_normalizer(splits.train);
    const auto train_norm = normalize_split(splits.train, policy.normalizer);
    const auto cal_norm = normalize_split(splits.calibration, policy.normalizer);
    const auto caps = effective_caps(config);

    policy.model = make_model(config.model_kind, config.lookback, config.horizon, config.seed, 0,
                              config.kernel);
    auto optimizer = make_optimizer(policy.model.parameters.size(), config.learning_rate);
    std::mt19937_64 rng(config.seed);

    // Epoch 1 trains against the uncertainty of the freshly initialized model.
    auto profile = current_profile(policy.model, cal_norm, config.gamma, config.alpha);
    auto space = FeasibleSpace::with_risk(profile.r, profile.threshold, caps);

    std::vector<double> best_parameters = policy.model.parameters;
    double best_regret = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double train_loss = run_epoch(
            policy.model, optimizer, train_norm, config.batch_size, rng,
            [&](const std::vector<double>& y_hat, const WindowSample& sample) {
                const auto obj = combined_objective(y_hat, sample.y, space, config.beta);
                return SampleObjective{obj.loss, obj.gradient};
            });

        const auto epoch_profile = current_profile(policy.model, cal_norm, config.gamma, config.alpha);
        if (config.adaptive_uncertainty) {
            profile = epoch_profile;
            space = FeasibleSpace::with_risk(profile.r, profile.threshold, caps);
        }

        const double cal_regret =
            calibration_regret(policy.model, splits.calibration, policy.normalizer, space);
        policy.history.push_back({train_loss, cal_regret, mean_of(epoch_profile.r)});
        // Ties break toward the later epoch so a plateaued regret still
        // ships the most-trained forecaster.
        if (cal_regret <= best_regret) {
            best_regret = cal_regret;
            best_parameters = policy.model.parameters;
        }
    }

    policy.model.parameters = best_parameters;
    // The shipped space reflects the selected snapshot's own uncertainty
    // (or the frozen initial profile in the ablation).
    if (config.adaptive_uncertainty)
        profile = current_profile(policy.model, cal_norm, config.gamma, config.alpha);
    policy.risk_profile = profile;
    policy.space = FeasibleSpace::with_risk(profile.r, profile.threshold, caps);
    return policy;
}

TrainedPolicy train(const TrainConfig& config, const DatasetSplits& splits) {
    switch (config.method) {
        case Method::PredictOnly: return train_predict_only(config, splits);
        case Method::RtsPto: return train_pto(config, splits);
        case Method::RtsPno: return train_pno(config, splits);
    }
    throw ConfigError("unknown method");
}

Inference infer(const TrainedPolicy& policy, const std::vector<double>& x,
                const std::vector<double>& c) {
    const auto x_norm = normalize(x, policy.normalizer);
    const auto y_hat_norm = forward(policy.model, x_norm, c);
    Inference out;
    out.allocation = solve_allocation(y_hat_norm, policy.space);
    out.y_hat = denormalize(y_hat_norm, policy.normalizer);
    return out;
}

double mean_policy_regret(const TrainedPolicy& policy, const std::vector<WindowSample>& split) {
    if (split.empty()) throw EmptySplit("mean_policy_regret: empty split");
    return calibration_regret(policy.model, split, policy.normalizer, policy.space);
}

namespace {

void write_hex(std::ofstream& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    out << buf;
}

double read_hex(std::ifstream& in, const std::string& path) {
    std::string token;
    if (!(in >> token)) throw IoError("truncated policy sidecar: " + path);
    return std::strtod(token.c_str(), nullptr);
}

}  // namespace

void save_policy(const TrainedPolicy& policy, const std::string& base_path) {
    save_checkpoint(policy.model, base_path + ".model");
    const std::string path = base_path + ".policy";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "rts-policy v1\n";
    out << "method " << to_string(policy.method) << "\n";
    out << "normalizer ";
    write_hex(out, policy.normalizer.mean);
    out << " ";
    write_hex(out, policy.normalizer.std);
    out << "\n";
    out << "caps " << policy.space.caps.size();
    for (double cap : policy.space.caps) {
        out << " ";
        write_hex(out, cap);
    }
    out << "\n";
    out << "risk " << (policy.risk_profile ? 1 : 0) << "\n";
    if (policy.risk_profile) {
        const auto& rp = *policy.risk_profile;
        out << "gamma ";
        write_hex(out, rp.gamma);
        out << "\nalpha ";
        write_hex(out, rp.alpha);
        out << "\nthreshold ";
        write_hex(out, rp.threshold);
        out << "\nr " << rp.r.size();
        for (double v : rp.r) {
            out << " ";
            write_hex(out, v);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

TrainedPolicy load_policy(const std::string& base_path) {
    TrainedPolicy policy;
    policy.model = load_checkpoint(base_path + ".model");

    const std::string path = base_path + ".policy";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic, version, key, value;
    in >> magic >> version;
    if (magic != "rts-policy" || version != "v1") throw IoError("bad policy header: " + path);

    in >> key >> value;
    policy.method = method_from_string(value);
    in >> key;
    policy.normalizer.mean = read_hex(in, path);
    policy.normalizer.std = read_hex(in, path);

    std::size_t n_caps = 0;
    in >> key >> n_caps;
    std::vector<double> caps(n_caps);
    for (auto& cap : caps) cap = read_hex(in, path);

    int has_risk = 0;
    in >> key >> has_risk;
    if (has_risk) {
        RiskProfile rp;
        in >> key;
        rp.gamma = read_hex(in, path);
        in >> key;
        rp.alpha = read_hex(in, path);
        in >> key;
        rp.threshold = read_hex(in, path);
        std::size_t n_r = 0;
        in >> key >> n_r;
        rp.r.resize(n_r);
        for (auto& v : rp.r) v = read_hex(in, path);
        policy.risk_profile = rp;
        policy.space = FeasibleSpace::with_risk(rp.r, rp.threshold, caps);
    } else {
        policy.space = FeasibleSpace::simplex(policy.model.horizon);
        policy.space.caps = caps;
    }
    if (!in) throw IoError("truncated policy sidecar: " + path);
    return policy;
}

}  // namespace rts
