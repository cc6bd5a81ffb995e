#include "rts/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "rts/errors.hpp"

namespace rts {

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::Linear;
    if (s == "decomp-linear") return ModelKind::DecompLinear;
    throw InvalidSpec("unknown model kind: " + s);
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::Linear ? "linear" : "decomp-linear";
}

std::size_t ForecastModel::parameter_count() const {
    const std::size_t d = input_dim();
    return kind == ModelKind::Linear ? horizon * d + horizon : 2 * horizon * d + horizon;
}

ForecastModel make_model(ModelKind kind, std::size_t lookback, std::size_t horizon,
                         std::uint64_t seed, std::size_t covariate_dim, std::size_t kernel) {
    if (lookback == 0 || horizon == 0) throw InvalidSpec("model needs M >= 1 and H >= 1");
    if (kind == ModelKind::DecompLinear && covariate_dim != 0)
        throw InvalidSpec("decomp-linear does not take covariates");
    if (kind == ModelKind::DecompLinear && kernel == 0)
        throw InvalidSpec("kernel must be positive");

    ForecastModel model;
    model.kind = kind;
    model.lookback = lookback;
    model.horizon = horizon;
    model.covariate_dim = covariate_dim;
    model.kernel = kernel;
    model.parameters.assign(model.parameter_count(), 0.0);

    // Zero-mean uniform weights at scale 1/sqrt(M); biases stay zero.
    const double scale = 1.0 / std::sqrt(static_cast<double>(lookback));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    const std::size_t weight_count = model.parameters.size() - horizon;
    for (std::size_t i = 0; i < weight_count; ++i) model.parameters[i] = dist(rng);
    return model;
}

namespace {

// Centered moving average with replication padding at the edges.
std::vector<double> moving_average(const std::vector<double>& x, std::size_t kernel) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto left = static_cast<std::ptrdiff_t>((kernel - 1) / 2);
    const auto right = static_cast<std::ptrdiff_t>(kernel / 2);
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = i - left; j <= i + right; ++j)
            acc += x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(kernel);
    }
    return out;
}

std::vector<double> concat_input(const ForecastModel& model, const std::vector<double>& x,
                                 const std::vector<double>& c) {
    if (x.size() != model.lookback)
        throw ShapeMismatch("forward: |x| = " + std::to_string(x.size()) +
                            ", expected M = " + std::to_string(model.lookback));
    if (c.size() != model.covariate_dim)
        throw ShapeMismatch("forward: |c| = " + std::to_string(c.size()) +
                            ", expected " + std::to_string(model.covariate_dim));
    std::vector<double> in = x;
    in.insert(in.end(), c.begin(), c.end());
    return in;
}

}  // namespace

std::vector<double> forward(const ForecastModel& model, const std::vector<double>& x,
                            const std::vector<double>& c) {
    const auto in = concat_input(model, x, c);
    const std::size_t h_count = model.horizon, d = model.input_dim();
    std::vector<double> y_hat(h_count, 0.0);

    if (model.kind == ModelKind::Linear) {
        const double* w = model.parameters.data();
        const double* b = w + h_count * d;
        for (std::size_t h = 0; h < h_count; ++h) {
            double acc = b[h];
            for (std::size_t j = 0; j < d; ++j) acc += w[h * d + j] * in[j];
            y_hat[h] = acc;
        }
    } else {
        const auto trend = moving_average(in, model.kernel);
        const double* w_trend = model.parameters.data();
        const double* w_seasonal = w_trend + h_count * d;
        const double* b = w_seasonal + h_count * d;
        for (std::size_t h = 0; h < h_count; ++h) {
            double acc = b[h];
            for (std::size_t j = 0; j < d; ++j) {
                const double seasonal = in[j] - trend[j];
                acc += w_trend[h * d + j] * trend[j] + w_seasonal[h * d + j] * seasonal;
            }
            y_hat[h] = acc;
        }
    }
    return y_hat;
}

double prediction_loss(const std::vector<double>& y_hat, const std::vector<double>& y,
                       LossMetric metric) {
    if (y_hat.size() != y.size() || y.empty())
        throw ShapeMismatch("prediction_loss: size mismatch");
    double acc = 0.0;
    for (std::size_t h = 0; h < y.size(); ++h) {
        const double e = y_hat[h] - y[h];
        acc += metric == LossMetric::Mse ? e * e : std::abs(e);
    }
    return acc / static_cast<double>(y.size());
}

std::vector<double> prediction_loss_grad(const std::vector<double>& y_hat,
                                         const std::vector<double>& y) {
    if (y_hat.size() != y.size() || y.empty())
        throw ShapeMismatch("prediction_loss_grad: size mismatch");
    std::vector<double> grad(y.size());
    for (std::size_t h = 0; h < y.size(); ++h)
        grad[h] = 2.0 * (y_hat[h] - y[h]) / static_cast<double>(y.size());
    return grad;
}

std::vector<double> backward(const ForecastModel& model, const std::vector<double>& x,
                             const std::vector<double>& c,
                             const std::vector<double>& output_grad) {
    if (output_grad.size() != model.horizon) throw ShapeMismatch("backward: |dL/dy| != H");
    for (double g : output_grad)
        if (!std::isfinite(g)) throw NonFiniteGradient("backward: non-finite output gradient");

    const auto in = concat_input(model, x, c);
    const std::size_t h_count = model.horizon, d = model.input_dim();
    std::vector<double> grad(model.parameters.size(), 0.0);

    if (model.kind == ModelKind::Linear) {
        for (std::size_t h = 0; h < h_count; ++h) {
            for (std::size_t j = 0; j < d; ++j) grad[h * d + j] = output_grad[h] * in[j];
            grad[h_count * d + h] = output_grad[h];
        }
    } else {
        const auto trend = moving_average(in, model.kernel);
        for (std::size_t h = 0; h < h_count; ++h) {
            for (std::size_t j = 0; j < d; ++j) {
                grad[h * d + j] = output_grad[h] * trend[j];
                grad[h_count * d + h * d + j] = output_grad[h] * (in[j] - trend[j]);
            }
            grad[2 * h_count * d + h] = output_grad[h];
        }
    }
    return grad;
}

OptimizerState make_optimizer(std::size_t parameter_count, double learning_rate) {
    OptimizerState state;
    state.first_moment.assign(parameter_count, 0.0);
    state.second_moment.assign(parameter_count, 0.0);
    state.learning_rate = learning_rate;
    return state;
}

void optimizer_step(OptimizerState& state, std::vector<double>& parameters,
                    const std::vector<double>& gradient) {
    if (parameters.size() != gradient.size() || parameters.size() != state.first_moment.size())
        throw ShapeMismatch("optimizer_step: size mismatch");
    for (double g : gradient)
        if (!std::isfinite(g)) throw NonFiniteGradient("optimizer_step: non-finite gradient");

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * gradient[i];
        state.second_moment[i] =
            state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * gradient[i] * gradient[i];
        const double m_hat = state.first_moment[i] / bias1;
        const double v_hat = state.second_moment[i] / bias2;
        parameters[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        if (!std::isfinite(parameters[i]))
            throw NonFiniteGradient("optimizer_step: parameter became non-finite");
    }
}

void save_checkpoint(const ForecastModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "rts-model v1\n";
    out << "kind " << to_string(model.kind) << "\n";
    out << "M " << model.lookback << "\n";
    out << "H " << model.horizon << "\n";
    out << "cdim " << model.covariate_dim << "\n";
    out << "kernel " << model.kernel << "\n";
    out << "params " << model.parameters.size() << "\n";
    char buf[64];
    for (double p : model.parameters) {
        std::snprintf(buf, sizeof buf, "%a\n", p);  // hexfloat, bit-exact
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

ForecastModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "rts-model" || version != "v1") throw IoError("bad checkpoint header: " + path);

    ForecastModel model;
    std::string key, kind_str;
    std::size_t n_params = 0;
    in >> key >> kind_str;
    model.kind = model_kind_from_string(kind_str);
    in >> key >> model.lookback;
    in >> key >> model.horizon;
    in >> key >> model.covariate_dim;
    in >> key >> model.kernel;
    in >> key >> n_params;
    if (!in || n_params != model.parameter_count())
        throw IoError("checkpoint parameter count mismatch: " + path);

    model.parameters.resize(n_params);
    std::string token;
    for (std::size_t i = 0; i < n_params; ++i) {
        if (!(in >> token)) throw IoError("truncated checkpoint: " + path);
        model.parameters[i] = std::strtod(token.c_str(), nullptr);
    }
    return model;
}

}  // namespace rts
