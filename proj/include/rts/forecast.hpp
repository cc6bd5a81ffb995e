#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rts {

enum class ModelKind { Linear, DecompLinear };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

/// Flat-parameter forecaster. Layouts (row-major weights, input dim D = M + c_dim):
///   linear:        W (H x D), b (H)
///   decomp-linear: W_trend (H x D), W_seasonal (H x D), b (H)
/// The decomp-linear trend is a centered moving average with replication
/// padding (kernel size `kernel`); seasonal is the residual.
struct ForecastModel {
    ModelKind kind = ModelKind::Linear;
    std::size_t lookback = 0;   // M
    std::size_t horizon = 0;    // H
    std::size_t covariate_dim = 0;
    std::size_t kernel = 3;     // decomp-linear moving-average size
    std::vector<double> parameters;

    std::size_t input_dim() const { return lookback + covariate_dim; }
    std::size_t parameter_count() const;
};

ForecastModel make_model(ModelKind kind, std::size_t lookback, std::size_t horizon,
                         std::uint64_t seed, std::size_t covariate_dim = 0,
                         std::size_t kernel = 3);

std::vector<double> forward(const ForecastModel& model, const std::vector<double>& x,
                            const std::vector<double>& c = {});

enum class LossMetric { Mse, Mae };

double prediction_loss(const std::vector<double>& y_hat, const std::vector<double>& y,
                       LossMetric metric);

/// d(mse)/d(y_hat) = 2 (y_hat - y) / H, elementwise.
std::vector<double> prediction_loss_grad(const std::vector<double>& y_hat,
                                         const std::vector<double>& y);

/// Chain rule from dL/d(y_hat) to dL/d(parameters), in layout order.
std::vector<double> backward(const ForecastModel& model, const std::vector<double>& x,
                             const std::vector<double>& c,
                             const std::vector<double>& output_grad);

struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

OptimizerState make_optimizer(std::size_t parameter_count, double learning_rate);

/// One Adam update with bias correction. Throws on non-finite gradients.
void optimizer_step(OptimizerState& state, std::vector<double>& parameters,
                    const std::vector<double>& gradient);

/// Checkpoint write/read, bit-exact roundtrip (hexfloat parameter encoding).
void save_checkpoint(const ForecastModel& model, const std::string& path);
ForecastModel load_checkpoint(const std::string& path);

}  // namespace rts
