#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rts/allocate.hpp"
#include "rts/core_data.hpp"
#include "rts/evaluation.hpp"
#include "rts/forecast.hpp"
#include "rts/uncertainty.hpp"

namespace rts {

enum class Method { PredictOnly, RtsPto, RtsPno };

Method method_from_string(const std::string& s);
std::string to_string(Method method);

struct TrainConfig {
    Method method = Method::PredictOnly;
    std::size_t lookback = 24;   // M
    std::size_t horizon = 8;     // H
    double gamma = 0.9;          // conformal coverage rate
    double alpha = 0.5;          // quantile level for r0
    double beta = 1.0;           // prediction-loss regulator in the combined objective
    double learning_rate = 1e-3;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    ModelKind model_kind = ModelKind::Linear;
    std::size_t kernel = 3;
    std::uint64_t seed = 0;
    std::vector<double> caps;    // empty = all 1
    bool adaptive_uncertainty = true;  // false freezes r at its initial value (ablation)

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double calibration_regret = 0.0;  // raw price units
    double mean_r = 0.0;              // 0 when no risk profile applies
};

struct TrainedPolicy {
    ForecastModel model;
    NormalizerStats normalizer;
    std::optional<RiskProfile> risk_profile;  // present iff method is rts-pto/rts-pno
    FeasibleSpace space;
    Method method = Method::PredictOnly;
    std::vector<EpochStats> history;
};

TrainedPolicy train_predict_only(const TrainConfig& config, const DatasetSplits& splits);
TrainedPolicy train_pto(const TrainConfig& config, const DatasetSplits& splits);
TrainedPolicy train_pno(const TrainConfig& config, const DatasetSplits& splits);

/// Dispatch on config.method.
TrainedPolicy train(const TrainConfig& config, const DatasetSplits& splits);

struct Inference {
    std::vector<double> y_hat;  // raw price space
    Allocation allocation;
};

Inference infer(const TrainedPolicy& policy, const std::vector<double>& x,
                const std::vector<double>& c = {});

/// Mean regret of the policy's own decisions over a split, raw price units.
double mean_policy_regret(const TrainedPolicy& policy, const std::vector<WindowSample>& split);

/// Policy persistence: `<base>.model` (checkpoint) plus `<base>.policy`
/// (normalizer + risk profile sidecar, hexfloat-encoded, bit-exact roundtrip).
void save_policy(const TrainedPolicy& policy, const std::string& base_path);
TrainedPolicy load_policy(const std::string& base_path);

}  // namespace rts
