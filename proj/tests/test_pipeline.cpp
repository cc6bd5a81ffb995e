#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "rts/core_data.hpp"
#include "rts/errors.hpp"
#include "rts/pipeline.hpp"

using namespace rts;

namespace {

DatasetSplits sinusoid_splits(std::size_t lookback, std::size_t horizon, double noise_std,
                              std::uint64_t seed, std::size_t length = 400) {
    SynthSpec spec;
    spec.kind = SynthKind::SinusoidTrendNoise;
    spec.length = length;
    spec.amplitude = 1.0;
    spec.period = 12.0;
    spec.noise_std = noise_std;
    spec.base = 10.0;
    spec.seed = seed;
    const auto series = generate_synthetic(spec);
    return split_chronological(make_windows(series, lookback, horizon), 0.7, 0.1, 0.2);
}

TrainConfig base_config(Method method) {
    TrainConfig config;
    config.method = method;
    config.lookback = 24;
    config.horizon = 4;
    config.epochs = 8;
    config.batch_size = 16;
    config.learning_rate = 1e-2;
    config.seed = 7;
    return config;
}

double test_mse(const TrainedPolicy& policy, const std::vector<WindowSample>& test) {
    double total = 0.0;
    for (const auto& w : test) {
        const auto y_hat = forward(policy.model, normalize(w.x, policy.normalizer), w.c);
        total += prediction_loss(y_hat, normalize(w.y, policy.normalizer), LossMetric::Mse);
    }
    return total / static_cast<double>(test.size());
}

}  // namespace

TEST_CASE("predict-only fits a near-constant series to tiny loss") {
    SynthSpec spec;
    spec.kind = SynthKind::SinusoidTrendNoise;
    spec.length = 300;
    spec.amplitude = 0.0;
    spec.noise_std = 1e-4;
    spec.base = 5.0;
    spec.seed = 3;
    const auto splits =
        split_chronological(make_windows(generate_synthetic(spec), 8, 2), 0.7, 0.1, 0.2);

    auto config = base_config(Method::PredictOnly);
    config.lookback = 8;
    config.horizon = 2;
    config.epochs = 30;
    const auto policy = train_predict_only(config, splits);
    // Raw-space mse ~ noise variance; check in raw units.
    double raw_mse = 0.0;
    for (const auto& w : splits.train) {
        const auto y_hat =
            denormalize(forward(policy.model, normalize(w.x, policy.normalizer), {}), policy.normalizer);
        raw_mse += prediction_loss(y_hat, w.y, LossMetric::Mse);
    }
    raw_mse /= static_cast<double>(splits.train.size());
    CHECK(raw_mse < 1e-6);
}

TEST_CASE("predict-only learns a noiseless sinusoid") {
    const auto splits = sinusoid_splits(24, 4, 0.0, 1);
    auto config = base_config(Method::PredictOnly);
    config.epochs = 150;
    const auto policy = train_predict_only(config, splits);
    CHECK(test_mse(policy, splits.test) < 1e-3);
    CHECK(policy.history.size() == 150);
    CHECK_FALSE(policy.risk_profile.has_value());
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto splits = sinusoid_splits(24, 4, 0.1, 2);
    for (Method method : {Method::PredictOnly, Method::RtsPto, Method::RtsPno}) {
        auto config = base_config(method);
        config.epochs = 3;
        const auto a = train(config, splits);
        const auto b = train(config, splits);
        CHECK(a.model.parameters == b.model.parameters);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].train_loss == b.history[i].train_loss);
            CHECK(a.history[i].calibration_regret == b.history[i].calibration_regret);
            CHECK(a.history[i].mean_r == b.history[i].mean_r);
        }
    }
}

TEST_CASE("rts-pto produces a terminal risk profile with T loss entries") {
    const auto splits = sinusoid_splits(24, 4, 0.1, 4);
    auto config = base_config(Method::RtsPto);
    const auto policy = train_pto(config, splits);
    CHECK(policy.history.size() == config.epochs);
    REQUIRE(policy.risk_profile.has_value());
    CHECK(policy.space.risk_enabled);
    CHECK(policy.space.threshold == doctest::Approx(policy.risk_profile->threshold));
    for (double r : policy.risk_profile->r) CHECK(r >= 0.0);
}

TEST_CASE("larger coverage rate gives elementwise larger radii") {
    const auto splits = sinusoid_splits(24, 4, 0.2, 5);
    auto lo = base_config(Method::RtsPto);
    lo.gamma = 0.6;
    auto hi = lo;
    hi.gamma = 0.95;
    const auto p_lo = train_pto(lo, splits);
    const auto p_hi = train_pto(hi, splits);
    for (std::size_t h = 0; h < 4; ++h)
        CHECK(p_hi.risk_profile->r[h] >= p_lo.risk_profile->r[h] - 1e-12);
}

TEST_CASE("pto in a perfect-fit regime has a vacuous constraint") {
    const auto splits = sinusoid_splits(24, 4, 0.0, 6);
    auto config = base_config(Method::RtsPto);
    config.epochs = 200;
    const auto policy = train_pto(config, splits);
    for (double r : policy.risk_profile->r) CHECK(r < 0.05);

    // Decision equals the unconstrained argmin of the forecast.
    const auto& w = splits.test.front();
    const auto result = infer(policy, w.x);
    const auto y_hat_norm = normalize(result.y_hat, policy.normalizer);
    const auto unconstrained = solve_allocation(y_hat_norm, FeasibleSpace::simplex(4));
    CHECK(result.allocation.weights == unconstrained.weights);
}

TEST_CASE("rts-pno records one risk recomputation per epoch") {
    const auto splits = sinusoid_splits(24, 4, 0.15, 8);
    auto config = base_config(Method::RtsPno);
    config.epochs = 5;
    const auto policy = train_pno(config, splits);
    CHECK(policy.history.size() == 5);
    for (const auto& stats : policy.history) CHECK(stats.mean_r > 0.0);
    REQUIRE(policy.risk_profile.has_value());

    // Checkpoint selection: best recorded regret is <= the final epoch's.
    double best = policy.history.front().calibration_regret;
    for (const auto& stats : policy.history) best = std::min(best, stats.calibration_regret);
    CHECK(best <= policy.history.back().calibration_regret + 1e-12);
}

TEST_CASE("huge beta makes pno track predict-only for one epoch") {
    // Adam is gradient-scale invariant, so beta = 1e6 drowns out the SPO+ term.
    const auto full = sinusoid_splits(24, 4, 0.1, 9);
    DatasetSplits splits;
    splits.train.assign(full.train.begin(), full.train.begin() + 20);
    splits.calibration = full.calibration;
    splits.test = full.test;

    auto pno_config = base_config(Method::RtsPno);
    pno_config.epochs = 1;
    pno_config.beta = 1e6;
    auto po_config = base_config(Method::PredictOnly);
    po_config.epochs = 1;

    const auto pno = train_pno(pno_config, splits);
    const auto po = train_predict_only(po_config, splits);
    for (std::size_t i = 0; i < po.model.parameters.size(); ++i) {
        const double denom = std::max(1e-3, std::abs(po.model.parameters[i]));
        CHECK(std::abs(pno.model.parameters[i] - po.model.parameters[i]) / denom < 1e-3);
    }
}

TEST_CASE("frozen-uncertainty ablation trains and differs from adaptive") {
    const auto splits = sinusoid_splits(24, 4, 0.2, 10);
    auto adaptive = base_config(Method::RtsPno);
    adaptive.epochs = 4;
    auto frozen = adaptive;
    frozen.adaptive_uncertainty = false;

    const auto a = train_pno(adaptive, splits);
    const auto f = train_pno(frozen, splits);
    CHECK(a.model.parameters != f.model.parameters);
    CHECK(f.risk_profile.has_value());
}

TEST_CASE("infer is feasible and normalized") {
    const auto splits = sinusoid_splits(24, 4, 0.2, 11);
    auto config = base_config(Method::RtsPno);
    config.epochs = 3;
    const auto policy = train_pno(config, splits);

    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> dist(9.0, 11.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(24);
        for (auto& v : x) v = dist(rng);
        const auto result = infer(policy, x);
        double sum = 0.0;
        for (double w : result.allocation.weights) {
            CHECK(w >= -1e-9);
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(result.allocation.dot(policy.space.risk) <= policy.space.threshold + 1e-9);
    }
}

TEST_CASE("a tight handmade risk profile forces the low-risk slot") {
    TrainedPolicy policy;
    policy.method = Method::RtsPto;
    policy.model = make_model(ModelKind::Linear, 4, 2, 21);
    policy.normalizer = {0.0, 1.0};
    RiskProfile rp;
    rp.r = {1.0, 2.0};
    rp.alpha = 0.5;
    rp.threshold = 1.0;
    policy.risk_profile = rp;
    policy.space = FeasibleSpace::with_risk(rp.r, rp.threshold);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(4);
        for (auto& v : x) v = dist(rng);
        const auto result = infer(policy, x);
        CHECK(result.allocation.weights[0] == doctest::Approx(1.0));
        CHECK(result.allocation.weights[1] == doctest::Approx(0.0));
    }
}

TEST_CASE("policy save/load roundtrip preserves inference exactly") {
    const auto splits = sinusoid_splits(24, 4, 0.15, 12);
    auto config = base_config(Method::RtsPno);
    config.epochs = 3;
    const auto policy = train_pno(config, splits);
    save_policy(policy, "policy_roundtrip_test");
    const auto loaded = load_policy("policy_roundtrip_test");

    CHECK(loaded.model.parameters == policy.model.parameters);
    CHECK(loaded.normalizer.mean == policy.normalizer.mean);
    CHECK(loaded.normalizer.std == policy.normalizer.std);
    REQUIRE(loaded.risk_profile.has_value());
    CHECK(loaded.risk_profile->r == policy.risk_profile->r);
    CHECK(loaded.risk_profile->threshold == policy.risk_profile->threshold);

    const auto& w = splits.test.front();
    const auto a = infer(policy, w.x);
    const auto b = infer(loaded, w.x);
    CHECK(a.y_hat == b.y_hat);
    CHECK(a.allocation.weights == b.allocation.weights);
    std::remove("policy_roundtrip_test.model");
    std::remove("policy_roundtrip_test.policy");
}

TEST_CASE("config validation names bad fields") {
    TrainConfig config = base_config(Method::RtsPno);
    config.gamma = 1.5;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("gamma"), ConfigError);
    config = base_config(Method::RtsPno);
    config.alpha = 0.0;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("alpha"), ConfigError);
    config = base_config(Method::RtsPno);
    config.epochs = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}
