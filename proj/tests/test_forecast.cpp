#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "rts/errors.hpp"
#include "rts/forecast.hpp"

using namespace rts;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

// Central finite differences of prediction_loss(forward(.), y) in the parameters.
std::vector<double> fd_parameter_gradient(ForecastModel model, const std::vector<double>& x,
                                          const std::vector<double>& y, double step = 1e-5) {
    std::vector<double> grad(model.parameters.size());
    for (std::size_t i = 0; i < model.parameters.size(); ++i) {
        const double saved = model.parameters[i];
        model.parameters[i] = saved + step;
        const double up = prediction_loss(forward(model, x), y, LossMetric::Mse);
        model.parameters[i] = saved - step;
        const double down = prediction_loss(forward(model, x), y, LossMetric::Mse);
        model.parameters[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

}  // namespace

TEST_CASE("linear forward: zero weights give the bias") {
    ForecastModel model;
    model.kind = ModelKind::Linear;
    model.lookback = 3;
    model.horizon = 2;
    model.parameters.assign(model.parameter_count(), 0.0);
    model.parameters[6] = 3.0;
    model.parameters[7] = 3.0;
    CHECK(forward(model, {1, 2, 3}) == std::vector<double>{3, 3});
}

TEST_CASE("linear forward: dot product") {
    ForecastModel model;
    model.kind = ModelKind::Linear;
    model.lookback = 2;
    model.horizon = 1;
    model.parameters = {1, 1, 0};  // W=[[1,1]], b=[0]
    CHECK(forward(model, {2, 5}) == std::vector<double>{7});
}

TEST_CASE("decomp-linear on a constant input reduces to the trend weights") {
    auto model = make_model(ModelKind::DecompLinear, 5, 2, 42);
    const std::vector<double> x(5, 2.5);
    const auto y_hat = forward(model, x);

    const std::size_t d = 5;
    for (std::size_t h = 0; h < 2; ++h) {
        double expected = model.parameters[2 * 2 * d + h];  // bias
        for (std::size_t j = 0; j < d; ++j) expected += model.parameters[h * d + j] * 2.5;
        CHECK(y_hat[h] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("prediction_loss values") {
    CHECK(prediction_loss({1, 2}, {1, 2}, LossMetric::Mse) == 0.0);
    CHECK(prediction_loss({1, 2}, {1, 2}, LossMetric::Mae) == 0.0);
    CHECK(prediction_loss({1, 1}, {0, 0}, LossMetric::Mse) == doctest::Approx(1.0));
    CHECK(prediction_loss({1, 1}, {0, 0}, LossMetric::Mae) == doctest::Approx(1.0));
    CHECK(prediction_loss({2, 0}, {0, 0}, LossMetric::Mse) == doctest::Approx(2.0));
    CHECK(prediction_loss({2, 0}, {0, 0}, LossMetric::Mae) == doctest::Approx(1.0));
    CHECK_THROWS_AS(prediction_loss({1}, {1, 2}, LossMetric::Mse), ShapeMismatch);
}

TEST_CASE("prediction_loss_grad matches the analytic form and finite differences") {
    CHECK(prediction_loss_grad({1, 2}, {1, 2}) == std::vector<double>{0, 0});
    CHECK(prediction_loss_grad({1, 1}, {0, 0}) == std::vector<double>{1, 1});

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const auto y_hat = random_vector(rng, 6, 3.0);
        const auto y = random_vector(rng, 6, 3.0);
        const auto grad = prediction_loss_grad(y_hat, y);
        const double step = 1e-5;
        for (std::size_t h = 0; h < 6; ++h) {
            auto up = y_hat, down = y_hat;
            up[h] += step;
            down[h] -= step;
            const double fd = (prediction_loss(up, y, LossMetric::Mse) -
                               prediction_loss(down, y, LossMetric::Mse)) /
                              (2 * step);
            CHECK(grad[h] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("backward scalar chain rule") {
    ForecastModel model;
    model.kind = ModelKind::Linear;
    model.lookback = 1;
    model.horizon = 1;
    model.parameters = {0.5, 0.1};
    const auto grad = backward(model, {3}, {}, {2});
    CHECK(grad == std::vector<double>{6, 2});

    const auto zero = backward(model, {3}, {}, {0});
    CHECK(zero == std::vector<double>{0, 0});
}

TEST_CASE("backward matches finite differences for both model kinds") {
    std::mt19937_64 rng(17);
    for (ModelKind kind : {ModelKind::Linear, ModelKind::DecompLinear}) {
        for (int rep = 0; rep < 100; ++rep) {
            auto model = make_model(kind, 6, 3, rng());
            const auto x = random_vector(rng, 6, 2.0);
            const auto y = random_vector(rng, 3, 2.0);

            const auto y_hat = forward(model, x);
            const auto grad = backward(model, x, {}, prediction_loss_grad(y_hat, y));
            const auto fd = fd_parameter_gradient(model, x, y);
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double denom = std::max(1.0, std::abs(fd[i]));
                CHECK(std::abs(grad[i] - fd[i]) / denom < 1e-5);
            }
        }
    }
}

TEST_CASE("forward is linear in the parameters") {
    std::mt19937_64 rng(23);
    for (ModelKind kind : {ModelKind::Linear, ModelKind::DecompLinear}) {
        auto m1 = make_model(kind, 5, 3, 1);
        auto m2 = make_model(kind, 5, 3, 2);
        auto zero = m1;
        zero.parameters.assign(zero.parameters.size(), 0.0);
        auto sum = m1;
        for (std::size_t i = 0; i < sum.parameters.size(); ++i)
            sum.parameters[i] = m1.parameters[i] + m2.parameters[i];

        const auto x = random_vector(rng, 5, 2.0);
        const auto a = forward(m1, x);
        const auto b = forward(m2, x);
        const auto z = forward(zero, x);
        const auto s = forward(sum, x);
        for (std::size_t h = 0; h < 3; ++h)
            CHECK(s[h] == doctest::Approx(a[h] + b[h] - z[h]).epsilon(1e-10));
    }
}

TEST_CASE("Adam: zero gradient leaves parameters unchanged") {
    auto state = make_optimizer(3, 1e-3);
    std::vector<double> params{1.0, -2.0, 0.5};
    const auto before = params;
    optimizer_step(state, params, {0, 0, 0});
    CHECK(params == before);
    CHECK(state.step == 1);
}

TEST_CASE("Adam first step moves by about the learning rate") {
    auto state = make_optimizer(1, 1e-3);
    std::vector<double> params{0.0};
    optimizer_step(state, params, {1.0});
    // m_hat = 1, v_hat = 1 -> delta = lr / (1 + eps).
    CHECK(params[0] == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("Adam update magnitude decays under zero follow-up gradients") {
    auto state = make_optimizer(1, 1e-3);
    std::vector<double> params{0.0};
    optimizer_step(state, params, {1.0});
    double prev = params[0];
    double prev_delta = std::abs(prev);
    for (int i = 0; i < 2; ++i) {
        optimizer_step(state, params, {0.0});
        const double delta = std::abs(params[0] - prev);
        CHECK(delta < prev_delta);
        prev = params[0];
        prev_delta = delta;
    }
}

TEST_CASE("Adam rejects non-finite gradients") {
    auto state = make_optimizer(1, 1e-3);
    std::vector<double> params{0.0};
    CHECK_THROWS_AS(optimizer_step(state, params, {std::nan("")}), NonFiniteGradient);
}

TEST_CASE("training a linear model on a constant target converges") {
    std::mt19937_64 rng(5);
    auto model = make_model(ModelKind::Linear, 4, 2, 9);
    auto state = make_optimizer(model.parameters.size(), 1e-2);
    const std::vector<double> x{1, 1, 1, 1};
    const std::vector<double> y{1, 1};
    double loss = 1.0;
    for (int step = 0; step < 500; ++step) {
        const auto y_hat = forward(model, x);
        loss = prediction_loss(y_hat, y, LossMetric::Mse);
        optimizer_step(state, model.parameters, backward(model, x, {}, prediction_loss_grad(y_hat, y)));
    }
    CHECK(loss < 1e-6);
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
    auto model = make_model(ModelKind::DecompLinear, 7, 4, 1234, 0, 5);
    save_checkpoint(model, "ckpt_test.model");
    const auto loaded = load_checkpoint("ckpt_test.model");
    CHECK(loaded.kind == model.kind);
    CHECK(loaded.lookback == model.lookback);
    CHECK(loaded.horizon == model.horizon);
    CHECK(loaded.kernel == model.kernel);
    REQUIRE(loaded.parameters.size() == model.parameters.size());
    for (std::size_t i = 0; i < model.parameters.size(); ++i)
        CHECK(loaded.parameters[i] == model.parameters[i]);  // exact, not approx
    std::remove("ckpt_test.model");
}
