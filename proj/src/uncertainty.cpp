#include "rts/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "rts/errors.hpp"

namespace rts {

namespace {

// k-th smallest with k = ceil(level * n); level clamped to 1.
double order_statistic(std::vector<double> values, double level) {
    const auto n = values.size();
    level = std::min(1.0, level);
    auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     values.end());
    return values[k - 1];
}

}  // namespace

ResidualMatrix collect_residuals(const ForecastModel& model,
                                 const std::vector<WindowSample>& calibration) {
    if (calibration.empty()) throw EmptyCalibration("collect_residuals: empty calibration set");
    ResidualMatrix residuals;
    residuals.per_position.assign(model.horizon, {});
    for (auto& eps : residuals.per_position) eps.reserve(calibration.size());
    for (const auto& sample : calibration) {
        const auto y_hat = forward(model, sample.x, sample.c);
        for (std::size_t h = 0; h < model.horizon; ++h)
            residuals.per_position[h].push_back(std::abs(y_hat[h] - sample.y[h]));
    }
    return residuals;
}

std::vector<double> positional_uncertainty(const ResidualMatrix& residuals, double gamma) {
    if (gamma <= 0.0 || gamma >= 1.0) throw InvalidSpec("gamma must be in (0,1)");
    if (residuals.horizon() == 0 || residuals.count() == 0)
        throw EmptyCalibration("positional_uncertainty: no residuals");

    const auto n = static_cast<double>(residuals.count());
    const double level = (n + 1.0) / n * gamma;
    std::vector<double> r(residuals.horizon());
    for (std::size_t h = 0; h < residuals.horizon(); ++h)
        r[h] = order_statistic(residuals.per_position[h], level);
    return r;
}

double risk_threshold(const std::vector<double>& r, double alpha) {
    if (alpha <= 0.0 || alpha > 1.0) throw InvalidSpec("alpha must be in (0,1]");
    if (r.empty()) throw InvalidSpec("risk_threshold: empty risk vector");
    return order_statistic(r, alpha);
}

RiskProfile make_risk_profile(const ResidualMatrix& residuals, double gamma, double alpha) {
    RiskProfile profile;
    profile.gamma = gamma;
    profile.alpha = alpha;
    profile.r = positional_uncertainty(residuals, gamma);
    profile.threshold = risk_threshold(profile.r, alpha);
    return profile;
}

FeasibleSpace build_feasible_space(const std::vector<double>& r, double alpha,
                                   std::vector<double> caps) {
    return FeasibleSpace::with_risk(r, risk_threshold(r, alpha), std::move(caps));
}

}  // namespace rts
