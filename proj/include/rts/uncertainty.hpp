#pragma once

#include <vector>

#include "rts/allocate.hpp"
#include "rts/core_data.hpp"
#include "rts/forecast.hpp"

namespace rts {

/// Per-position absolute residuals from the calibration split, one multiset
/// per horizon step, all of equal cardinality.
struct ResidualMatrix {
    std::vector<std::vector<double>> per_position;

    std::size_t horizon() const { return per_position.size(); }
    std::size_t count() const { return per_position.empty() ? 0 : per_position.front().size(); }
};

struct RiskProfile {
    std::vector<double> r;  // positional uncertainties, length H
    double gamma = 0.9;     // coverage rate
    double alpha = 0.5;     // quantile level for r0
    double threshold = 0.0; // r0 = alpha-quantile of r
};

/// One forward pass per calibration sample; residuals in the sample's own
/// (normalized) space.
ResidualMatrix collect_residuals(const ForecastModel& model,
                                 const std::vector<WindowSample>& calibration);

/// r_h = k-th smallest of eps_h with k = ceil(level * n),
/// level = min(1, (n+1)/n * gamma); clamps to the max when level >= 1.
std::vector<double> positional_uncertainty(const ResidualMatrix& residuals, double gamma);

/// Same order-statistic convention applied to {r_1..r_H} at level alpha.
double risk_threshold(const std::vector<double>& r, double alpha);

RiskProfile make_risk_profile(const ResidualMatrix& residuals, double gamma, double alpha);

/// Risk-aware feasible space, nonempty by construction (r0 >= min r).
FeasibleSpace build_feasible_space(const std::vector<double>& r, double alpha,
                                   std::vector<double> caps = {});

}  // namespace rts
