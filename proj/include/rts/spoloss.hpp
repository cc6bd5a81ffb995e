#pragma once

#include <vector>

#include "rts/allocate.hpp"

namespace rts {

struct SpoEvaluation {
    double loss = 0.0;
    std::vector<double> subgradient;      // d(loss)/d(y_hat)
    Allocation inner_max_solution;        // maximizer of max_a {a.y - 2 a.y_hat}
    Allocation full_info_solution;        // a*(y)
};

/// SPO+ surrogate: l = 2 a*(y).y_hat - a*(y).y + max_{a in space} {a.y - 2 a.y_hat},
/// with subgradient 2 (a*(y) - a_inner). Both LP calls share solve_allocation's
/// tie-breaking; the inner max runs on cost vector 2 y_hat - y.
SpoEvaluation spo_plus(const std::vector<double>& y_hat, const std::vector<double>& y,
                       const FeasibleSpace& space);

struct CombinedObjective {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// spo_plus loss plus beta * mse, with the matching gradient in y_hat.
CombinedObjective combined_objective(const std::vector<double>& y_hat,
                                     const std::vector<double>& y, const FeasibleSpace& space,
                                     double beta);

}  // namespace rts
