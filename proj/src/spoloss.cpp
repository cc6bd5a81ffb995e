#include "rts/spoloss.hpp"

#include "rts/errors.hpp"
#include "rts/forecast.hpp"

namespace rts {

SpoEvaluation spo_plus(const std::vector<double>& y_hat, const std::vector<double>& y,
                       const FeasibleSpace& space) {
    if (y_hat.size() != y.size() || y.size() != space.horizon)
        throw ShapeMismatch("spo_plus: shape mismatch");

    SpoEvaluation eval;
    eval.full_info_solution = solve_allocation(y, space);

    std::vector<double> inner_cost(y.size());
    for (std::size_t h = 0; h < y.size(); ++h) inner_cost[h] = 2.0 * y_hat[h] - y[h];
    eval.inner_max_solution = solve_allocation(inner_cost, space);

    const auto& a_star = eval.full_info_solution;
    const auto& a_inner = eval.inner_max_solution;
    eval.loss = 2.0 * a_star.dot(y_hat) - a_star.dot(y) - a_inner.dot(inner_cost);

    eval.subgradient.resize(y.size());
    for (std::size_t h = 0; h < y.size(); ++h)
        eval.subgradient[h] = 2.0 * (a_star.weights[h] - a_inner.weights[h]);
    return eval;
}

CombinedObjective combined_objective(const std::vector<double>& y_hat,
                                     const std::vector<double>& y, const FeasibleSpace& space,
                                     double beta) {
    if (beta < 0.0) throw InvalidSpec("beta must be >= 0");
    const auto spo = spo_plus(y_hat, y, space);

    CombinedObjective out;
    out.loss = spo.loss + beta * prediction_loss(y_hat, y, LossMetric::Mse);
    out.gradient = spo.subgradient;
    const auto mse_grad = prediction_loss_grad(y_hat, y);
    for (std::size_t h = 0; h < out.gradient.size(); ++h) out.gradient[h] += beta * mse_grad[h];
    return out;
}

}  // namespace rts
