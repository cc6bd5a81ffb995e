#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rts/allocate.hpp"
#include "rts/core_data.hpp"

namespace rts {

struct EvalReport {
    std::string method;
    std::string dataset;
    double mean_regret = 0.0;           // raw price units
    double mean_relative_regret = 0.0;  // dimensionless
    double mse = 0.0;                   // normalized space
    double mae = 0.0;                   // normalized space
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

/// |a*(y).y - a_hat.y| with the full-information optimum over the same space.
double regret(const Allocation& a_hat, const std::vector<double>& y, const FeasibleSpace& space);

double relative_regret(double regret_value, double optimal_cost);

/// Weight 1/k on the k smallest-forecast positions, ties to lower indices.
Allocation baseline_topk_forecast(const std::vector<double>& y_hat, std::size_t k);

/// Weight 1/k on the k positions with smallest y_hat + r.
Allocation baseline_topk_risk_avoid(const std::vector<double>& y_hat,
                                    const std::vector<double>& r, std::size_t k);

/// All mass on argmin (y_hat + penalty_weight * r).
Allocation baseline_uncertainty_penalty(const std::vector<double>& y_hat,
                                        const std::vector<double>& r, double penalty_weight);

/// A method under evaluation: maps a normalized forecast to an allocation.
/// (y_hat is in normalized space; the returned allocation is what gets scored.)
using AllocationRule = std::function<Allocation(const std::vector<double>& y_hat_normalized)>;

/// Scores one allocation rule over the test split. Forecasts come from the
/// given model in normalized space; regret/R.R. accumulate in raw prices,
/// mse/mae in normalized space. decision_space is where the rule's output
/// must be feasible and where the regret oracle solves (unless
/// oracle_unconstrained).
struct EvalContext {
    const std::vector<WindowSample>& test;  // raw-space windows
    NormalizerStats normalizer;
    FeasibleSpace decision_space;
    bool oracle_unconstrained = false;
    std::vector<double>* per_sample_regret = nullptr;  // optional, raw units
};

EvalReport evaluate_method(const std::string& method_name,
                           const std::function<std::vector<double>(const WindowSample&)>& forecast_fn,
                           const AllocationRule& rule, const EvalContext& context);

/// Average rank per method over a method x dataset grid of mean regrets
/// (1 = best; ties share the mean of tied ranks).
std::map<std::string, double> rank_table(const std::vector<EvalReport>& reports,
                                         bool by_relative_regret = false);

}  // namespace rts
