#include "rts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rts/errors.hpp"
#include "rts/forecast.hpp"

namespace rts {

double regret(const Allocation& a_hat, const std::vector<double>& y, const FeasibleSpace& space) {
    const auto a_star = solve_allocation(y, space);
    return std::abs(a_star.dot(y) - a_hat.dot(y));
}

double relative_regret(double regret_value, double optimal_cost) {
    if (optimal_cost <= 0.0)
        throw NonPositiveOptimalCost("relative_regret: optimal cost must be positive");
    return regret_value / optimal_cost;
}

namespace {

// Indices of the k smallest scores, ties to lower indices.
std::vector<std::size_t> lowest_k(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    order.resize(k);
    return order;
}

Allocation spread_evenly(std::size_t horizon, const std::vector<std::size_t>& support) {
    Allocation a;
    a.weights.assign(horizon, 0.0);
    for (auto h : support) a.weights[h] = 1.0 / static_cast<double>(support.size());
    return a;
}

}  // namespace

Allocation baseline_topk_forecast(const std::vector<double>& y_hat, std::size_t k) {
    if (k == 0 || k > y_hat.size()) throw InvalidSpec("baseline_topk_forecast: bad k");
    return spread_evenly(y_hat.size(), lowest_k(y_hat, k));
}

Allocation baseline_topk_risk_avoid(const std::vector<double>& y_hat,
                                    const std::vector<double>& r, std::size_t k) {
    if (r.size() != y_hat.size()) throw ShapeMismatch("baseline_topk_risk_avoid: |r| != |y_hat|");
    if (k == 0 || k > y_hat.size()) throw InvalidSpec("baseline_topk_risk_avoid: bad k");
    std::vector<double> upper(y_hat.size());
    for (std::size_t h = 0; h < y_hat.size(); ++h) upper[h] = y_hat[h] + r[h];
    return spread_evenly(y_hat.size(), lowest_k(upper, k));
}

Allocation baseline_uncertainty_penalty(const std::vector<double>& y_hat,
                                        const std::vector<double>& r, double penalty_weight) {
    if (r.size() != y_hat.size()) throw ShapeMismatch("baseline_uncertainty_penalty: |r| != |y_hat|");
    if (penalty_weight < 0.0) throw InvalidSpec("penalty_weight must be >= 0");
    std::vector<double> scores(y_hat.size());
    for (std::size_t h = 0; h < y_hat.size(); ++h) scores[h] = y_hat[h] + penalty_weight * r[h];
    return spread_evenly(y_hat.size(), lowest_k(scores, 1));
}

EvalReport evaluate_method(const std::string& method_name,
                           const std::function<std::vector<double>(const WindowSample&)>& forecast_fn,
                           const AllocationRule& rule, const EvalContext& context) {
    if (context.test.empty()) throw EmptySplit("evaluate_method: empty test split");

    const auto oracle_space = context.oracle_unconstrained
                                  ? FeasibleSpace::simplex(context.decision_space.horizon)
                                  : context.decision_space;

    EvalReport report;
    report.method = method_name;
    report.sample_count = context.test.size();

    double sum_regret = 0.0, sum_rr = 0.0, sum_se = 0.0, sum_ae = 0.0;
    for (const auto& sample : context.test) {
        const auto y_hat_norm = forecast_fn(sample);
        const auto y_norm = normalize(sample.y, context.normalizer);
        const auto allocation = rule(y_hat_norm);

        const auto a_star = solve_allocation(sample.y, oracle_space);
        const double optimal_cost = a_star.dot(sample.y);
        const double reg = std::abs(optimal_cost - allocation.dot(sample.y));
        sum_regret += reg;
        sum_rr += relative_regret(reg, optimal_cost);
        if (context.per_sample_regret) context.per_sample_regret->push_back(reg);

        for (std::size_t h = 0; h < y_norm.size(); ++h) {
            const double e = y_hat_norm[h] - y_norm[h];
            sum_se += e * e;
            sum_ae += std::abs(e);
        }
    }

    const auto n = static_cast<double>(context.test.size());
    const auto hn = n * static_cast<double>(context.decision_space.horizon);
    report.mean_regret = sum_regret / n;
    report.mean_relative_regret = sum_rr / n;
    report.mse = sum_se / hn;
    report.mae = sum_ae / hn;
    return report;
}

std::map<std::string, double> rank_table(const std::vector<EvalReport>& reports,
                                         bool by_relative_regret) {
    std::set<std::string> methods, datasets;
    for (const auto& r : reports) {
        methods.insert(r.method);
        datasets.insert(r.dataset);
    }
    std::map<std::pair<std::string, std::string>, double> grid;
    for (const auto& r : reports)
        grid[{r.dataset, r.method}] = by_relative_regret ? r.mean_relative_regret : r.mean_regret;
    for (const auto& d : datasets)
        for (const auto& m : methods)
            if (!grid.count({d, m}))
                throw IncompleteGrid("rank_table: missing cell (" + d + ", " + m + ")");

    std::map<std::string, double> avg_rank;
    for (const auto& m : methods) avg_rank[m] = 0.0;

    for (const auto& d : datasets) {
        for (const auto& m : methods) {
            const double v = grid[{d, m}];
            // Rank with ties sharing the mean of tied ranks.
            std::size_t below = 0, tied = 0;
            for (const auto& other : methods) {
                const double w = grid[{d, other}];
                if (w < v) ++below;
                else if (w == v) ++tied;
            }
            avg_rank[m] += static_cast<double>(below) + (static_cast<double>(tied) + 1.0) / 2.0;
        }
    }
    for (auto& [m, total] : avg_rank) total /= static_cast<double>(datasets.size());
    return avg_rank;
}

}  // namespace rts
