#include "rts/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "rts/errors.hpp"

namespace rts {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kTieTol = 1e-12;

void check_prices(const std::vector<double>& prices, const FeasibleSpace& space) {
    if (prices.size() != space.horizon) throw ShapeMismatch("solve_allocation: |prices| != H");
    for (double p : prices)
        if (!std::isfinite(p)) throw ShapeMismatch("solve_allocation: non-finite price");
}

bool caps_are_unit(const FeasibleSpace& space) {
    for (double cap : space.caps)
        if (cap < 1.0 - 1e-12) return false;
    return true;
}

bool support_lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Candidate {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> support;
    std::vector<double> support_weights;
    bool valid = false;
};

void consider(Candidate& best, double cost, std::vector<std::size_t> support,
              std::vector<double> weights) {
    if (!best.valid || cost < best.cost - kTieTol ||
        (std::abs(cost - best.cost) <= kTieTol && support_lex_less(support, best.support))) {
        best.cost = cost;
        best.support = std::move(support);
        best.support_weights = std::move(weights);
        best.valid = true;
    }
}

Allocation make_allocation(std::size_t horizon, const Candidate& best) {
    Allocation a;
    a.weights.assign(horizon, 0.0);
    for (std::size_t i = 0; i < best.support.size(); ++i)
        a.weights[best.support[i]] = std::max(0.0, best.support_weights[i]);
    return a;
}

// Optimum over the unit-cap simplex (plus optional risk halfspace) has
// support of at most two positions; scan singles and tight-risk pairs.
Allocation solve_unit_caps(const std::vector<double>& prices, const FeasibleSpace& space) {
    const std::size_t h_count = space.horizon;
    Candidate best;

    if (!space.risk_enabled) {
        std::size_t arg = 0;
        for (std::size_t h = 1; h < h_count; ++h)
            if (prices[h] < prices[arg] - kTieTol) arg = h;
        consider(best, prices[arg], {arg}, {1.0});
        return make_allocation(h_count, best);
    }

    const auto& r = space.risk;
    const double r0 = space.threshold;

    for (std::size_t h = 0; h < h_count; ++h)
        if (r[h] <= r0 + kFeasTol) consider(best, prices[h], {h}, {1.0});

    for (std::size_t i = 0; i < h_count; ++i) {
        for (std::size_t j = i + 1; j < h_count; ++j) {
            if (std::abs(r[i] - r[j]) <= kFeasTol) continue;
            // Risk tight: a_i r_i + a_j r_j = r0 with a_i + a_j = 1.
            const double wi = (r0 - r[j]) / (r[i] - r[j]);
            const double wj = 1.0 - wi;
            if (wi < -kFeasTol || wj < -kFeasTol) continue;
            const double cwi = std::clamp(wi, 0.0, 1.0);
            const double cwj = std::clamp(wj, 0.0, 1.0);
            consider(best, cwi * prices[i] + cwj * prices[j], {i, j}, {cwi, cwj});
        }
    }

    if (!best.valid)
        throw Infeasible("risk halfspace excludes the entire simplex (r0 = " +
                         std::to_string(r0) + ")");
    return make_allocation(h_count, best);
}

// Dense two-phase simplex on min c.x, A x = b, x >= 0, with Bland's rule.
struct StandardForm {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;  // row-major
    std::vector<double> b;
    std::vector<double> c;

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
};

class SimplexTableau {
public:
    SimplexTableau(const StandardForm& lp)
        : m_(lp.rows), n_(lp.cols + lp.rows), tableau_((lp.rows + 1) * (n_ + 1), 0.0),
          basis_(lp.rows), a0_(m_ * n_, 0.0), b0_(m_) {
        // Columns: original variables, then one artificial per row.
        for (std::size_t i = 0; i < m_; ++i) {
            const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < lp.cols; ++j) at(i, j) = sign * lp.at(i, j);
            rhs(i) = sign * lp.b[i];
            at(i, lp.cols + i) = 1.0;
            basis_[i] = lp.cols + i;
        }
        n_orig_ = lp.cols;
        // Keep a pristine copy of the constraints to refine the final vertex
        // against; tableau updates accumulate round-off on degenerate pivots.
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) a0_[i * n_ + j] = at(i, j);
            b0_[i] = rhs(i);
        }
    }

    LpResult solve(const std::vector<double>& cost) {
        // Phase 1: minimize the sum of artificials.
        std::vector<double> phase1(n_, 0.0);
        for (std::size_t j = n_orig_; j < n_; ++j) phase1[j] = 1.0;
        set_objective(phase1);
        if (iterate() == LpStatus::Unbounded) return {LpStatus::Infeasible, {}};
        if (objective_value() > 1e-7) return {LpStatus::Infeasible, {}};
        pivot_out_artificials();

        std::vector<double> phase2(n_, 0.0);
        for (std::size_t j = 0; j < n_orig_; ++j) phase2[j] = cost[j];
        set_objective(phase2);
        const auto status = iterate(/*forbid_artificials=*/true);
        if (status == LpStatus::Unbounded) return {LpStatus::Unbounded, {}};

        LpResult result;
        result.status = LpStatus::Optimal;
        result.x.assign(n_orig_, 0.0);
        std::vector<double> refined;
        if (refine_basic_solution(refined)) {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] < n_orig_) result.x[basis_[i]] = refined[i];
        } else {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] < n_orig_) result.x[basis_[i]] = rhs(i);
        }
        return result;
    }

private:
    double& at(std::size_t i, std::size_t j) { return tableau_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return tableau_[i * (n_ + 1) + n_]; }
    double& obj(std::size_t j) { return tableau_[m_ * (n_ + 1) + j]; }
    double objective_value() { return -tableau_[m_ * (n_ + 1) + n_]; }

    void set_objective(const std::vector<double>& cost) {
        for (std::size_t j = 0; j <= n_; ++j) tableau_[m_ * (n_ + 1) + j] = 0.0;
        for (std::size_t j = 0; j < n_; ++j) obj(j) = cost[j];
        // Price out the current basis.
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j)
                tableau_[m_ * (n_ + 1) + j] -= cb * tableau_[i * (n_ + 1) + j];
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = at(row, col);
        for (std::size_t j = 0; j <= n_; ++j) tableau_[row * (n_ + 1) + j] /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double factor = tableau_[i * (n_ + 1) + col];
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j)
                tableau_[i * (n_ + 1) + j] -= factor * tableau_[row * (n_ + 1) + j];
        }
        basis_[row] = col;
    }

    LpStatus iterate(bool forbid_artificials = false) {
        const std::size_t limit = forbid_artificials ? n_orig_ : n_;
        for (;;) {
            // Bland: entering variable = smallest index with negative reduced cost.
            std::size_t enter = limit;
            for (std::size_t j = 0; j < limit; ++j) {
                if (obj(j) < -1e-10) {
                    enter = j;
                    break;
                }
            }
            if (enter == limit) return LpStatus::Optimal;

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double aij = at(i, enter);
                if (aij <= 1e-11) continue;
                const double ratio = rhs(i) / aij;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (leave == m_ || basis_[i] < basis_[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave == m_) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
    }

    // Recompute the basic variables from the pristine constraint copy:
    // solve B z = b for the columns of the final basis with partial-pivot
    // Gaussian elimination. Returns false on a (near-)singular basis.
    bool refine_basic_solution(std::vector<double>& z) const {
        std::vector<double> mat(m_ * (m_ + 1), 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t k = 0; k < m_; ++k) mat[i * (m_ + 1) + k] = a0_[i * n_ + basis_[k]];
            mat[i * (m_ + 1) + m_] = b0_[i];
        }
        for (std::size_t col = 0; col < m_; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < m_; ++i)
                if (std::abs(mat[i * (m_ + 1) + col]) > std::abs(mat[piv * (m_ + 1) + col]))
                    piv = i;
            const double p = mat[piv * (m_ + 1) + col];
            if (std::abs(p) < 1e-12) return false;
            if (piv != col)
                for (std::size_t j = col; j <= m_; ++j)
                    std::swap(mat[piv * (m_ + 1) + j], mat[col * (m_ + 1) + j]);
            for (std::size_t i = col + 1; i < m_; ++i) {
                const double f = mat[i * (m_ + 1) + col] / p;
                if (f == 0.0) continue;
                for (std::size_t j = col; j <= m_; ++j)
                    mat[i * (m_ + 1) + j] -= f * mat[col * (m_ + 1) + j];
            }
        }
        z.assign(m_, 0.0);
        for (std::size_t ri = m_; ri-- > 0;) {
            double acc = mat[ri * (m_ + 1) + m_];
            for (std::size_t j = ri + 1; j < m_; ++j) acc -= mat[ri * (m_ + 1) + j] * z[j];
            z[ri] = acc / mat[ri * (m_ + 1) + ri];
        }
        // Guard against a refined point that is not actually a feasible
        // vertex (can happen if the pivoted basis is ill-conditioned).
        for (double v : z)
            if (!std::isfinite(v) || v < -1e-7) return false;
        return true;
    }

    void pivot_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_orig_) continue;
            for (std::size_t j = 0; j < n_orig_; ++j) {
                if (std::abs(at(i, j)) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    std::size_t m_, n_, n_orig_ = 0;
    std::vector<double> tableau_;
    std::vector<std::size_t> basis_;
    std::vector<double> a0_;
    std::vector<double> b0_;
};

Allocation solve_general(const std::vector<double>& prices, const FeasibleSpace& space) {
    const std::size_t h_count = space.horizon;
    const std::size_t n_risk = space.risk_enabled ? 1 : 0;
    StandardForm lp;
    lp.cols = h_count + n_risk + h_count;  // a, risk slack, cap slacks
    lp.rows = 1 + n_risk + h_count;
    lp.a.assign(lp.rows * lp.cols, 0.0);
    lp.b.assign(lp.rows, 0.0);
    lp.c.assign(lp.cols, 0.0);

    for (std::size_t j = 0; j < h_count; ++j) {
        lp.at(0, j) = 1.0;
        lp.c[j] = prices[j];
    }
    lp.b[0] = 1.0;
    if (space.risk_enabled) {
        for (std::size_t j = 0; j < h_count; ++j) lp.at(1, j) = space.risk[j];
        lp.at(1, h_count) = 1.0;
        lp.b[1] = space.threshold;
    }
    for (std::size_t i = 0; i < h_count; ++i) {
        lp.at(1 + n_risk + i, i) = 1.0;
        lp.at(1 + n_risk + i, h_count + n_risk + i) = 1.0;
        lp.b[1 + n_risk + i] = space.caps[i];
    }

    SimplexTableau tableau(lp);
    const auto result = tableau.solve(lp.c);
    if (result.status != LpStatus::Optimal)
        throw Infeasible("allocation LP infeasible under caps/risk constraints");

    Allocation a;
    a.weights.assign(result.x.begin(), result.x.begin() + static_cast<std::ptrdiff_t>(h_count));
    for (double& w : a.weights) w = std::max(0.0, w);
    return a;
}

}  // namespace

FeasibleSpace FeasibleSpace::simplex(std::size_t horizon) {
    FeasibleSpace space;
    space.horizon = horizon;
    space.caps.assign(horizon, 1.0);
    return space;
}

FeasibleSpace FeasibleSpace::with_risk(std::vector<double> risk, double threshold,
                                       std::vector<double> caps) {
    FeasibleSpace space;
    space.horizon = risk.size();
    space.caps = caps.empty() ? std::vector<double>(risk.size(), 1.0) : std::move(caps);
    if (space.caps.size() != space.horizon) throw ShapeMismatch("caps length != H");
    for (double v : risk)
        if (v < 0.0 || !std::isfinite(v)) throw InvalidSpec("risk entries must be finite and >= 0");
    space.risk = std::move(risk);
    space.threshold = threshold;
    space.risk_enabled = true;
    return space;
}

double Allocation::dot(const std::vector<double>& v) const {
    if (v.size() != weights.size()) throw ShapeMismatch("Allocation::dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += weights[i] * v[i];
    return acc;
}

Allocation solve_allocation(const std::vector<double>& prices, const FeasibleSpace& space) {
    check_prices(prices, space);
    if (space.horizon == 0) throw ShapeMismatch("solve_allocation: H = 0");
    double cap_sum = 0.0;
    for (double cap : space.caps) cap_sum += cap;
    if (cap_sum < 1.0 - kFeasTol) throw Infeasible("sum(caps) < 1: simplex empty");

    if (caps_are_unit(space)) return solve_unit_caps(prices, space);
    return solve_general(prices, space);
}

Allocation solve_allocation_simplex(const std::vector<double>& prices, const FeasibleSpace& space) {
    check_prices(prices, space);
    if (space.horizon == 0) throw ShapeMismatch("solve_allocation: H = 0");
    double cap_sum = 0.0;
    for (double cap : space.caps) cap_sum += cap;
    if (cap_sum < 1.0 - kFeasTol) throw Infeasible("sum(caps) < 1: simplex empty");
    return solve_general(prices, space);
}

namespace {

bool lattice_feasible(const std::vector<double>& a, const FeasibleSpace& space) {
    for (std::size_t h = 0; h < a.size(); ++h)
        if (a[h] > space.caps[h] + kFeasTol) return false;
    if (space.risk_enabled) {
        double risk = 0.0;
        for (std::size_t h = 0; h < a.size(); ++h) risk += a[h] * space.risk[h];
        if (risk > space.threshold + kFeasTol) return false;
    }
    return true;
}

void oracle_consider(OracleResult& best, const std::vector<double>& a,
                     const std::vector<double>& prices, const FeasibleSpace& space) {
    if (!lattice_feasible(a, space)) return;
    double cost = 0.0;
    for (std::size_t h = 0; h < a.size(); ++h) cost += a[h] * prices[h];
    if (!best.feasible || cost < best.cost) {
        best.feasible = true;
        best.cost = cost;
        best.allocation.weights = a;
    }
}

void full_lattice_scan(OracleResult& best, std::vector<double>& point, std::size_t dim,
                       std::size_t remaining, std::size_t grid,
                       const std::vector<double>& prices, const FeasibleSpace& space) {
    const std::size_t h_count = prices.size();
    if (dim + 1 == h_count) {
        point[dim] = static_cast<double>(remaining) / static_cast<double>(grid);
        oracle_consider(best, point, prices, space);
        return;
    }
    for (std::size_t t = 0; t <= remaining; ++t) {
        point[dim] = static_cast<double>(t) / static_cast<double>(grid);
        full_lattice_scan(best, point, dim + 1, remaining - t, grid, prices, space);
    }
}

}  // namespace

OracleResult brute_force_oracle(const std::vector<double>& prices, const FeasibleSpace& space,
                                std::size_t grid_steps) {
    check_prices(prices, space);
    const std::size_t h_count = space.horizon;
    OracleResult best;
    std::vector<double> point(h_count, 0.0);

    // Single-position vertices.
    for (std::size_t h = 0; h < h_count; ++h) {
        std::fill(point.begin(), point.end(), 0.0);
        point[h] = 1.0;
        oracle_consider(best, point, prices, space);
    }

    // Pairwise grid over (i, j) with a_i + a_j = 1.
    for (std::size_t i = 0; i < h_count; ++i) {
        for (std::size_t j = 0; j < h_count; ++j) {
            if (i == j) continue;
            for (std::size_t t = 1; t < grid_steps; ++t) {
                std::fill(point.begin(), point.end(), 0.0);
                point[i] = static_cast<double>(t) / static_cast<double>(grid_steps);
                point[j] = 1.0 - point[i];
                oracle_consider(best, point, prices, space);
            }
        }
    }

    // Exact tight-risk pair vertices.
    if (space.risk_enabled) {
        const auto& r = space.risk;
        for (std::size_t i = 0; i < h_count; ++i) {
            for (std::size_t j = i + 1; j < h_count; ++j) {
                if (std::abs(r[i] - r[j]) <= kFeasTol) continue;
                const double wi = (space.threshold - r[j]) / (r[i] - r[j]);
                if (wi < -kFeasTol || wi > 1.0 + kFeasTol) continue;
                std::fill(point.begin(), point.end(), 0.0);
                point[i] = std::clamp(wi, 0.0, 1.0);
                point[j] = 1.0 - point[i];
                oracle_consider(best, point, prices, space);
            }
        }
    }

    // Full lattice for capped spaces small enough to enumerate.
    if (!caps_are_unit(space)) {
        double combos = 1.0;
        for (std::size_t k = 1; k < h_count; ++k)
            combos *= static_cast<double>(grid_steps + k) / static_cast<double>(k);
        if (combos <= 3e6)
            full_lattice_scan(best, point, 0, grid_steps, grid_steps, prices, space);
    }
    return best;
}

}  // namespace rts
