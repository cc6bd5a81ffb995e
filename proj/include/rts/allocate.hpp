#pragma once

#include <cstddef>
#include <vector>

namespace rts {

/// Allocation constraint set: the simplex {0 <= a <= caps, sum a = 1},
/// optionally intersected with the risk halfspace {a . r <= r0}.
struct FeasibleSpace {
    std::size_t horizon = 0;
    std::vector<double> caps;   // in (0,1]^H, default all 1
    std::vector<double> risk;   // empty unless risk_enabled
    double threshold = 0.0;     // r0
    bool risk_enabled = false;

    static FeasibleSpace simplex(std::size_t horizon);
    static FeasibleSpace with_risk(std::vector<double> risk, double threshold,
                                   std::vector<double> caps = {});
};

struct Allocation {
    std::vector<double> weights;  // >= 0, sum = 1 within 1e-9

    double dot(const std::vector<double>& v) const;
};

/// Minimizes a . prices over the feasible space. Ties broken toward the
/// lexicographically smallest support. Throws Infeasible when the risk
/// halfspace excludes the entire capped simplex.
Allocation solve_allocation(const std::vector<double>& prices, const FeasibleSpace& space);

/// Same problem as solve_allocation but always routed through the dense
/// simplex engine, bypassing the closed-form unit-cap path. Exists so the
/// two engines can be cross-checked on identical inputs.
Allocation solve_allocation_simplex(const std::vector<double>& prices, const FeasibleSpace& space);

struct OracleResult {
    bool feasible = false;
    Allocation allocation;
    double cost = 0.0;
};

/// Independent optimum estimate for tests: simplex lattice scan (pairwise grid
/// for caps = 1, full lattice when small enough) plus exact vertex enumeration.
OracleResult brute_force_oracle(const std::vector<double>& prices, const FeasibleSpace& space,
                                std::size_t grid_steps);

}  // namespace rts
