#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eco/core.hpp"
#include "eco/utility.hpp"

namespace eco {

struct SolverSettings {
    double tolerance = 1e-6;
    double step_size = 1e-3;
    double relaxed_tolerance = 1e-3;
    double relaxed_step = 5e-3;
    long max_iters = 2'000'000;
    std::uint64_t rng_seed = 1;

    SolverSettings relaxed() const {
        SolverSettings s = *this;
        s.tolerance = relaxed_tolerance;
        s.step_size = relaxed_step;
        return s;
    }
    void validate() const;
};

// Lagrange multipliers of the two constraint sets: lambda_lo for the
// lower-bound rows (e_min / e_target), lambda_hi for the capacity rows.
// Projection keeps every entry >= 0.
struct DualState {
    std::vector<double> lambda_lo;
    std::vector<double> lambda_hi;
};

struct ConvergenceSample {
    long iteration = 0;
    double dual_change = 0.0;
    double objective = 0.0;
};

struct SolveResult {
    AllocationPlan plan;
    DualState duals;
    long iterations = 0;
    bool converged = false;
    bool infeasible = false;        // even a zero allocation violates bounds
    std::string infeasibility_note;
    double step_used = 0.0;         // final step after any stability downshifts
    int step_retries = 0;
    std::vector<ConvergenceSample> trace; // filled when record_trace is set
};

// Gradient-projection solve of the horizon allocation problem:
//   maximize sum_t beta^t u(a_t)
//   s.t. every post-interval level in [e_min, capacity], final >= e_target.
// Primal recovered each iteration via the inverse marginal utility of the
// suffix-summed duals; duals updated along the constraint residuals and
// projected onto >= 0. `warm_start` seeds the duals from a previous solve
// (same fixed point, fewer iterations); otherwise initialization is random
// from rng_seed.
SolveResult solve_allocation(const EnergyProfile& profile, const BatteryConfig& cfg,
                             double start_level, const UtilityFunction& u,
                             double beta, const SolverSettings& settings,
                             const DualState* warm_start = nullptr,
                             bool record_trace = false);

struct KktReport {
    double stationarity = 0.0;        // ||grad - (l_lo - l_hi)^T L||_inf
    double comp_slack_lo = 0.0;       // |lambda_lo . residual_lo|
    double comp_slack_hi = 0.0;
    double primal_violation = 0.0;    // largest constraint violation [J]
    double max_dual = 0.0;
};

KktReport kkt_residuals(const AllocationPlan& plan, const DualState& duals,
                        const EnergyProfile& profile, const BatteryConfig& cfg,
                        double start_level, const UtilityFunction& u, double beta);

double total_discounted_utility(const std::vector<double>& allocations,
                                const UtilityFunction& u, double beta);

} // namespace eco
