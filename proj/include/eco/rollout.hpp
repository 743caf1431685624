#pragma once

#include <cstdint>
#include <vector>

#include "eco/closedform.hpp"
#include "eco/core.hpp"
#include "eco/solver.hpp"
#include "eco/utility.hpp"

namespace eco {

struct RolloutSettings {
    int n_branches = 20;          // N
    double epsilon = 0.2;         // coefficient spread around 1
    bool discount_future = true;  // weight future utility by beta^t
    // Feasibility slack [J] for the projection guards; absorbs float noise
    // at active constraints without hiding real violations.
    double guard_slack = 1e-6;

    void validate() const;
};

struct BranchCandidate {
    double allocation = 0.0;  // >= 0
    double coefficient = 0.0; // 1 - eps + 2*eps*n/N
    bool clamped = false;     // raw value was negative
};

// Candidate re-allocations for the current interval: the base allocation
// plus the cumulative deviation scaled by a linearly increasing coefficient.
std::vector<BranchCandidate> branch_allocations(double base, double delta,
                                                const RolloutSettings& settings);

// Projected levels when `candidate` is spent now and the base plan is
// followed afterwards, all under expected harvest. Entry i is the level
// after interval tau + i; the last entry is the end-of-horizon level.
std::vector<double> project_levels(double level_tau, double candidate, int tau,
                                   const AllocationPlan& base,
                                   const EnergyProfile& profile,
                                   const BatteryConfig& cfg);

// Base-policy utility over intervals tau+1 .. T-1, or -inf when the
// projected trajectory leaves [e_min, capacity] or misses the final target.
double future_utility(const std::vector<double>& projected_levels, int tau,
                      const AllocationPlan& base, const BatteryConfig& cfg,
                      const UtilityFunction& u, const RolloutSettings& settings);

struct SelectionResult {
    double allocation = 0.0;  // committed drain
    double useful = 0.0;      // utility-earning portion
    int branch = -1;          // chosen candidate index, -1 on fallback
    bool fallback = false;    // every branch scored -inf
    bool sleep = false;
    EnforcementBranch enforcement = EnforcementBranch::Interior;
};

// Picks the highest-scoring branch (immediate + future utility; ties go to
// the smaller allocation) and passes it through runtime enforcement. When
// every branch scores -inf the smallest candidate is enforced instead; a
// non-positive floor result puts the device to sleep for the interval.
SelectionResult select_allocation(const std::vector<BranchCandidate>& candidates,
                                  const std::vector<double>& future_values,
                                  const std::vector<double>& immediate_utilities,
                                  BatteryState state, double expected_harvest,
                                  const BatteryConfig& cfg);

// Makes a solver plan usable as a rollout base policy: clamps negatives,
// trims any overspend so the final projected level reaches e_target, and
// walks the horizon once enforcing capacity/e_min under expected harvest.
AllocationPlan repair_base_plan(const AllocationPlan& plan,
                                const EnergyProfile& profile,
                                const BatteryConfig& cfg, double start_level);

struct RolloutDecision {
    int interval = 0;
    double delta = 0.0;       // cumulative deviation entering the interval
    int branch = -1;
    double coefficient = 0.0;
    double candidate = 0.0;
    double committed = 0.0;   // total drain
    double useful = 0.0;
    double level_after = 0.0; // realized level (actual harvest)
    int feasible_branches = 0;
    bool fallback = false;
    bool sleep = false;
};

struct EcoDayResult {
    AllocationPlan base;            // repaired initial plan
    AllocationPlan realized;        // committed drains
    std::vector<double> useful;     // utility-earning portions
    std::vector<double> levels;     // realized levels, size T+1
    std::vector<RolloutDecision> decisions;
    DeviationLedger ledger;
    double total_utility = 0.0;     // discounted, sleep intervals book 0
    double overflow_total = 0.0;    // harvest lost to capacity clipping
    int emin_violations = 0;        // realized level below e_min, or forced sleep
    bool target_met = false;
    bool base_infeasible = false;   // initial solve reported infeasibility
    long solve_iterations = 0;
    bool solve_converged = false;
};

// One interval of the rollout phase: branch generation, scoring against the
// base policy, and selection. Exposed separately so the per-interval cost
// can be measured in isolation.
SelectionResult rollout_step(double base_allocation, double delta, BatteryState state,
                             double expected_harvest, int tau,
                             const AllocationPlan& base, const EnergyProfile& profile,
                             const BatteryConfig& cfg, const UtilityFunction& u,
                             const RolloutSettings& settings,
                             RolloutDecision* decision = nullptr);

// Full ECO day: one relaxed iterative solve for the base plan, then per
// interval deviation tracking, rollout, and commitment against the actual
// harvest.
EcoDayResult run_eco_day(const EnergyProfile& profile, const BatteryConfig& cfg,
                         double start_level, const UtilityFunction& u, double beta,
                         const SolverSettings& solver_settings,
                         const RolloutSettings& rollout_settings);

// Booked utility of one interval: sleep (zero useful energy) contributes 0.
double booked_utility(double useful, const UtilityFunction& u, double beta, int t);

} // namespace eco
