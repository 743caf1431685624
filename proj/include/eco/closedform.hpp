#pragma once

#include <vector>

#include "eco/core.hpp"

namespace eco {

// Closed-form allocator for the logarithmic utility with relaxed battery
// bounds: geometric initial allocations, analytic deviation correction, and
// greedy runtime enforcement of the bounds it relaxed.

struct InitialAllocationResult {
    AllocationPlan plan;
    bool feasible = true;   // false when the allocatable budget is <= 0
    double budget = 0.0;    // start - e_target + eta * sum(expected)
};

// First interval gets budget / sum(beta^t); each subsequent interval decays
// by beta. Harvest terms are scaled by eta before entering the budget.
InitialAllocationResult initial_allocation(const EnergyProfile& profile,
                                           double start_level, double e_target,
                                           double beta, int t_count,
                                           double eta = 1.0);

// Deviation correction: initial[t] + delta * (1 - beta) / (1 - beta^(T-t)),
// where delta is the cumulative deviation through interval t-1. beta = 1
// takes the analytic limit delta / (T - t).
double corrected_allocation(const AllocationPlan& initial,
                            const DeviationLedger& ledger, int t);

double correction_factor(double beta, int remaining);

enum class EnforcementBranch { Interior, Overflow, Floor };

struct EnforcementResult {
    double allocation = 0.0;  // energy drained from the battery
    double useful = 0.0;      // utility-earning portion (candidate-capped)
    EnforcementBranch branch = EnforcementBranch::Interior;
    bool sleep = false;       // floor branch produced a non-positive allocation
};

// Projects the next level under expected harvest and keeps it within
// [e_min, capacity]: interior candidates pass through, overflow forces the
// excess to be drained (without earning utility), and a floor hit allocates
// down to e_min exactly. A non-positive floor allocation means the device
// sleeps through the interval.
EnforcementResult enforce_runtime_constraints(double candidate, BatteryState state,
                                              double harvested_expected,
                                              const BatteryConfig& cfg);

// Independent check for the correction formula: re-derives the interval-tau
// allocation from scratch by re-applying the geometric rule to the realized
// battery level and the remaining expected harvest.
struct HistoryEntry {
    double actual_harvest = 0.0;
    double committed_allocation = 0.0;
};
double lemma1_oracle(const EnergyProfile& profile, double start_level,
                     double e_target, double beta,
                     const std::vector<HistoryEntry>& history, double eta = 1.0);

} // namespace eco
