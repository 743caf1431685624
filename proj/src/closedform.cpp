#include "eco/closedform.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eco {

namespace {
double geometric_sum(double beta, int n) {
    // 1 + beta + ... + beta^(n-1)
    if (beta == 1.0) return static_cast<double>(n);
    return (1.0 - std::pow(beta, n)) / (1.0 - beta);
}
} // namespace

InitialAllocationResult initial_allocation(const EnergyProfile& profile,
                                           double start_level, double e_target,
                                           double beta, int t_count, double eta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("initial_allocation: beta must be in (0, 1]");
    if (profile.horizon() != t_count)
        throw std::invalid_argument("initial_allocation: profile/horizon mismatch");

    const double harvest_total =
        eta * std::accumulate(profile.expected.begin(), profile.expected.end(), 0.0);

    InitialAllocationResult res;
    res.budget = start_level - e_target + harvest_total;
    res.plan.beta = beta;
    if (res.budget <= 0.0) {
        res.feasible = false;
        res.plan.allocations.assign(t_count, 0.0);
        return res;
    }

    res.plan.allocations.resize(t_count);
    double a = res.budget / geometric_sum(beta, t_count);
    for (int t = 0; t < t_count; ++t) {
        res.plan.allocations[t] = a;
        a *= beta;
    }
    return res;
}

double correction_factor(double beta, int remaining) {
    if (remaining <= 0)
        throw std::invalid_argument("correction_factor: no remaining intervals");
    if (beta == 1.0) return 1.0 / remaining;
    return (1.0 - beta) / (1.0 - std::pow(beta, remaining));
}

double corrected_allocation(const AllocationPlan& initial,
                            const DeviationLedger& ledger, int t) {
    const int t_count = initial.horizon();
    if (t < 0 || t >= t_count)
        throw std::out_of_range("corrected_allocation: interval out of range");
    const double delta = ledger.cumulative(t);
    return initial.allocations[t] + delta * correction_factor(initial.beta, t_count - t);
}

EnforcementResult enforce_runtime_constraints(double candidate, BatteryState state,
                                              double harvested_expected,
                                              const BatteryConfig& cfg) {
    if (candidate < 0.0)
        throw std::invalid_argument("enforce_runtime_constraints: candidate must be >= 0");

    const double projected =
        state.level + cfg.eta * harvested_expected - candidate;

    EnforcementResult res;
    if (projected > cfg.capacity) {
        // drain the excess so the level lands exactly at capacity; only the
        // candidate portion earns utility
        res.allocation = candidate + (projected - cfg.capacity);
        res.useful = candidate;
        res.branch = EnforcementBranch::Overflow;
    } else if (projected < cfg.e_min) {
        const double floor_alloc = state.level + cfg.eta * harvested_expected - cfg.e_min;
        res.branch = EnforcementBranch::Floor;
        if (floor_alloc <= 0.0) {
            res.allocation = 0.0;
            res.useful = 0.0;
            res.sleep = true;
        } else {
            res.allocation = floor_alloc;
            res.useful = floor_alloc;
        }
    } else {
        res.allocation = candidate;
        res.useful = candidate;
    }
    return res;
}

double lemma1_oracle(const EnergyProfile& profile, double start_level,
                     double e_target, double beta,
                     const std::vector<HistoryEntry>& history, double eta) {
    const int t_count = profile.horizon();
    const int tau = static_cast<int>(history.size());
    if (tau >= t_count)
        throw std::invalid_argument("lemma1_oracle: history covers the whole horizon");

    double level = start_level;
    for (const auto& h : history)
        level += eta * h.actual_harvest - h.committed_allocation;

    double remaining_harvest = 0.0;
    for (int t = tau; t < t_count; ++t) remaining_harvest += eta * profile.expected[t];

    return (level - e_target + remaining_harvest) / geometric_sum(beta, t_count - tau);
}

} // namespace eco
