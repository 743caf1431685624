#include "eco/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eco {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void RolloutSettings::validate() const {
    if (n_branches < 2) throw std::invalid_argument("rollout: need N >= 2 branches");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("rollout: epsilon must be in (0, 1)");
    if (guard_slack < 0.0)
        throw std::invalid_argument("rollout: guard slack must be >= 0");
}

std::vector<BranchCandidate> branch_allocations(double base, double delta,
                                                const RolloutSettings& settings) {
    settings.validate();
    const int n_count = settings.n_branches;
    std::vector<BranchCandidate> out(n_count);
    for (int n = 0; n < n_count; ++n) {
        const double coeff =
            1.0 - settings.epsilon + 2.0 * settings.epsilon * n / n_count;
        const double raw = base + delta * coeff;
        out[n].coefficient = coeff;
        out[n].clamped = raw < 0.0;
        out[n].allocation = std::max(raw, 0.0);
    }
    return out;
}

std::vector<double> project_levels(double level_tau, double candidate, int tau,
                                   const AllocationPlan& base,
                                   const EnergyProfile& profile,
                                   const BatteryConfig& cfg) {
    const int t_count = base.horizon();
    if (tau < 0 || tau >= t_count)
        throw std::out_of_range("project_levels: interval out of range");
    std::vector<double> levels(t_count - tau);
    double level = level_tau + cfg.eta * profile.expected[tau] - candidate;
    levels[0] = level;
    for (int t = tau + 1; t < t_count; ++t) {
        level += cfg.eta * profile.expected[t] - base.allocations[t];
        levels[t - tau] = level;
    }
    return levels;
}

double future_utility(const std::vector<double>& projected_levels, int tau,
                      const AllocationPlan& base, const BatteryConfig& cfg,
                      const UtilityFunction& u, const RolloutSettings& settings) {
    const double slack = settings.guard_slack;
    for (double lvl : projected_levels) {
        if (lvl < cfg.e_min - slack) return kNegInf;
        if (lvl > cfg.capacity + slack) return kNegInf;
    }
    if (projected_levels.back() < cfg.e_target - slack) return kNegInf;

    // booked value of the base policy: an idle interval contributes zero
    const int t_count = base.horizon();
    double sum = 0.0;
    double w = settings.discount_future ? std::pow(base.beta, tau + 1) : 1.0;
    for (int t = tau + 1; t < t_count; ++t) {
        if (base.allocations[t] > 0.0) sum += w * u.eval(base.allocations[t]);
        if (settings.discount_future) w *= base.beta;
    }
    return sum;
}

SelectionResult select_allocation(const std::vector<BranchCandidate>& candidates,
                                  const std::vector<double>& future_values,
                                  const std::vector<double>& immediate_utilities,
                                  BatteryState state, double expected_harvest,
                                  const BatteryConfig& cfg) {
    if (candidates.empty())
        throw std::invalid_argument("select_allocation: no candidates");
    if (candidates.size() != future_values.size() ||
        candidates.size() != immediate_utilities.size())
        throw std::invalid_argument("select_allocation: size mismatch");

    int best = -1;
    double best_score = kNegInf;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
        const double score = immediate_utilities[n] + future_values[n];
        if (score == kNegInf || std::isnan(score)) continue;
        if (best < 0 || score > best_score ||
            (score == best_score &&
             candidates[n].allocation < candidates[best].allocation)) {
            best = static_cast<int>(n);
            best_score = score;
        }
    }

    SelectionResult res;
    double chosen;
    if (best >= 0) {
        res.branch = best;
        chosen = candidates[best].allocation;
    } else {
        // every branch scored -inf; enforce the smallest candidate
        res.fallback = true;
        std::size_t smallest = 0;
        for (std::size_t n = 1; n < candidates.size(); ++n)
            if (candidates[n].allocation < candidates[smallest].allocation)
                smallest = n;
        chosen = candidates[smallest].allocation;
    }

    const EnforcementResult enforced =
        enforce_runtime_constraints(chosen, state, expected_harvest, cfg);
    res.allocation = enforced.allocation;
    res.useful = enforced.useful;
    res.sleep = enforced.sleep;
    res.enforcement = enforced.branch;
    return res;
}

AllocationPlan repair_base_plan(const AllocationPlan& plan,
                                const EnergyProfile& profile,
                                const BatteryConfig& cfg, double start_level) {
    AllocationPlan repaired = plan;
    const int t_count = plan.horizon();
    for (double& a : repaired.allocations) a = std::max(a, 0.0);

    // Entries raised by a capacity drain are pinned: rescaling them would
    // reopen the overflow they absorb.
    std::vector<bool> pinned(t_count, false);

    for (int round = 0; round < 16; ++round) {
        // Rescale the unpinned entries so the plan spends the whole budget,
        // no more, no less: the final projected level must land exactly on
        // the target. The branch guards rely on this (any slack lets
        // over-aggressive branches pass).
        double level = start_level;
        double unpinned_total = 0.0;
        for (int t = 0; t < t_count; ++t) {
            level += cfg.eta * profile.expected[t] - repaired.allocations[t];
            if (!pinned[t]) unpinned_total += repaired.allocations[t];
        }
        const double surplus = level - cfg.e_target;
        if (unpinned_total > 0.0) {
            const double scale =
                std::max(0.0, (unpinned_total + surplus) / unpinned_total);
            for (int t = 0; t < t_count; ++t)
                if (!pinned[t]) repaired.allocations[t] *= scale;
        } else if (surplus > 0.0) {
            for (int t = 0; t < t_count; ++t)
                if (!pinned[t]) repaired.allocations[t] = surplus / t_count;
        }

        // forward pass enforcing capacity and e_min under expected harvest
        bool touched = false;
        BatteryState state{start_level};
        for (int t = 0; t < t_count; ++t) {
            const EnforcementResult e = enforce_runtime_constraints(
                repaired.allocations[t], state, profile.expected[t], cfg);
            if (e.branch == EnforcementBranch::Overflow) pinned[t] = true;
            if (e.branch != EnforcementBranch::Interior) touched = true;
            repaired.allocations[t] = e.allocation;
            state = battery_step(state, profile.expected[t], e.allocation, cfg);
        }
        if (!touched && std::abs(surplus) <= 1e-12 * std::max(1.0, repaired.total()))
            break;
    }
    return repaired;
}

double booked_utility(double useful, const UtilityFunction& u, double beta, int t) {
    if (useful <= 0.0) return 0.0;
    return std::pow(beta, t) * u.eval(useful);
}

SelectionResult rollout_step(double base_allocation, double delta, BatteryState state,
                             double expected_harvest, int tau,
                             const AllocationPlan& base, const EnergyProfile& profile,
                             const BatteryConfig& cfg, const UtilityFunction& u,
                             const RolloutSettings& settings,
                             RolloutDecision* decision) {
    const std::vector<BranchCandidate> candidates =
        branch_allocations(base_allocation, delta, settings);

    std::vector<double> future(candidates.size());
    std::vector<double> immediate(candidates.size());
    int feasible = 0;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
        const std::vector<double> levels =
            project_levels(state.level, candidates[n].allocation, tau, base, profile, cfg);
        future[n] = future_utility(levels, tau, base, cfg, u, settings);
        // a zero candidate is a sleep interval and books zero utility
        immediate[n] =
            candidates[n].allocation > 0.0 ? u.eval(candidates[n].allocation) : 0.0;
        if (future[n] != kNegInf) ++feasible;
    }

    SelectionResult sel = select_allocation(candidates, future, immediate, state,
                                            expected_harvest, cfg);
    if (decision) {
        decision->interval = tau;
        decision->delta = delta;
        decision->branch = sel.branch;
        decision->coefficient = sel.branch >= 0 ? candidates[sel.branch].coefficient : 0.0;
        decision->candidate =
            sel.branch >= 0 ? candidates[sel.branch].allocation : 0.0;
        decision->committed = sel.allocation;
        decision->useful = sel.useful;
        decision->feasible_branches = feasible;
        decision->fallback = sel.fallback;
        decision->sleep = sel.sleep;
    }
    return sel;
}

EcoDayResult run_eco_day(const EnergyProfile& profile, const BatteryConfig& cfg,
                         double start_level, const UtilityFunction& u, double beta,
                         const SolverSettings& solver_settings,
                         const RolloutSettings& rollout_settings) {
    if (!profile.actual)
        throw std::invalid_argument("run_eco_day: profile needs actual harvest values");
    const int t_count = profile.horizon();
    const std::vector<double>& actual = *profile.actual;

    EcoDayResult res;

    // initial allocations from the relaxed iterative solve, once per day
    const SolveResult solved = solve_allocation(profile, cfg, start_level, u, beta,
                                                solver_settings.relaxed());
    res.base_infeasible = solved.infeasible;
    res.solve_iterations = solved.iterations;
    res.solve_converged = solved.converged;
    res.base = repair_base_plan(solved.plan, profile, cfg, start_level);
    res.base.beta = beta;

    res.realized.beta = beta;
    res.realized.allocations.reserve(t_count);
    res.useful.reserve(t_count);
    res.levels.reserve(t_count + 1);
    res.levels.push_back(start_level);

    BatteryState state{start_level};
    for (int tau = 0; tau < t_count; ++tau) {
        const double delta = res.ledger.cumulative(tau);
        RolloutDecision decision;
        const SelectionResult sel =
            rollout_step(res.base.allocations[tau], delta, state, profile.expected[tau],
                         tau, res.base, profile, cfg, u, rollout_settings, &decision);

        const StepOutcome step =
            battery_step_clipped(state, actual[tau], sel.allocation, cfg);
        state = step.state;
        res.overflow_total += step.overflow;

        res.realized.allocations.push_back(sel.allocation);
        res.useful.push_back(sel.useful);
        res.levels.push_back(state.level);
        res.total_utility += booked_utility(sel.useful, u, beta, tau);

        if (state.level < cfg.e_min - kViolationEps || sel.sleep)
            ++res.emin_violations;

        decision.level_after = state.level;
        res.decisions.push_back(decision);

        const double dh = cfg.eta * (actual[tau] - profile.expected[tau]);
        const double da = res.base.allocations[tau] - sel.allocation;
        res.ledger.record(dh, da);
    }
    res.target_met = state.level >= cfg.e_target - kViolationEps;
    return res;
}

} // namespace eco
