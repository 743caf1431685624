#include "eco/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eco/rng.hpp"

namespace eco {

void SolverSettings::validate() const {
    if (tolerance <= 0.0 || relaxed_tolerance <= 0.0)
        throw std::invalid_argument("solver: tolerance must be > 0");
    if (step_size <= 0.0 || relaxed_step <= 0.0)
        throw std::invalid_argument("solver: step size must be > 0");
    if (max_iters <= 0)
        throw std::invalid_argument("solver: max_iters must be > 0");
}

double total_discounted_utility(const std::vector<double>& allocations,
                                const UtilityFunction& u, double beta) {
    double sum = 0.0;
    double w = 1.0;
    for (double a : allocations) {
        sum += w * u.eval(a);
        w *= beta;
    }
    return sum;
}

namespace {

// Stacked harvest vector of the matrix formulation: the first entry carries
// the initial battery energy in addition to the first interval's harvest.
std::vector<double> stacked_harvest(const EnergyProfile& profile,
                                    const BatteryConfig& cfg, double start_level) {
    std::vector<double> h(profile.expected.size());
    for (std::size_t t = 0; t < h.size(); ++t) h[t] = cfg.eta * profile.expected[t];
    h[0] += start_level;
    return h;
}

std::vector<double> lower_bounds(const BatteryConfig& cfg, int t_count) {
    std::vector<double> b(t_count, cfg.e_min);
    b[t_count - 1] = cfg.e_target;
    return b;
}

} // namespace

SolveResult solve_allocation(const EnergyProfile& profile, const BatteryConfig& cfg,
                             double start_level, const UtilityFunction& u,
                             double beta, const SolverSettings& settings,
                             const DualState* warm_start, bool record_trace) {
    settings.validate();
    const int t_count = profile.horizon();
    if (t_count < 1) throw std::invalid_argument("solver: empty profile");

    SolveResult res;
    res.plan.beta = beta;
    res.plan.allocations.assign(t_count, 0.0);

    const std::vector<double> h_bar = stacked_harvest(profile, cfg, start_level);
    const std::vector<double> b_lower = lower_bounds(cfg, t_count);

    // An instance is infeasible when even the zero allocation (the most
    // conservative plan) breaks a lower-bound row.
    {
        const std::vector<double> zero_levels = prefix_sums(h_bar);
        for (int t = 0; t < t_count; ++t) {
            if (zero_levels[t] < b_lower[t]) {
                res.infeasible = true;
                res.infeasibility_note =
                    "zero allocation violates lower bound at interval " + std::to_string(t);
                return res;
            }
        }
    }

    // No feasible single-interval allocation can exceed the total energy
    // available over the horizon; a tighter inversion bracket keeps dual
    // transients from amplifying through the clamped inverse.
    double budget = 0.0;
    for (double h : h_bar) budget += h;
    const double bracket_hi =
        std::min(cfg.capacity * 10.0, std::max(budget, u.min_energy() * 1e-2));
    const double alloc_floor = u.min_energy() * 1e-6;

    std::vector<double> lam_lo_init(t_count), lam_hi_init(t_count);
    std::vector<double> rand_alloc(t_count, 0.0);
    if (warm_start) {
        if (static_cast<int>(warm_start->lambda_lo.size()) != t_count ||
            static_cast<int>(warm_start->lambda_hi.size()) != t_count)
            throw std::invalid_argument("solver: warm start horizon mismatch");
        lam_lo_init = warm_start->lambda_lo;
        lam_hi_init = warm_start->lambda_hi;
    } else {
        Rng rng(settings.rng_seed);
        for (int t = 0; t < t_count; ++t)
            rand_alloc[t] = rng.uniform_pos(cfg.capacity / t_count);
        for (int t = 0; t < t_count; ++t) lam_lo_init[t] = rng.uniform_pos(1.0);
        for (int t = 0; t < t_count; ++t) lam_hi_init[t] = rng.uniform_pos(1.0);
    }
    res.plan.allocations = rand_alloc;

    std::vector<double> beta_pow(t_count);
    {
        double w = 1.0;
        for (int t = 0; t < t_count; ++t) {
            beta_pow[t] = w;
            w *= beta;
        }
    }

    // The configured step is stable for modest allocation magnitudes but can
    // drive the dual iteration into a limit cycle when allocations are large
    // (its stability ceiling scales with 1 / a^2). Non-converging attempts
    // restart with the step and tolerance scaled down together, which
    // preserves the terminal residual quality of the configured pair.
    constexpr int kMaxAttempts = 6;
    constexpr long kAttemptIters = 40'000;

    std::vector<double> lam_lo(t_count), lam_hi(t_count);
    std::vector<double> dual_diff(t_count), alloc(t_count), levels(t_count);
    long iter_total = 0;
    bool converged = false;
    const long trace_stride = 64;

    for (int attempt = 0; attempt < kMaxAttempts && !converged; ++attempt) {
        const double shrink = std::pow(0.25, attempt);
        const double step = settings.step_size * shrink;
        const double tol = settings.tolerance * shrink;
        const long cap = std::min<long>(kAttemptIters, settings.max_iters);
        if (attempt > 0) res.step_retries = attempt;

        lam_lo = lam_lo_init;
        lam_hi = lam_hi_init;
        res.step_used = step;

        long iter = 0;
        while (iter < cap && iter_total < settings.max_iters) {
            ++iter;
            ++iter_total;

            // primal recovery: a_t = grad^-1((lambda_lo - lambda_hi)^T L / beta^t)
            for (int t = 0; t < t_count; ++t) dual_diff[t] = lam_lo[t] - lam_hi[t];
            const std::vector<double> g = suffix_sums(dual_diff);
            for (int t = 0; t < t_count; ++t) {
                const double e = u.inv_grad(g[t] / beta_pow[t], bracket_hi).energy;
                alloc[t] = std::max(e, alloc_floor);
            }

            // constraint residuals (levels = L(h - a))
            double run = 0.0;
            for (int t = 0; t < t_count; ++t) {
                run += h_bar[t] - alloc[t];
                levels[t] = run;
            }

            double change = 0.0;
            for (int t = 0; t < t_count; ++t) {
                const double next_lo =
                    std::max(lam_lo[t] + step * (b_lower[t] - levels[t]), 0.0);
                const double next_hi =
                    std::max(lam_hi[t] + step * (levels[t] - cfg.capacity), 0.0);
                change = std::max({change, std::abs(next_lo - lam_lo[t]),
                                   std::abs(next_hi - lam_hi[t])});
                lam_lo[t] = next_lo;
                lam_hi[t] = next_hi;
            }

            if (record_trace && (iter % trace_stride == 1 || change <= tol)) {
                res.trace.push_back(
                    {iter_total, change, total_discounted_utility(alloc, u, beta)});
            }
            if (change <= tol) {
                converged = true;
                break;
            }
        }
    }
    long iter = iter_total;

    // Final primal from the converged duals. Entries pinned at the inversion
    // bracket floor mean "the demanded marginal utility is unattainably
    // high": the optimal allocation there is no allocation at all.
    for (int t = 0; t < t_count; ++t) dual_diff[t] = lam_lo[t] - lam_hi[t];
    const std::vector<double> g = suffix_sums(dual_diff);
    const double dust = u.min_energy() * 1e-3 * (1.0 + 1e-9);
    for (int t = 0; t < t_count; ++t) {
        const double e = u.inv_grad(g[t] / beta_pow[t], bracket_hi).energy;
        res.plan.allocations[t] = e <= dust ? 0.0 : std::max(e, alloc_floor);
    }
    res.duals = DualState{std::move(lam_lo), std::move(lam_hi)};
    res.iterations = iter;
    res.converged = converged;
    return res;
}

KktReport kkt_residuals(const AllocationPlan& plan, const DualState& duals,
                        const EnergyProfile& profile, const BatteryConfig& cfg,
                        double start_level, const UtilityFunction& u, double beta) {
    const int t_count = plan.horizon();
    if (profile.horizon() != t_count ||
        static_cast<int>(duals.lambda_lo.size()) != t_count)
        throw std::invalid_argument("kkt: dimension mismatch");

    const std::vector<double> h_bar = stacked_harvest(profile, cfg, start_level);
    const std::vector<double> b_lower = lower_bounds(cfg, t_count);

    std::vector<double> diff(t_count);
    for (int t = 0; t < t_count; ++t) diff[t] = duals.lambda_lo[t] - duals.lambda_hi[t];
    const std::vector<double> g = suffix_sums(diff);

    KktReport rep;
    double w = 1.0;
    for (int t = 0; t < t_count; ++t) {
        // zero allocations sit on the a >= 0 boundary; the gradient row does
        // not apply there
        if (plan.allocations[t] > 0.0) {
            const double grad_t = w * u.grad(plan.allocations[t]);
            rep.stationarity = std::max(rep.stationarity, std::abs(grad_t - g[t]));
        }
        rep.max_dual = std::max({rep.max_dual, duals.lambda_lo[t], duals.lambda_hi[t]});
        w *= beta;
    }

    double run = 0.0;
    double slack_lo = 0.0, slack_hi = 0.0;
    for (int t = 0; t < t_count; ++t) {
        run += h_bar[t] - plan.allocations[t];
        slack_lo += duals.lambda_lo[t] * (run - b_lower[t]);
        slack_hi += duals.lambda_hi[t] * (cfg.capacity - run);
        rep.primal_violation = std::max({rep.primal_violation, b_lower[t] - run,
                                         run - cfg.capacity});
    }
    rep.comp_slack_lo = std::abs(slack_lo);
    rep.comp_slack_hi = std::abs(slack_hi);
    rep.primal_violation = std::max(rep.primal_violation, 0.0);
    return rep;
}

} // namespace eco
