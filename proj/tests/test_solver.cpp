#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "eco/closedform.hpp"
#include "eco/rng.hpp"
#include "eco/solver.hpp"

using namespace eco;

namespace {

BatteryConfig loose_bounds() {
    BatteryConfig cfg;
    cfg.capacity = 1e6;
    cfg.e_min = 0.0;
    cfg.e_target = 100.0;
    return cfg;
}

// Exhaustive search over allocations discretized at `grid` joules.
// Test-side oracle, independent of the solver path.
struct GridBest {
    double utility = -1e300;
    std::vector<double> allocations;
};
GridBest grid_search_t3(const EnergyProfile& profile, const BatteryConfig& cfg,
                        double start, const UtilityFunction& u, double beta,
                        double grid) {
    GridBest best;
    const double h0 = cfg.eta * profile.expected[0];
    const double h1 = cfg.eta * profile.expected[1];
    const double h2 = cfg.eta * profile.expected[2];
    const double max_budget = start + h0 + h1 + h2;
    const int n = static_cast<int>(max_budget / grid) + 1;
    for (int i = 0; i <= n; ++i) {
        const double a0 = i * grid;
        const double l1 = start + h0 - a0;
        if (l1 < cfg.e_min || l1 > cfg.capacity) continue;
        for (int j = 0; j <= n; ++j) {
            const double a1 = j * grid;
            const double l2 = l1 + h1 - a1;
            if (l2 < cfg.e_min) break;
            if (l2 > cfg.capacity) continue;
            for (int k = 0; k <= n; ++k) {
                const double a2 = k * grid;
                const double l3 = l2 + h2 - a2;
                if (l3 < cfg.e_target) break;
                if (l3 > cfg.capacity) continue;
                const double util = u.eval(a0) + beta * u.eval(a1) +
                                    beta * beta * u.eval(a2);
                if (util > best.utility) {
                    best.utility = util;
                    best.allocations = {a0, a1, a2};
                }
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("T=2 symmetric instance converges to the uniform optimum") {
    EnergyProfile profile;
    profile.expected = {10.0, 10.0};
    const BatteryConfig cfg = loose_bounds();
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    SolverSettings settings;
    settings.tolerance = 1e-8;
    settings.rng_seed = 3;

    const SolveResult res = solve_allocation(profile, cfg, 100.0, u, 1.0, settings);
    REQUIRE(res.converged);
    CHECK(res.plan.allocations[0] == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(res.plan.allocations[1] == doctest::Approx(10.0).epsilon(1e-4));
}

TEST_CASE("KKT residuals are small at convergence") {
    EnergyProfile profile;
    profile.expected = {10.0, 10.0};
    const BatteryConfig cfg = loose_bounds();
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    SolverSettings settings;
    settings.tolerance = 1e-8;
    settings.rng_seed = 3;

    const SolveResult res = solve_allocation(profile, cfg, 100.0, u, 1.0, settings);
    REQUIRE(res.converged);
    const KktReport kkt = kkt_residuals(res.plan, res.duals, profile, cfg, 100.0, u, 1.0);
    CHECK(kkt.stationarity < 1e-4);
    CHECK(kkt.comp_slack_lo < 1e-4);
    CHECK(kkt.comp_slack_hi < 1e-4);
    CHECK(kkt.primal_violation < 1e-4);
}

TEST_CASE("zero duals with an interior plan: stationarity equals the gradient norm") {
    EnergyProfile profile;
    profile.expected = {10.0, 10.0};
    const BatteryConfig cfg = loose_bounds();
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    AllocationPlan plan;
    plan.beta = 1.0;
    plan.allocations = {5.0, 4.0};
    DualState duals{{0.0, 0.0}, {0.0, 0.0}};
    const KktReport kkt = kkt_residuals(plan, duals, profile, cfg, 100.0, u, 1.0);
    CHECK(kkt.stationarity == doctest::Approx(std::max(u.grad(5.0), u.grad(4.0))));
}

TEST_CASE("infeasible plan reports a positive primal residual") {
    EnergyProfile profile;
    profile.expected = {1.0, 1.0};
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    AllocationPlan plan;
    plan.allocations = {10.0, 0.0}; // drains 16 + 1 - 10 = 7 < e_min
    DualState duals{{0.0, 0.0}, {0.0, 0.0}};
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    const KktReport kkt = kkt_residuals(plan, duals, profile, cfg, 16.0, u, 1.0);
    CHECK(kkt.primal_violation > 0.0);
}

TEST_CASE("T=3 instances match the exhaustive grid oracle") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    const double beta = 0.99;
    const double grid = 0.05;
    Rng rng(404);

    for (int rep = 0; rep < 5; ++rep) {
        EnergyProfile profile;
        for (int t = 0; t < 3; ++t) profile.expected.push_back(1.0 + 3.0 * rng.uniform01());
        SolverSettings settings;
        settings.rng_seed = rep + 1;
        const SolveResult res = solve_allocation(profile, cfg, 16.0, u, beta, settings);
        REQUIRE(res.converged);
        const double solver_util =
            total_discounted_utility(res.plan.allocations, u, beta);
        const GridBest best = grid_search_t3(profile, cfg, 16.0, u, beta, grid);
        REQUIRE(!best.allocations.empty());
        // one grid step of slack in utility terms
        double slack = 0.0;
        for (int t = 0; t < 3; ++t)
            slack += std::pow(beta, t) *
                     (u.eval(best.allocations[t] + grid) - u.eval(best.allocations[t]));
        CHECK(solver_util >= best.utility - slack);
        CHECK(solver_util <= best.utility + slack);
    }
}

TEST_CASE("T=24 with loose bounds reproduces the geometric closed form") {
    BatteryConfig cfg = loose_bounds();
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    const double beta = 0.99;
    Rng rng(7);
    EnergyProfile profile;
    for (int t = 0; t < 24; ++t) profile.expected.push_back(2.0 + 2.0 * rng.uniform01());

    SolverSettings settings;
    settings.rng_seed = 11;
    const SolveResult res = solve_allocation(profile, cfg, 16.0, u, beta, settings);
    REQUIRE(res.converged);
    const auto closed = initial_allocation(profile, 16.0, cfg.e_target, beta, 24);
    REQUIRE(closed.feasible);
    for (int t = 0; t < 24; ++t) {
        CHECK(res.plan.allocations[t] ==
              doctest::Approx(closed.plan.allocations[t]).epsilon(0.005));
    }
}

TEST_CASE("duals stay non-negative and results are deterministic") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    Rng rng(8);
    EnergyProfile profile;
    for (int t = 0; t < 24; ++t) profile.expected.push_back(3.0 * rng.uniform01());

    SolverSettings settings;
    settings.rng_seed = 21;
    const SolveResult a = solve_allocation(profile, cfg, 16.0, u, 0.99, settings);
    const SolveResult b = solve_allocation(profile, cfg, 16.0, u, 0.99, settings);
    REQUIRE(a.converged);
    for (double l : a.duals.lambda_lo) CHECK(l >= 0.0);
    for (double l : a.duals.lambda_hi) CHECK(l >= 0.0);
    CHECK(a.iterations == b.iterations);
    CHECK(std::memcmp(a.plan.allocations.data(), b.plan.allocations.data(),
                      a.plan.allocations.size() * sizeof(double)) == 0);
}

TEST_CASE("local optimality: no feasible perturbation improves the objective") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    Rng rng(31);
    EnergyProfile profile;
    for (int t = 0; t < 24; ++t) profile.expected.push_back(1.0 + 2.5 * rng.uniform01());

    SolverSettings settings;
    settings.tolerance = 1e-8;
    settings.rng_seed = 5;
    const SolveResult res = solve_allocation(profile, cfg, 16.0, u, 0.99, settings);
    REQUIRE(res.converged);
    const double opt = total_discounted_utility(res.plan.allocations, u, 0.99);

    int tried = 0;
    for (int rep = 0; rep < 5000 && tried < 1000; ++rep) {
        AllocationPlan candidate = res.plan;
        for (double& a : candidate.allocations)
            a = std::max(0.0, a + rng.normal(0.0, 0.02));
        const FeasibilityReport rep_f = check_feasibility(candidate, profile, cfg, 16.0);
        if (!rep_f.feasible) continue;
        ++tried;
        CHECK(total_discounted_utility(candidate.allocations, u, 0.99) <= opt + 1e-6);
    }
    CHECK(tried > 100);
}

TEST_CASE("infeasible instance and iteration cap are reported") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);

    EnergyProfile starving;
    starving.expected.assign(4, 0.0);
    const SolveResult bad = solve_allocation(starving, cfg, 8.0, u, 0.99, {});
    CHECK(bad.infeasible); // 8 J start is already below the 10 J reserve

    EnergyProfile fine;
    fine.expected.assign(4, 2.0);
    SolverSettings capped;
    capped.max_iters = 3;
    const SolveResult slow = solve_allocation(fine, cfg, 16.0, u, 0.99, capped);
    CHECK_FALSE(slow.converged);
    CHECK(slow.iterations == 3);
}

TEST_CASE("warm start reaches the same fixed point faster") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    Rng rng(77);
    EnergyProfile profile;
    for (int t = 0; t < 24; ++t) profile.expected.push_back(1.0 + 2.0 * rng.uniform01());

    SolverSettings settings;
    settings.rng_seed = 99;
    const SolveResult cold = solve_allocation(profile, cfg, 16.0, u, 0.99, settings);
    REQUIRE(cold.converged);
    const SolveResult warm =
        solve_allocation(profile, cfg, 16.0, u, 0.99, settings, &cold.duals);
    REQUIRE(warm.converged);
    CHECK(warm.iterations < cold.iterations);
    for (int t = 0; t < 24; ++t)
        CHECK(warm.plan.allocations[t] ==
              doctest::Approx(cold.plan.allocations[t]).epsilon(1e-3));
}
