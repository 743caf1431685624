#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eco/closedform.hpp"
#include "eco/rng.hpp"

using namespace eco;

namespace {
EnergyProfile flat_profile(int t_count, double value) {
    EnergyProfile p;
    p.expected.assign(t_count, value);
    return p;
}

double geo(double beta, int n) {
    return beta == 1.0 ? double(n) : (1.0 - std::pow(beta, n)) / (1.0 - beta);
}
} // namespace

TEST_CASE("initial allocation: beta = 1 splits the budget uniformly") {
    const auto res = initial_allocation(flat_profile(24, 2.0), 16.0, 16.0, 1.0, 24);
    REQUIRE(res.feasible);
    for (double a : res.plan.allocations) CHECK(a == doctest::Approx(2.0));
}

TEST_CASE("initial allocation: beta = 0.99 geometric series") {
    const auto res = initial_allocation(flat_profile(24, 2.0), 16.0, 16.0, 0.99, 24);
    REQUIRE(res.feasible);
    CHECK(res.budget == doctest::Approx(48.0));
    CHECK(res.plan.allocations[0] == doctest::Approx(48.0 / geo(0.99, 24)).epsilon(1e-12));
    CHECK(res.plan.allocations[0] == doctest::Approx(2.2396).epsilon(1e-4));
}

TEST_CASE("initial allocation forms a geometric sequence with ratio beta") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const double beta = 0.9 + 0.1 * rng.uniform01();
        EnergyProfile p;
        for (int t = 0; t < 24; ++t) p.expected.push_back(3.0 * rng.uniform01());
        const auto res = initial_allocation(p, 20.0, 16.0, beta, 24);
        REQUIRE(res.feasible);
        for (int t = 0; t + 1 < 24; ++t)
            CHECK(res.plan.allocations[t + 1] ==
                  doctest::Approx(beta * res.plan.allocations[t]).epsilon(1e-12));
    }
}

TEST_CASE("non-positive budget reports infeasibility") {
    const auto res = initial_allocation(flat_profile(24, 0.0), 16.0, 16.0, 0.99, 24);
    CHECK_FALSE(res.feasible);
    for (double a : res.plan.allocations) CHECK(a == 0.0);
}

TEST_CASE("correction: zero deviation leaves the allocation unchanged") {
    const auto init = initial_allocation(flat_profile(24, 2.0), 16.0, 16.0, 0.99, 24);
    DeviationLedger ledger;
    for (int t = 0; t < 5; ++t) ledger.record(0.0, 0.0);
    CHECK(corrected_allocation(init.plan, ledger, 5) ==
          doctest::Approx(init.plan.allocations[5]));
}

TEST_CASE("correction factor: analytic beta -> 1 limit and direct evaluation") {
    CHECK(correction_factor(1.0, 12) == doctest::Approx(1.0 / 12.0));
    // beta = 0.99, T = 24, t = 12: 0.01 / (1 - 0.99^12)
    CHECK(correction_factor(0.99, 12) == doctest::Approx(0.08801).epsilon(1e-4));
}

TEST_CASE("runtime enforcement branches") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;

    const auto interior = enforce_runtime_constraints(3.0, {50.0}, 5.0, cfg);
    CHECK(interior.branch == EnforcementBranch::Interior);
    CHECK(interior.allocation == doctest::Approx(3.0));
    CHECK(interior.useful == doctest::Approx(3.0));

    // projected 158 + 10 - 1 = 167 > 160: drain the 7 J excess
    const auto overflow = enforce_runtime_constraints(1.0, {158.0}, 10.0, cfg);
    CHECK(overflow.branch == EnforcementBranch::Overflow);
    CHECK(overflow.allocation == doctest::Approx(8.0));
    CHECK(overflow.useful == doctest::Approx(1.0)); // excess earns no utility

    // projected 11 + 1 - 5 = 7 < 10: allocate down to e_min exactly
    const auto floor = enforce_runtime_constraints(5.0, {11.0}, 1.0, cfg);
    CHECK(floor.branch == EnforcementBranch::Floor);
    CHECK(floor.allocation == doctest::Approx(2.0));
    CHECK_FALSE(floor.sleep);

    // 5 + 1 - 10 < 0: nothing to allocate, the device sleeps
    const auto sleep = enforce_runtime_constraints(5.0, {5.0}, 1.0, cfg);
    CHECK(sleep.branch == EnforcementBranch::Floor);
    CHECK(sleep.allocation == 0.0);
    CHECK(sleep.sleep);
}

TEST_CASE("enforcement keeps the projected level within bounds when possible") {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    Rng rng(17);
    for (int rep = 0; rep < 500; ++rep) {
        const double level = 5.0 + 170.0 * rng.uniform01();
        const double harvest = 12.0 * rng.uniform01();
        const double candidate = 12.0 * rng.uniform01();
        const auto res = enforce_runtime_constraints(candidate, {level}, harvest, cfg);
        const double projected = level + harvest - res.allocation;
        if (!res.sleep) {
            CHECK(projected >= cfg.e_min - 1e-9);
            CHECK(projected <= cfg.capacity + 1e-9);
        } else {
            CHECK(level + harvest < cfg.e_min);
        }
    }
}

TEST_CASE("lemma 1: correction equals the from-scratch re-derivation") {
    Rng rng(2025);
    for (double beta : {0.9, 0.95, 0.99}) {
        for (int rep = 0; rep < 120; ++rep) {
            EnergyProfile profile;
            for (int t = 0; t < 24; ++t) profile.expected.push_back(4.0 * rng.uniform01());
            const double start = 16.0, target = 16.0;
            const auto init = initial_allocation(profile, start, target, beta, 24);
            REQUIRE(init.feasible);

            DeviationLedger ledger;
            std::vector<HistoryEntry> history;
            const int tau = 1 + int(rng.uniform01() * 22);
            for (int t = 0; t < tau; ++t) {
                const double actual = profile.expected[t] + rng.normal(0.0, 0.8);
                const double committed =
                    std::max(0.0, init.plan.allocations[t] + rng.normal(0.0, 0.5));
                ledger.record(actual - profile.expected[t],
                              init.plan.allocations[t] - committed);
                history.push_back({actual, committed});
            }
            const double corrected = corrected_allocation(init.plan, ledger, tau);
            const double oracle = lemma1_oracle(profile, start, target, beta, history);
            CHECK(corrected ==
                  doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("lemma 1 oracle: zero deviations reduce to the initial plan") {
    EnergyProfile profile = flat_profile(24, 2.0);
    const auto init = initial_allocation(profile, 16.0, 16.0, 0.99, 24);
    std::vector<HistoryEntry> history;
    for (int t = 0; t < 6; ++t)
        history.push_back({profile.expected[t], init.plan.allocations[t]});
    CHECK(lemma1_oracle(profile, 16.0, 16.0, 0.99, history) ==
          doctest::Approx(init.plan.allocations[6]).epsilon(1e-12));
}

TEST_CASE("lemma 1 oracle: a harvest surplus raises the next allocation") {
    EnergyProfile profile = flat_profile(24, 2.0);
    const auto init = initial_allocation(profile, 16.0, 16.0, 0.99, 24);
    std::vector<HistoryEntry> history{{profile.expected[0] + 1.0, init.plan.allocations[0]}};
    CHECK(lemma1_oracle(profile, 16.0, 16.0, 0.99, history) > init.plan.allocations[1]);
}

TEST_CASE("corrections over the remaining horizon redistribute exactly delta") {
    for (double beta : {0.9, 0.99, 1.0}) {
        for (int tau : {0, 5, 20}) {
            const int t_count = 24;
            const double delta = 1.7;
            double sum = 0.0;
            for (int t = tau; t < t_count; ++t)
                sum += std::pow(beta, t - tau) * correction_factor(beta, t_count - tau) * delta;
            CHECK(sum == doctest::Approx(delta).epsilon(1e-12));
        }
    }
}
