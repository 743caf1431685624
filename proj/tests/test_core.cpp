#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eco/core.hpp"
#include "eco/rng.hpp"

using namespace eco;

namespace {
BatteryConfig table2() {
    BatteryConfig cfg;
    cfg.capacity = 160.0;
    cfg.e_min = 10.0;
    cfg.e_target = 16.0;
    cfg.eta = 1.0;
    return cfg;
}
} // namespace

TEST_CASE("battery_step arithmetic") {
    BatteryConfig cfg = table2();
    CHECK(battery_step({50.0}, 5.0, 3.0, cfg).level == doctest::Approx(52.0));
    CHECK(battery_step({16.0}, 0.0, 0.0, cfg).level == doctest::Approx(16.0));
    cfg.eta = 0.8;
    CHECK(battery_step({16.0}, 10.0, 2.0, cfg).level == doctest::Approx(22.0));
}

TEST_CASE("battery_step does not clamp; clipped step reports overflow") {
    const BatteryConfig cfg = table2();
    CHECK(battery_step({10.0}, 0.0, 20.0, cfg).level == doctest::Approx(-10.0));
    const StepOutcome out = battery_step_clipped({155.0}, 10.0, 1.0, cfg);
    CHECK(out.state.level == doctest::Approx(160.0));
    CHECK(out.overflow == doctest::Approx(4.0));
}

TEST_CASE("lower triangular ones matrix") {
    CHECK(lower_triangular_ones(1) == std::vector<std::vector<double>>{{1.0}});
    const auto l3 = lower_triangular_ones(3);
    CHECK(l3 == std::vector<std::vector<double>>{
                    {1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}});

    // L x computes prefix sums
    const std::vector<double> x{1.0, 1.0, 1.0};
    std::vector<double> lx(3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) lx[i] += l3[i][j] * x[j];
    CHECK(lx == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(prefix_sums(x) == lx);
}

TEST_CASE("suffix sums act as row-vector times L") {
    const std::vector<double> lam{0.5, 0.25, 1.0};
    const auto l3 = lower_triangular_ones(3);
    std::vector<double> row(3, 0.0);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) row[j] += lam[i] * l3[i][j];
    const auto s = suffix_sums(lam);
    for (int j = 0; j < 3; ++j) CHECK(s[j] == doctest::Approx(row[j]));
}

TEST_CASE("check_feasibility basics") {
    const BatteryConfig cfg = table2();
    EnergyProfile profile;
    profile.expected.assign(24, 0.0);

    AllocationPlan zero;
    zero.allocations.assign(24, 0.0);
    const FeasibilityReport ok = check_feasibility(zero, profile, cfg, 16.0);
    CHECK(ok.feasible);
    CHECK(ok.final_target_met);

    AllocationPlan drain = zero;
    drain.allocations[0] = 10.0; // 16 - 10 = 6 < e_min
    const FeasibilityReport bad = check_feasibility(drain, profile, cfg, 16.0);
    CHECK_FALSE(bad.feasible);
    CHECK_FALSE(bad.within_bounds[0]);
}

TEST_CASE("check_feasibility: allocation equal to eta-scaled harvest meets the target") {
    BatteryConfig cfg = table2();
    cfg.eta = 0.9;
    Rng rng(42);
    EnergyProfile profile;
    AllocationPlan plan;
    for (int t = 0; t < 24; ++t) {
        const double h = 2.0 + 2.0 * rng.uniform01();
        profile.expected.push_back(h);
        plan.allocations.push_back(cfg.eta * h); // telescopes back to the start level
    }
    const FeasibilityReport rep = check_feasibility(plan, profile, cfg, 16.0);
    CHECK(rep.final_target_met);
    CHECK(rep.levels.back() == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("length mismatch is an error") {
    AllocationPlan plan;
    plan.allocations.assign(5, 1.0);
    EnergyProfile profile;
    profile.expected.assign(4, 1.0);
    CHECK_THROWS_AS(check_feasibility(plan, profile, table2(), 16.0),
                    std::invalid_argument);
}

TEST_CASE("telescoping: repeated steps equal the closed-form total") {
    BatteryConfig cfg = table2();
    cfg.eta = 0.87;
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const int t_count = 2 + int(rng.uniform01() * 30);
        double harvest_sum = 0.0, alloc_sum = 0.0;
        BatteryState state{30.0};
        for (int t = 0; t < t_count; ++t) {
            const double h = 5.0 * rng.uniform01();
            const double a = 3.0 * rng.uniform01();
            harvest_sum += h;
            alloc_sum += a;
            state = battery_step(state, h, a, cfg);
        }
        const double expected = 30.0 + cfg.eta * harvest_sum - alloc_sum;
        CHECK(state.level ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("prefix of (harvest - alloc) reproduces the level trajectory (eta = 1)") {
    const BatteryConfig cfg = table2();
    Rng rng(99);
    std::vector<double> h(24), a(24), diff(24);
    for (int t = 0; t < 24; ++t) {
        h[t] = 4.0 * rng.uniform01();
        a[t] = 2.0 * rng.uniform01();
        diff[t] = h[t] - a[t];
    }
    const std::vector<double> cum = prefix_sums(diff);
    BatteryState state{16.0};
    for (int t = 0; t < 24; ++t) {
        state = battery_step(state, h[t], a[t], cfg);
        CHECK(state.level - 16.0 == doctest::Approx(cum[t]).epsilon(1e-12));
    }
}

TEST_CASE("raising one allocation never fixes an e_min violation") {
    const BatteryConfig cfg = table2();
    Rng rng(5);
    int tested = 0;
    while (tested < 30) {
        EnergyProfile profile;
        AllocationPlan plan;
        for (int t = 0; t < 12; ++t) {
            profile.expected.push_back(2.0 * rng.uniform01());
            plan.allocations.push_back(3.0 * rng.uniform01());
        }
        const FeasibilityReport rep = check_feasibility(plan, profile, cfg, 14.0);
        bool emin_broken = false;
        for (std::size_t t = 0; t < rep.within_bounds.size(); ++t)
            if (rep.levels[t + 1] < cfg.e_min) emin_broken = true;
        if (!emin_broken) continue;
        ++tested;
        AllocationPlan bumped = plan;
        bumped.allocations[int(rng.uniform01() * 12)] += 1.0 + rng.uniform01();
        const FeasibilityReport rep2 = check_feasibility(bumped, profile, cfg, 14.0);
        bool still_broken = false;
        for (std::size_t t = 0; t < rep2.within_bounds.size(); ++t)
            if (rep2.levels[t + 1] < cfg.e_min) still_broken = true;
        CHECK(still_broken);
    }
}

TEST_CASE("deviation ledger prefix sums") {
    DeviationLedger ledger;
    ledger.record(1.0, -0.5);
    ledger.record(-2.0, 0.25);
    ledger.record(0.0, 0.0);
    CHECK(ledger.cumulative(0) == doctest::Approx(0.0));
    CHECK(ledger.cumulative(1) == doctest::Approx(0.5));
    CHECK(ledger.cumulative(2) == doctest::Approx(-1.25));
    CHECK(ledger.cumulative(3) == doctest::Approx(-1.25));
    CHECK_THROWS_AS(ledger.cumulative(4), std::out_of_range);
}

TEST_CASE("config validation") {
    BatteryConfig bad = table2();
    bad.e_min = 20.0; // e_min >= e_target
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = table2();
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    Horizon h;
    h.intervals = 1;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h = Horizon{};
    CHECK_NOTHROW(h.validate());

    EnergyProfile p;
    p.expected = {1.0, -0.5};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
