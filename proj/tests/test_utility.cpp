#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "eco/rng.hpp"
#include "eco/utility.hpp"

using namespace eco;

namespace {
UtilityFunction sample_tabulated() {
    // concave, strictly increasing accuracy-style table
    return UtilityFunction::tabulated(
        {{1.0, 50.0}, {2.0, 62.0}, {4.0, 72.0}, {6.0, 78.0}, {9.0, 82.0}}, 1.0);
}

double central_diff(const UtilityFunction& u, double e, double h) {
    return (u.eval(e + h) - u.eval(e - h)) / (2.0 * h);
}
} // namespace

TEST_CASE("logarithmic eval/grad/inv_grad") {
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    CHECK(u.eval(1.08) == doctest::Approx(0.0));
    CHECK(u.grad(2.0) == doctest::Approx(0.5));
    CHECK(u.inv_grad(0.5, 1e6).energy == doctest::Approx(2.0));
    CHECK(u.eval(0.0) == -std::numeric_limits<double>::infinity());
    CHECK(u.eval(0.5) < 0.0); // below M_E the log goes negative
    CHECK_THROWS_AS(u.grad(0.0), std::domain_error);
}

TEST_CASE("power law eval/grad/inv_grad") {
    const UtilityFunction u = UtilityFunction::power_law(1.0, 0.5, 0.0, 1.0);
    CHECK(u.eval(4.0) == doctest::Approx(2.0));
    CHECK(u.eval(0.5) == doctest::Approx(0.0)); // below M_E accuracy is zero
    CHECK(u.grad(4.0) == doctest::Approx(0.25));
    CHECK(u.inv_grad(0.25, 1e4).energy == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("tabulated eval interpolates, flat outside") {
    const UtilityFunction u = sample_tabulated();
    CHECK(u.eval(2.0) == doctest::Approx(62.0)); // knot value
    CHECK(u.eval(3.0) == doctest::Approx(67.0)); // midpoint of 62..72
    CHECK(u.eval(0.5) == doctest::Approx(0.0));
    CHECK(u.eval(20.0) == doctest::Approx(82.0));
}

TEST_CASE("gradients match central finite differences") {
    const UtilityFunction log_u = UtilityFunction::logarithmic(1.3, 0.8, 1.08);
    const UtilityFunction pow_u = UtilityFunction::power_law(2.0, 0.4, 5.0, 1.0);
    const UtilityFunction tab_u = sample_tabulated();
    for (const UtilityFunction* u : {&log_u, &pow_u, &tab_u}) {
        const double g = u->grad(3.0);
        const double fd = central_diff(*u, 3.0, 1e-5);
        CHECK(g == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("tabulated gradient uses the left slope at knots") {
    const UtilityFunction u = sample_tabulated();
    CHECK(u.grad(2.0) == doctest::Approx(12.0));      // slope of [1,2]
    CHECK(u.grad(2.0 + 1e-12) == doctest::Approx(5.0)); // slope of [2,4]
}

TEST_CASE("inv_grad round trip") {
    Rng rng(2024);
    const UtilityFunction log_u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    const UtilityFunction pow_u = UtilityFunction::power_law(1.5, 0.45, 2.0, 1.0);
    for (const UtilityFunction* u : {&log_u, &pow_u}) {
        for (int i = 0; i < 100; ++i) {
            const double e = u->min_energy() + rng.uniform01() * (160.0 - u->min_energy());
            const auto inv = u->inv_grad(u->grad(e), 1600.0);
            CHECK_FALSE(inv.clamped);
            CHECK(inv.energy == doctest::Approx(e).epsilon(1e-8));
        }
    }
}

TEST_CASE("inv_grad clamps out-of-range targets and flags them") {
    const UtilityFunction u = UtilityFunction::logarithmic(1.0, 1.0, 1.0);
    const auto hi = u.inv_grad(1e-12, 100.0); // demanded marginal too small
    CHECK(hi.clamped);
    CHECK(hi.energy == doctest::Approx(100.0));
    const auto lo = u.inv_grad(1e9, 100.0);
    CHECK(lo.clamped);
    CHECK(lo.energy == doctest::Approx(1e-3));

    const UtilityFunction tab = sample_tabulated();
    const auto sat = tab.inv_grad(1e-9, 100.0); // beyond the last slope
    CHECK(sat.clamped);
    CHECK(sat.energy == doctest::Approx(9.0));
}

TEST_CASE("tabulated inv_grad resolves ties to the smallest energy") {
    const UtilityFunction u = sample_tabulated();
    CHECK(u.inv_grad(5.0, 100.0).energy == doctest::Approx(2.0)); // start of the g=5 segment
    CHECK(u.inv_grad(4.0, 100.0).energy == doctest::Approx(4.0)); // between slopes 5 and 3
}

TEST_CASE("monotone over random valid parameter draws") {
    Rng rng(11);
    for (int rep = 0; rep < 40; ++rep) {
        const double me = 0.5 + rng.uniform01() * 2.0;
        UtilityFunction u =
            rep % 2 == 0
                ? UtilityFunction::logarithmic(0.1 + 2.0 * rng.uniform01(),
                                               0.1 + 2.0 * rng.uniform01(), me)
                : UtilityFunction::power_law(0.5 + 2.0 * rng.uniform01(),
                                             0.1 + 0.8 * rng.uniform01(),
                                             5.0 * rng.uniform01(), me);
        double prev = u.eval(me * 0.25);
        for (double e = me * 0.5; e < 50.0; e += 0.7) {
            const double v = u.eval(e);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("concavity above M_E: midpoint beats the chord") {
    Rng rng(12);
    const UtilityFunction log_u = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    const UtilityFunction pow_u = UtilityFunction::power_law(3.0, 0.6, 1.0, 1.0);
    for (const UtilityFunction* u : {&log_u, &pow_u}) {
        for (int i = 0; i < 200; ++i) {
            const double a = u->min_energy() + 50.0 * rng.uniform01();
            const double b = u->min_energy() + 50.0 * rng.uniform01();
            const double mid = u->eval(0.5 * (a + b));
            CHECK(mid >= 0.5 * (u->eval(a) + u->eval(b)) - 1e-9);
        }
    }
}

TEST_CASE("construction rejects bad parameters") {
    CHECK_THROWS_AS(UtilityFunction::logarithmic(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::logarithmic(-1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::power_law(1.0, 1.5, 0.0, 1.0),
                    std::invalid_argument); // convex for b > 1
    CHECK_THROWS_AS(UtilityFunction::tabulated({{1.0, 2.0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::tabulated({{2.0, 2.0}, {1.0, 3.0}}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::tabulated({{1.0, 3.0}, {2.0, 2.0}}, 1.0),
                    std::invalid_argument);
}
