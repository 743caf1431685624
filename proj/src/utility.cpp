#include "eco/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eco {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Marginal utility used for inversion. For PowerLaw this is the smooth
// extension a*b*e^(b-1) over the whole bracket, so bisection stays monotone
// even below min_energy.
double smooth_marginal_powerlaw(double a, double b, double e) {
    return a * b * std::pow(e, b - 1.0);
}
} // namespace

UtilityFunction UtilityFunction::logarithmic(double alpha, double gamma,
                                             double min_energy) {
    if (min_energy <= 0.0) throw std::invalid_argument("utility: M_E must be > 0");
    UtilityFunction u;
    u.family_ = Family::Logarithmic;
    u.min_energy_ = min_energy;
    u.p0_ = alpha;
    u.p1_ = gamma;
    u.validate_shape();
    return u;
}

UtilityFunction UtilityFunction::power_law(double a, double b, double c,
                                           double min_energy) {
    if (min_energy <= 0.0) throw std::invalid_argument("utility: M_E must be > 0");
    UtilityFunction u;
    u.family_ = Family::PowerLaw;
    u.min_energy_ = min_energy;
    u.p0_ = a;
    u.p1_ = b;
    u.p2_ = c;
    u.validate_shape();
    return u;
}

UtilityFunction UtilityFunction::tabulated(std::vector<std::pair<double, double>> points,
                                           double min_energy) {
    if (min_energy <= 0.0) throw std::invalid_argument("utility: M_E must be > 0");
    if (points.size() < 2)
        throw std::invalid_argument("utility: tabulated needs >= 2 points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].first <= points[i - 1].first)
            throw std::invalid_argument("utility: tabulated energies must be strictly increasing");
        if (points[i].second < points[i - 1].second)
            throw std::invalid_argument("utility: tabulated utilities must be non-decreasing");
    }
    UtilityFunction u;
    u.family_ = Family::Tabulated;
    u.min_energy_ = min_energy;
    u.points_ = std::move(points);
    return u;
}

void UtilityFunction::validate_shape() const {
    if (family_ == Family::Tabulated) return;
    // Sample-check strict increase and concavity above M_E.
    const double lo = min_energy_ * 1.0000001;
    const double hi = min_energy_ * 1000.0;
    double prev = eval(lo);
    double prev_e = lo;
    for (int i = 1; i <= 32; ++i) {
        const double e = lo * std::pow(hi / lo, i / 32.0);
        const double v = eval(e);
        if (!(v > prev))
            throw std::invalid_argument("utility: family not strictly increasing above M_E");
        const double mid = 0.5 * (prev_e + e);
        if (eval(mid) + 1e-12 < 0.5 * (prev + v))
            throw std::invalid_argument("utility: family not concave above M_E");
        prev = v;
        prev_e = e;
    }
}

double UtilityFunction::eval(double e) const {
    if (e < 0.0) throw std::domain_error("utility: energy must be >= 0");
    switch (family_) {
    case Family::Logarithmic:
        if (e == 0.0) return -kInf; // ordering-safe sentinel
        return p0_ * p1_ * std::log(e / min_energy_);
    case Family::PowerLaw:
        if (e < min_energy_) return 0.0;
        return p0_ * std::pow(e, p1_) + p2_;
    case Family::Tabulated: {
        if (e < points_.front().first) return 0.0;
        if (e >= points_.back().first) return points_.back().second;
        auto it = std::upper_bound(points_.begin(), points_.end(), e,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (e - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }
    }
    return 0.0;
}

double UtilityFunction::grad(double e) const {
    if (e <= 0.0) throw std::domain_error("utility: gradient needs energy > 0");
    switch (family_) {
    case Family::Logarithmic:
        return p0_ * p1_ / e;
    case Family::PowerLaw:
        if (e < min_energy_) return 0.0;
        return smooth_marginal_powerlaw(p0_, p1_, e);
    case Family::Tabulated: {
        // left slope at knots
        if (e <= points_.front().first) return 0.0;
        if (e > points_.back().first) return 0.0;
        auto it = std::lower_bound(points_.begin(), points_.end(), e,
                                   [](const auto& p, double v) { return p.first < v; });
        if (it == points_.begin()) ++it;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        return (hi.second - lo.second) / (hi.first - lo.first);
    }
    }
    return 0.0;
}

UtilityFunction::InvGradResult UtilityFunction::inv_grad(double g,
                                                         double bracket_hi) const {
    if (!(g > 0.0) && family_ == Family::Logarithmic) {
        // log marginal alpha*gamma/e never reaches 0: clamp to the top
        return {bracket_hi, true};
    }
    const double lo = min_energy_ * 1e-3;
    const double hi = bracket_hi;

    if (family_ == Family::Logarithmic) {
        const double e = p0_ * p1_ / g;
        if (e < lo) return {lo, true};
        if (e > hi) return {hi, true};
        return {e, false};
    }

    if (family_ == Family::PowerLaw) {
        const double g_lo = smooth_marginal_powerlaw(p0_, p1_, lo); // largest marginal
        const double g_hi = smooth_marginal_powerlaw(p0_, p1_, hi); // smallest marginal
        if (g >= g_lo) return {lo, true};
        if (g <= g_hi) return {hi, true};
        double a = lo, b = hi;
        while ((b - a) > 1e-10 * std::max(1.0, a)) {
            const double mid = 0.5 * (a + b);
            if (smooth_marginal_powerlaw(p0_, p1_, mid) > g)
                a = mid;
            else
                b = mid;
        }
        return {0.5 * (a + b), false};
    }

    // Tabulated: the marginal is a non-increasing step over segments, so the
    // inverse is the start of the first segment whose slope is <= g
    // (smallest-energy tie resolution). A g outside the attainable slope
    // range clamps to the nearer end of the table.
    const int n = static_cast<int>(points_.size());
    const double first_slope = (points_[1].second - points_[0].second) /
                               (points_[1].first - points_[0].first);
    for (int i = 1; i < n; ++i) {
        const double slope = (points_[i].second - points_[i - 1].second) /
                             (points_[i].first - points_[i - 1].first);
        if (slope <= g) {
            const double e = std::clamp(points_[i - 1].first, lo, hi);
            return {e, g > first_slope};
        }
    }
    return {std::clamp(points_.back().first, lo, hi), true};
}

std::string UtilityFunction::family_name() const {
    switch (family_) {
    case Family::Logarithmic: return "logarithmic";
    case Family::PowerLaw: return "power_law";
    case Family::Tabulated: return "tabulated";
    }
    return "?";
}

} // namespace eco
