#pragma once

#include <string>
#include <utility>
#include <vector>

namespace eco {

// Utility family: maps allocated energy [J] to application quality.
// min_energy (M_E) is the smallest allocation with useful output.
//
//   Logarithmic: alpha * gamma * ln(e / M_E); negative below M_E, -inf at 0.
//   PowerLaw:    a * e^b + c for e >= M_E, 0 below (accuracy-style metric).
//   Tabulated:   piecewise-linear through measured (energy, utility) points;
//                0 below the first point, flat beyond the last.
class UtilityFunction {
public:
    enum class Family { Logarithmic, PowerLaw, Tabulated };

    static UtilityFunction logarithmic(double alpha, double gamma, double min_energy);
    static UtilityFunction power_law(double a, double b, double c, double min_energy);
    static UtilityFunction tabulated(std::vector<std::pair<double, double>> points,
                                     double min_energy);

    double eval(double e) const;

    // d(eval)/de; throws std::domain_error for e <= 0. Tabulated uses the
    // left slope at knots.
    double grad(double e) const;

    // Inverse of grad: the energy whose marginal utility equals g.
    // Logarithmic inverts in closed form; PowerLaw and Tabulated bisect the
    // monotone marginal on [min_energy * 1e-3, bracket_hi] to 1e-10 relative.
    // A g outside the attainable range clamps to the bracket endpoint and
    // sets `clamped`. Ties resolve to the smallest energy.
    struct InvGradResult {
        double energy = 0.0;
        bool clamped = false;
    };
    InvGradResult inv_grad(double g, double bracket_hi) const;

    Family family() const { return family_; }
    double min_energy() const { return min_energy_; }
    std::string family_name() const;

private:
    UtilityFunction() = default;
    void validate_shape() const;

    Family family_ = Family::Logarithmic;
    double min_energy_ = 1.0;
    // Logarithmic / PowerLaw parameters (alpha,gamma) or (a,b,c)
    double p0_ = 1.0, p1_ = 1.0, p2_ = 0.0;
    std::vector<std::pair<double, double>> points_;
};

} // namespace eco
