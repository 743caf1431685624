#pragma once

#include <optional>
#include <string>
#include <vector>

namespace eco {

// Planning window: T uniform intervals (24 one-hour intervals by default).
struct Horizon {
    int intervals = 24;
    double interval_seconds = 3600.0;

    void validate() const;
};

// Battery bounds and harvesting/charging efficiency.
//   capacity  = E_max [J]
//   e_min     = reserve floor [J]
//   e_target  = required level at the horizon boundary [J]
//   eta       = harvesting + charging efficiency, (0, 1]
struct BatteryConfig {
    double capacity = 160.0;
    double e_min = 10.0;
    double e_target = 16.0;
    double eta = 1.0;

    void validate() const;
};

// Battery energy at an interval boundary [J]. Levels outside
// [e_min, capacity] are representable; simulators record them as
// violation events instead of clamping silently.
struct BatteryState {
    double level = 0.0;
};

// Per-interval harvested energy over one horizon. `expected` is the model
// forecast, `actual` the realized draw (absent until a day is sampled).
struct EnergyProfile {
    std::vector<double> expected;
    std::optional<std::vector<double>> actual;

    int horizon() const { return static_cast<int>(expected.size()); }
    void validate() const;
};

// Per-interval allocated energies plus the utility discount factor.
struct AllocationPlan {
    std::vector<double> allocations;
    double beta = 0.99;

    int horizon() const { return static_cast<int>(allocations.size()); }
    double total() const;
    void validate() const;
};

// Running record of harvest and allocation deviations from plan.
// cumulative(t) is the prefix sum of (delta_h + delta_a) over [0, t).
struct DeviationLedger {
    std::vector<double> delta_h;
    std::vector<double> delta_a;

    void record(double dh, double da) {
        delta_h.push_back(dh);
        delta_a.push_back(da);
    }
    int size() const { return static_cast<int>(delta_h.size()); }
    double cumulative(int t) const;
};

// One battery transition: new level = level + eta * harvested - allocated.
// Pure arithmetic, no clamping; feasibility is the allocators' job.
BatteryState battery_step(BatteryState state, double harvested, double allocated,
                          const BatteryConfig& cfg);

// Simulation step that clips charge at capacity and reports the energy
// lost to overflow, so daily energy accounting closes exactly.
struct StepOutcome {
    BatteryState state;
    double overflow = 0.0;
};
StepOutcome battery_step_clipped(BatteryState state, double harvested,
                                 double allocated, const BatteryConfig& cfg);

// All-ones lower-triangular T x T matrix; L * x computes prefix sums.
std::vector<std::vector<double>> lower_triangular_ones(int t);

// The action of L and of row-vector multiplication by L. Allocation and
// constraint arithmetic uses these instead of materialized matrices.
std::vector<double> prefix_sums(const std::vector<double>& x);
std::vector<double> suffix_sums(const std::vector<double>& x);

// Float-dust tolerance for energy-accounting identities.
constexpr double kAccountingEps = 1e-9;
// Materiality threshold [J] when classifying bound/target violations;
// absorbs solver residuals without hiding real misses.
constexpr double kViolationEps = 0.01;

struct FeasibilityReport {
    // within_bounds[t]: level after interval t stays in [e_min, capacity]
    std::vector<bool> within_bounds;
    bool final_target_met = false;
    bool feasible = false;
    // simulated levels under expected harvest, size T+1 including start
    std::vector<double> levels;
};

// Simulates the plan against the profile's expected harvest and reports,
// per interval, whether the level stays within bounds, and whether the
// final level reaches e_target.
FeasibilityReport check_feasibility(const AllocationPlan& plan,
                                    const EnergyProfile& profile,
                                    const BatteryConfig& cfg,
                                    double start_level);

} // namespace eco
