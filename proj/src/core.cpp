#include "eco/core.hpp"

#include <numeric>
#include <stdexcept>

namespace eco {

void Horizon::validate() const {
    if (intervals < 2)
        throw std::invalid_argument("horizon: need at least 2 intervals");
    if (interval_seconds <= 0.0)
        throw std::invalid_argument("horizon: interval duration must be positive");
}

void BatteryConfig::validate() const {
    if (!(0.0 <= e_min && e_min < e_target && e_target <= capacity))
        throw std::invalid_argument("battery: require 0 <= e_min < e_target <= capacity");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("battery: eta must be in (0, 1]");
}

void EnergyProfile::validate() const {
    for (double e : expected)
        if (e < 0.0) throw std::invalid_argument("profile: expected energy < 0");
    if (actual) {
        if (actual->size() != expected.size())
            throw std::invalid_argument("profile: expected/actual length mismatch");
        for (double e : *actual)
            if (e < 0.0) throw std::invalid_argument("profile: actual energy < 0");
    }
}

double AllocationPlan::total() const {
    return std::accumulate(allocations.begin(), allocations.end(), 0.0);
}

void AllocationPlan::validate() const {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("plan: beta must be in (0, 1]");
    for (double a : allocations)
        if (a < 0.0) throw std::invalid_argument("plan: allocation < 0");
}

double DeviationLedger::cumulative(int t) const {
    if (t < 0 || t > size())
        throw std::out_of_range("ledger: cumulative index out of range");
    double sum = 0.0;
    for (int i = 0; i < t; ++i) sum += delta_h[i] + delta_a[i];
    return sum;
}

BatteryState battery_step(BatteryState state, double harvested, double allocated,
                          const BatteryConfig& cfg) {
    return BatteryState{state.level + cfg.eta * harvested - allocated};
}

StepOutcome battery_step_clipped(BatteryState state, double harvested,
                                 double allocated, const BatteryConfig& cfg) {
    BatteryState next = battery_step(state, harvested, allocated, cfg);
    StepOutcome out{next, 0.0};
    if (next.level > cfg.capacity) {
        out.overflow = next.level - cfg.capacity;
        out.state.level = cfg.capacity;
    }
    return out;
}

std::vector<std::vector<double>> lower_triangular_ones(int t) {
    if (t < 1) throw std::invalid_argument("L matrix: size must be >= 1");
    std::vector<std::vector<double>> m(t, std::vector<double>(t, 0.0));
    for (int i = 0; i < t; ++i)
        for (int j = 0; j <= i; ++j) m[i][j] = 1.0;
    return m;
}

std::vector<double> prefix_sums(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    double run = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        run += x[i];
        out[i] = run;
    }
    return out;
}

std::vector<double> suffix_sums(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    double run = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) {
        run += x[i];
        out[i] = run;
    }
    return out;
}

FeasibilityReport check_feasibility(const AllocationPlan& plan,
                                    const EnergyProfile& profile,
                                    const BatteryConfig& cfg,
                                    double start_level) {
    const int t_count = plan.horizon();
    if (profile.horizon() != t_count)
        throw std::invalid_argument("check_feasibility: plan/profile length mismatch");

    FeasibilityReport report;
    report.levels.reserve(t_count + 1);
    report.levels.push_back(start_level);

    BatteryState state{start_level};
    bool all_ok = true;
    for (int t = 0; t < t_count; ++t) {
        state = battery_step(state, profile.expected[t], plan.allocations[t], cfg);
        const bool ok = state.level >= cfg.e_min - kAccountingEps &&
                        state.level <= cfg.capacity + kAccountingEps;
        report.within_bounds.push_back(ok);
        all_ok = all_ok && ok;
        report.levels.push_back(state.level);
    }
    report.final_target_met = state.level >= cfg.e_target - kAccountingEps;
    report.feasible = all_ok && report.final_target_met;
    return report;
}

} // namespace eco
