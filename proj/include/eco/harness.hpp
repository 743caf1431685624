#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eco/core.hpp"
#include "eco/eh_model.hpp"
#include "eco/rollout.hpp"
#include "eco/solver.hpp"
#include "eco/utility.hpp"

namespace eco {

enum class AllocatorId { Iterative, Eco, ClosedformCorrected, UniformEno };
enum class Regime { Scarce, Abundant };

const char* allocator_name(AllocatorId id);  // stable ids used in outputs
AllocatorId allocator_from_name(const std::string& name);
const char* regime_name(Regime r);

// Everything a single simulated day needs.
struct SimContext {
    BatteryConfig battery;
    UtilityFunction utility = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    double beta = 0.99;
    SolverSettings solver;
    RolloutSettings rollout;
};

struct DayRecord {
    int user = 0;
    int day_index = 0;
    double std_level = 0.0;
    Regime regime = Regime::Scarce;
    AllocatorId allocator = AllocatorId::Iterative;

    double start_level = 0.0;
    double e_target = 0.0;
    std::vector<double> expected;
    std::vector<double> actual;
    std::vector<double> base;       // start-of-day plan (empty for allocators without one)
    std::vector<double> committed;  // energy drained per interval
    std::vector<double> useful;     // utility-earning portion
    std::vector<double> levels;     // realized levels, size T+1
    std::vector<std::uint8_t> sleep;

    double total_utility = 0.0;
    double replay_utility = 0.0;    // ECO only: uncorrected base plan replayed
    bool has_replay = false;
    double overflow_total = 0.0;
    int emin_violation_intervals = 0;
    bool target_violated = false;
    double mape_pct = 0.0;
    double decision_seconds = 0.0;  // allocator compute time for the day
};

// Violation accounting shared by the harness and the verifier.
int count_emin_violations(const std::vector<double>& levels,
                          const std::vector<std::uint8_t>& sleep, double e_min);

// One day of the chosen allocator with actual-harvest battery stepping.
//   iterative: re-solves the remaining horizon from the realized state every
//              interval (the reference protocol);
//   closedform_corrected: geometric plan + analytic correction + runtime
//              enforcement;
//   eco: relaxed solve once, then per-interval rollout;
//   baseline_uniform_eno: splits the remaining expected budget uniformly.
// Allocator infeasibility becomes a zero-utility sleep interval, never an abort.
DayRecord simulate_day(AllocatorId id, const EnergyProfile& profile,
                       const SimContext& ctx, double start_level);

struct ExperimentConfig {
    BatteryConfig battery;             // Table-2 defaults
    double beta = 0.99;
    double me = 1.08;                  // M_E [J]
    double scarce_level = 16.0;
    double abundant_level = 144.0;
    std::vector<double> std_levels{0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    int days_per_user = 7;
    int users = 200;
    std::vector<AllocatorId> allocators{AllocatorId::Iterative, AllocatorId::Eco,
                                        AllocatorId::ClosedformCorrected,
                                        AllocatorId::UniformEno};
    std::vector<Regime> regimes{Regime::Scarce, Regime::Abundant};
    UtilityFunction utility = UtilityFunction::logarithmic(1.0, 1.0, 1.08);
    SolverSettings solver;
    RolloutSettings rollout;
    LightModelConfig light;
    MotionModelConfig motion;
    std::uint64_t master_seed = 20260811;
    int jobs = 0; // 0 = hardware concurrency

    double regime_level(Regime r) const {
        return r == Regime::Scarce ? scarce_level : abundant_level;
    }
};

struct CellKey {
    AllocatorId allocator;
    Regime regime;
    double std_level;
    bool operator<(const CellKey& o) const;
};

struct CellMetrics {
    int days = 0;
    double mean_utility = 0.0;
    double normalized_utility = 0.0; // vs the iterative mean of the same cell
    double emin_violation_pct = 0.0; // violating intervals / total intervals
    double etarget_violation_pct = 0.0; // violating days / total days
    double mean_mape_pct = 0.0;
};

struct SweepResult {
    std::vector<UserModel> population;
    std::vector<DayRecord> records;
    std::map<CellKey, CellMetrics> cells;
};

// U users x days_per_user days per (allocator, regime, std level) cell. The
// sampled day for a (user, std, day) triple is shared across allocators and
// regimes, so comparisons are paired. Deterministic under master_seed;
// records are filled into preallocated slots so thread count cannot change
// the output.
SweepResult run_population_sweep(const ExperimentConfig& config);

// Aggregation used by both the sweep and the verifier.
std::map<CellKey, CellMetrics> aggregate_cells(const std::vector<DayRecord>& records,
                                               int horizon);

struct MultiyearDayRow {
    int day = 0;
    int user = 0;
    AllocatorId allocator = AllocatorId::Iterative;
    double utility = 0.0;
    double final_level = 0.0;
    bool target_violated = false;
    double capacity = 0.0;
};

struct MultiyearResult {
    std::vector<MultiyearDayRow> rows;
    // per allocator: total utility, fraction of iterative, violation-day %
    std::map<AllocatorId, double> total_utility;
    std::map<AllocatorId, double> utility_fraction;
    std::map<AllocatorId, double> target_violation_day_pct;
    int warnings_target_clamped = 0;
};

// Continuous multi-day run on the cluster medoid users: each day starts from
// the previous final level, the target follows the start, capacity degrades
// linearly (annual_degradation per 365 days), and the outdoor light gains a
// seasonal sinusoidal multiplier.
MultiyearResult run_multiyear(const std::vector<UserModel>& medoid_users,
                              const ExperimentConfig& config, int years = 3,
                              double annual_degradation = 0.05,
                              double seasonal_amplitude = 0.2,
                              double std_level = 0.25);

struct OverheadReport {
    double full_solve_s = 0.0;      // cold full-tolerance solve (per interval cost)
    double relaxed_solve_s = 0.0;   // ECO's once-per-day solve
    double rollout_step_s = 0.0;    // ECO per-interval cost
    double correction_s = 0.0;      // closed-form per-interval cost
    double ratio_iterative_eco = 0.0;
    double ratio_iterative_closedform = 0.0;
    int repetitions = 0;
};

// Median wall-times of the per-interval work of each allocator on a
// representative day.
OverheadReport measure_overhead(const ExperimentConfig& config, int repetitions);

} // namespace eco
