#include "eco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace eco {

const char* allocator_name(AllocatorId id) {
    switch (id) {
    case AllocatorId::Iterative: return "iterative";
    case AllocatorId::Eco: return "eco";
    case AllocatorId::ClosedformCorrected: return "closedform_corrected";
    case AllocatorId::UniformEno: return "baseline_uniform_eno";
    }
    return "?";
}

AllocatorId allocator_from_name(const std::string& name) {
    for (AllocatorId id : {AllocatorId::Iterative, AllocatorId::Eco,
                           AllocatorId::ClosedformCorrected, AllocatorId::UniformEno})
        if (name == allocator_name(id)) return id;
    throw std::invalid_argument(
        "unknown allocator '" + name +
        "' (valid: iterative, eco, closedform_corrected, baseline_uniform_eno)");
}

const char* regime_name(Regime r) {
    return r == Regime::Scarce ? "scarce" : "abundant";
}

bool CellKey::operator<(const CellKey& o) const {
    if (allocator != o.allocator) return allocator < o.allocator;
    if (regime != o.regime) return regime < o.regime;
    return std_level < o.std_level;
}

int count_emin_violations(const std::vector<double>& levels,
                          const std::vector<std::uint8_t>& sleep, double e_min) {
    int count = 0;
    for (std::size_t t = 0; t + 1 < levels.size(); ++t) {
        const bool below = levels[t + 1] < e_min - kViolationEps;
        const bool slept = t < sleep.size() && sleep[t];
        if (below || slept) ++count;
    }
    return count;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

EnergyProfile suffix_profile(const EnergyProfile& profile, int tau) {
    EnergyProfile out;
    out.expected.assign(profile.expected.begin() + tau, profile.expected.end());
    return out;
}

void commit_interval(DayRecord& rec, const SimContext& ctx, BatteryState& state,
                     int t, const EnforcementResult& enforced, double actual_harvest) {
    const StepOutcome step =
        battery_step_clipped(state, actual_harvest, enforced.allocation, ctx.battery);
    state = step.state;
    rec.committed.push_back(enforced.allocation);
    rec.useful.push_back(enforced.useful);
    rec.sleep.push_back(enforced.sleep ? 1 : 0);
    rec.levels.push_back(state.level);
    rec.overflow_total += step.overflow;
    rec.total_utility += booked_utility(enforced.useful, ctx.utility, ctx.beta, t);
}

// Replays a fixed plan without corrections (runtime enforcement only).
double replay_plan_utility(const AllocationPlan& plan, const EnergyProfile& profile,
                           const SimContext& ctx, double start_level) {
    const std::vector<double>& actual = *profile.actual;
    BatteryState state{start_level};
    double total = 0.0;
    for (int t = 0; t < plan.horizon(); ++t) {
        const EnforcementResult enforced = enforce_runtime_constraints(
            std::max(plan.allocations[t], 0.0), state, profile.expected[t], ctx.battery);
        const StepOutcome step =
            battery_step_clipped(state, actual[t], enforced.allocation, ctx.battery);
        state = step.state;
        total += booked_utility(enforced.useful, ctx.utility, ctx.beta, t);
    }
    return total;
}

void simulate_iterative(DayRecord& rec, const EnergyProfile& profile,
                        const SimContext& ctx, double start_level) {
    const int t_count = profile.horizon();
    const std::vector<double>& actual = *profile.actual;
    BatteryState state{start_level};
    DualState warm;
    bool have_warm = false;

    for (int t = 0; t < t_count; ++t) {
        const EnergyProfile rest = suffix_profile(profile, t);
        const SolveResult solved =
            solve_allocation(rest, ctx.battery, state.level, ctx.utility, ctx.beta,
                             ctx.solver, have_warm ? &warm : nullptr);
        EnforcementResult enforced;
        if (solved.infeasible) {
            // even zero allocation breaks the reserve: sleep through it
            enforced.allocation = 0.0;
            enforced.useful = 0.0;
            enforced.sleep = true;
            enforced.branch = EnforcementBranch::Floor;
            have_warm = false;
        } else {
            enforced = enforce_runtime_constraints(solved.plan.allocations[0], state,
                                                   profile.expected[t], ctx.battery);
            // duals for the T-t-1 remaining rows warm-start the next solve
            if (solved.plan.horizon() > 1) {
                warm.lambda_lo.assign(solved.duals.lambda_lo.begin() + 1,
                                      solved.duals.lambda_lo.end());
                warm.lambda_hi.assign(solved.duals.lambda_hi.begin() + 1,
                                      solved.duals.lambda_hi.end());
                have_warm = true;
            } else {
                have_warm = false;
            }
        }
        commit_interval(rec, ctx, state, t, enforced, actual[t]);
    }
}

void simulate_closedform(DayRecord& rec, const EnergyProfile& profile,
                         const SimContext& ctx, double start_level) {
    const int t_count = profile.horizon();
    const std::vector<double>& actual = *profile.actual;
    const InitialAllocationResult init =
        initial_allocation(profile, start_level, ctx.battery.e_target, ctx.beta,
                           t_count, ctx.battery.eta);
    rec.base = init.plan.allocations;

    BatteryState state{start_level};
    DeviationLedger ledger;
    for (int t = 0; t < t_count; ++t) {
        double candidate = 0.0;
        if (init.feasible)
            candidate = std::max(0.0, corrected_allocation(init.plan, ledger, t));
        const EnforcementResult enforced =
            enforce_runtime_constraints(candidate, state, profile.expected[t], ctx.battery);

        commit_interval(rec, ctx, state, t, enforced, actual[t]);
        // deviation bookkeeping as the correction defines it: harvest and
        // allocation deltas only; energy clipped at capacity stays invisible
        // to the corrector (it plans as if the charge had been stored)
        ledger.record(ctx.battery.eta * (actual[t] - profile.expected[t]),
                      init.plan.allocations[t] - enforced.allocation);
    }
}

void simulate_uniform_eno(DayRecord& rec, const EnergyProfile& profile,
                          const SimContext& ctx, double start_level) {
    const int t_count = profile.horizon();
    const std::vector<double>& actual = *profile.actual;
    const std::vector<double> remaining = suffix_sums(profile.expected);

    BatteryState state{start_level};
    for (int t = 0; t < t_count; ++t) {
        const double budget =
            state.level - ctx.battery.e_target + ctx.battery.eta * remaining[t];
        const double candidate = std::max(0.0, budget / (t_count - t));
        const EnforcementResult enforced =
            enforce_runtime_constraints(candidate, state, profile.expected[t], ctx.battery);
        commit_interval(rec, ctx, state, t, enforced, actual[t]);
    }
}

void simulate_eco(DayRecord& rec, const EnergyProfile& profile,
                  const SimContext& ctx, double start_level) {
    const EcoDayResult day = run_eco_day(profile, ctx.battery, start_level,
                                         ctx.utility, ctx.beta, ctx.solver, ctx.rollout);
    rec.base = day.base.allocations;
    rec.committed = day.realized.allocations;
    rec.useful = day.useful;
    rec.levels = day.levels;
    rec.total_utility = day.total_utility;
    rec.overflow_total = day.overflow_total;
    rec.sleep.resize(day.decisions.size());
    for (std::size_t t = 0; t < day.decisions.size(); ++t)
        rec.sleep[t] = day.decisions[t].sleep ? 1 : 0;
    rec.replay_utility = replay_plan_utility(day.base, profile, ctx, start_level);
    rec.has_replay = true;
}

} // namespace

DayRecord simulate_day(AllocatorId id, const EnergyProfile& profile,
                       const SimContext& ctx, double start_level) {
    if (!profile.actual)
        throw std::invalid_argument("simulate_day: profile needs actual harvest values");
    DayRecord rec;
    rec.allocator = id;
    rec.start_level = start_level;
    rec.e_target = ctx.battery.e_target;
    rec.expected = profile.expected;
    rec.actual = *profile.actual;

    const int t_count = profile.horizon();
    rec.committed.reserve(t_count);
    rec.useful.reserve(t_count);
    rec.levels.reserve(t_count + 1);
    rec.levels.push_back(start_level);

    const auto t0 = Clock::now();
    switch (id) {
    case AllocatorId::Iterative: simulate_iterative(rec, profile, ctx, start_level); break;
    case AllocatorId::Eco: simulate_eco(rec, profile, ctx, start_level); break;
    case AllocatorId::ClosedformCorrected:
        simulate_closedform(rec, profile, ctx, start_level);
        break;
    case AllocatorId::UniformEno: simulate_uniform_eno(rec, profile, ctx, start_level); break;
    }
    rec.decision_seconds = seconds_since(t0);

    rec.emin_violation_intervals =
        count_emin_violations(rec.levels, rec.sleep, ctx.battery.e_min);
    rec.target_violated = rec.levels.back() < ctx.battery.e_target - kViolationEps;
    rec.mape_pct = mape(rec.expected, rec.actual).value_or(0.0);
    return rec;
}

std::map<CellKey, CellMetrics> aggregate_cells(const std::vector<DayRecord>& records,
                                               int horizon) {
    struct Acc {
        int days = 0;
        double utility = 0.0;
        int violation_intervals = 0;
        int violation_days = 0;
        double mape = 0.0;
    };
    std::map<CellKey, Acc> acc;
    for (const DayRecord& r : records) {
        Acc& a = acc[{r.allocator, r.regime, r.std_level}];
        ++a.days;
        a.utility += r.total_utility;
        a.violation_intervals += r.emin_violation_intervals;
        a.violation_days += r.target_violated ? 1 : 0;
        a.mape += r.mape_pct;
    }
    std::map<CellKey, CellMetrics> cells;
    for (const auto& [key, a] : acc) {
        CellMetrics m;
        m.days = a.days;
        m.mean_utility = a.utility / a.days;
        m.emin_violation_pct = 100.0 * a.violation_intervals / (a.days * horizon);
        m.etarget_violation_pct = 100.0 * a.violation_days / a.days;
        m.mean_mape_pct = a.mape / a.days;
        cells[key] = m;
    }
    // normalize against the iterative mean of the matching (regime, std) cell
    for (auto& [key, m] : cells) {
        const CellKey ref{AllocatorId::Iterative, key.regime, key.std_level};
        auto it = cells.find(ref);
        if (it != cells.end() && it->second.mean_utility != 0.0)
            m.normalized_utility = m.mean_utility / it->second.mean_utility;
    }
    return cells;
}

SweepResult run_population_sweep(const ExperimentConfig& config) {
    SweepResult result;
    result.population = generate_population(config.users, ActivityMarginals::builtin(),
                                            config.light, config.motion,
                                            config.master_seed);

    struct Task {
        int user;
        int std_idx;
        int day;
        Regime regime;
        AllocatorId allocator;
    };
    std::vector<Task> tasks;
    for (int u = 0; u < config.users; ++u)
        for (int s = 0; s < static_cast<int>(config.std_levels.size()); ++s)
            for (int d = 0; d < config.days_per_user; ++d)
                for (Regime regime : config.regimes)
                    for (AllocatorId id : config.allocators)
                        tasks.push_back({u, s, d, regime, id});

    result.records.resize(tasks.size());

    const int jobs = config.jobs > 0
                         ? config.jobs
                         : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const UserModel& user = result.population[task.user];

            StochasticDayConfig day_cfg;
            day_cfg.std_normalization = config.std_levels[task.std_idx];
            day_cfg.rng_seed =
                derive_seed(config.master_seed, task.user,
                            static_cast<std::uint64_t>(task.std_idx) * 101 + task.day,
                            0xDA7);
            const EnergyProfile day_profile = sample_actual_day(user.expected, day_cfg);

            SimContext ctx;
            ctx.battery = config.battery;
            ctx.battery.e_target = config.regime_level(task.regime);
            ctx.utility = config.utility;
            ctx.beta = config.beta;
            ctx.solver = config.solver;
            ctx.solver.rng_seed = derive_seed(config.master_seed, task.user, task.day, 0x501E);
            ctx.rollout = config.rollout;

            DayRecord rec = simulate_day(task.allocator, day_profile, ctx,
                                         config.regime_level(task.regime));
            rec.user = task.user;
            rec.day_index = task.day;
            rec.std_level = config.std_levels[task.std_idx];
            rec.regime = task.regime;
            result.records[i] = std::move(rec);
        }
    };

    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    const int horizon = config.users > 0 ? result.population.front().expected.horizon()
                                         : kHoursPerDay;
    result.cells = aggregate_cells(result.records, horizon);
    return result;
}

MultiyearResult run_multiyear(const std::vector<UserModel>& medoid_users,
                              const ExperimentConfig& config, int years,
                              double annual_degradation, double seasonal_amplitude,
                              double std_level) {
    MultiyearResult result;
    const int total_days = 365 * years;
    const double cap0 = config.battery.capacity;

    struct Lane {
        const UserModel* user;
        AllocatorId allocator;
        std::vector<MultiyearDayRow> rows;
        double utility = 0.0;
        int violations = 0;
        int warnings = 0;
    };
    std::vector<Lane> lanes;
    for (const UserModel& user : medoid_users)
        for (AllocatorId id : config.allocators)
            lanes.push_back({&user, id, {}, 0.0, 0, 0});

    std::atomic<std::size_t> next{0};
    const int jobs = config.jobs > 0
                         ? config.jobs
                         : std::max(1u, std::thread::hardware_concurrency());

    auto worker = [&]() {
        for (;;) {
            const std::size_t li = next.fetch_add(1);
            if (li >= lanes.size()) return;
            Lane& lane = lanes[li];
            double level = 0.9 * cap0;

            for (int d = 0; d < total_days; ++d) {
                const double capacity =
                    cap0 * (1.0 - annual_degradation * static_cast<double>(d) / 365.0);
                // summer-peaked seasonal multiplier on outdoor light
                const int doy = d % 365;
                const double outdoor_scale =
                    1.0 + seasonal_amplitude *
                              std::cos(2.0 * std::numbers::pi * (doy - 172) / 365.0);

                SimContext ctx;
                ctx.battery = config.battery;
                ctx.battery.capacity = capacity;
                if (level > capacity) ++lane.warnings; // degradation ate the carry-over
                const double start = std::min(level, capacity);
                double target = start;
                const double min_target = ctx.battery.e_min + 1e-6;
                if (target < min_target) target = min_target;
                ctx.battery.e_target = target;
                ctx.utility = config.utility;
                ctx.beta = config.beta;
                ctx.solver = config.solver;
                ctx.solver.rng_seed =
                    derive_seed(config.master_seed, lane.user->id, d, 0x3E4);
                ctx.rollout = config.rollout;

                const EnergyProfile expected =
                    expected_profile(lane.user->schedule, config.light, config.motion,
                                     outdoor_scale);
                StochasticDayConfig day_cfg;
                day_cfg.std_normalization = std_level; // 0.25 = highest model error
                day_cfg.rng_seed = derive_seed(config.master_seed, lane.user->id, d, 0x5EA);
                const EnergyProfile day_profile = sample_actual_day(expected, day_cfg);

                DayRecord rec = simulate_day(lane.allocator, day_profile, ctx, start);

                MultiyearDayRow row;
                row.day = d;
                row.user = lane.user->id;
                row.allocator = lane.allocator;
                row.utility = rec.total_utility;
                row.final_level = rec.levels.back();
                row.target_violated = rec.target_violated;
                row.capacity = capacity;
                lane.rows.push_back(row);

                lane.utility += rec.total_utility;
                lane.violations += rec.target_violated ? 1 : 0;
                level = rec.levels.back();
            }
        }
    };

    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::map<AllocatorId, int> violation_days;
    std::map<AllocatorId, int> day_counts;
    for (Lane& lane : lanes) {
        for (MultiyearDayRow& row : lane.rows) result.rows.push_back(row);
        result.total_utility[lane.allocator] += lane.utility;
        violation_days[lane.allocator] += lane.violations;
        day_counts[lane.allocator] += total_days;
        result.warnings_target_clamped += lane.warnings;
    }
    const double iter_total = result.total_utility.count(AllocatorId::Iterative)
                                  ? result.total_utility[AllocatorId::Iterative]
                                  : 0.0;
    for (const auto& [id, total] : result.total_utility) {
        result.utility_fraction[id] = iter_total != 0.0 ? total / iter_total : 0.0;
        result.target_violation_day_pct[id] =
            100.0 * violation_days[id] / std::max(1, day_counts[id]);
    }
    std::sort(result.rows.begin(), result.rows.end(),
              [](const MultiyearDayRow& a, const MultiyearDayRow& b) {
                  if (a.user != b.user) return a.user < b.user;
                  if (a.allocator != b.allocator) return a.allocator < b.allocator;
                  return a.day < b.day;
              });
    return result;
}

OverheadReport measure_overhead(const ExperimentConfig& config, int repetitions) {
    OverheadReport report;
    report.repetitions = repetitions;

    // representative scarce day from the first generated user
    const std::vector<UserModel> users =
        generate_population(1, ActivityMarginals::builtin(), config.light, config.motion,
                            config.master_seed);
    StochasticDayConfig day_cfg;
    day_cfg.std_normalization = 0.10;
    day_cfg.rng_seed = derive_seed(config.master_seed, 0, 0, 0xBE);
    const EnergyProfile profile = sample_actual_day(users[0].expected, day_cfg);

    SimContext ctx;
    ctx.battery = config.battery;
    ctx.battery.e_target = config.scarce_level;
    ctx.utility = config.utility;
    ctx.beta = config.beta;
    ctx.solver = config.solver;
    ctx.rollout = config.rollout;
    const double start = config.scarce_level;

    // warm-up and shared fixtures
    const SolveResult warmup =
        solve_allocation(profile, ctx.battery, start, ctx.utility, ctx.beta, ctx.solver);
    const AllocationPlan base =
        repair_base_plan(warmup.plan, profile, ctx.battery, start);
    const int tau = profile.horizon() / 2;
    BatteryState mid_state{2.0 * config.scarce_level}; // plausible mid-day level
    const double delta = 0.35;                         // mid-day deviation [J]
    DeviationLedger ledger;
    for (int t = 0; t < tau; ++t) ledger.record(delta / tau, 0.0);

    auto median_of = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };

    std::vector<double> full_times, relaxed_times, rollout_times, correction_times;
    full_times.reserve(repetitions);
    for (int r = 0; r < repetitions; ++r) {
        {
            auto t0 = Clock::now();
            SolverSettings s = ctx.solver;
            s.rng_seed = ctx.solver.rng_seed + r + 1;
            volatile double sink = solve_allocation(profile, ctx.battery, start,
                                                    ctx.utility, ctx.beta, s)
                                       .plan.allocations[0];
            (void)sink;
            full_times.push_back(seconds_since(t0));
        }
        {
            auto t0 = Clock::now();
            SolverSettings s = ctx.solver;
            s.rng_seed = ctx.solver.rng_seed + r + 1;
            volatile double sink =
                solve_allocation(profile, ctx.battery, start, ctx.utility, ctx.beta,
                                 s.relaxed())
                    .plan.allocations[0];
            (void)sink;
            relaxed_times.push_back(seconds_since(t0));
        }
        {
            auto t0 = Clock::now();
            volatile double sink =
                rollout_step(base.allocations[tau], delta, mid_state,
                             profile.expected[tau], tau, base, profile, ctx.battery,
                             ctx.utility, ctx.rollout)
                    .allocation;
            (void)sink;
            rollout_times.push_back(seconds_since(t0));
        }
        {
            // closed-form correction is nanoseconds; time a small batch
            constexpr int kBatch = 256;
            auto t0 = Clock::now();
            double acc = 0.0;
            for (int i = 0; i < kBatch; ++i) {
                const double cand =
                    std::max(0.0, corrected_allocation(base, ledger, tau));
                acc += enforce_runtime_constraints(cand, mid_state, profile.expected[tau],
                                                   ctx.battery)
                           .allocation;
            }
            volatile double sink = acc;
            (void)sink;
            correction_times.push_back(seconds_since(t0) / kBatch);
        }
    }

    report.full_solve_s = median_of(full_times);
    report.relaxed_solve_s = median_of(relaxed_times);
    report.rollout_step_s = median_of(rollout_times);
    report.correction_s = median_of(correction_times);
    report.ratio_iterative_eco = report.full_solve_s / report.rollout_step_s;
    report.ratio_iterative_closedform = report.full_solve_s / report.correction_s;
    return report;
}

} // namespace eco
