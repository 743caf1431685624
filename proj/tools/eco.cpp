// eco — energy-allocation experiment driver.
//
//   eco generate --config cfg.ini --out dir     synthesize a population
//   eco run      --config cfg.ini --out dir     run the configured experiment
//   eco verify   --out dir                      replay invariants on a run
//
// Exit codes: 0 success, 1 usage/config error, 2 invariant failure.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "eco/config.hpp"
#include "eco/csvio.hpp"
#include "eco/eh_model.hpp"
#include "eco/harness.hpp"
#include "eco/verify.hpp"

namespace fs = std::filesystem;
using namespace eco;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string profiles_dir; // informational; runs regenerate from the seed
    long seed_override = -1;
    int jobs = 0;
    bool force = false;
    bool verbose = false;
};

int prepare_out_dir(const CliOptions& opt) {
    if (fs::exists(opt.out_dir) && !fs::is_empty(opt.out_dir)) {
        if (!opt.force) {
            std::cerr << "error: output directory '" << opt.out_dir
                      << "' is not empty (use --force to overwrite)\n";
            return 1;
        }
    }
    fs::create_directories(opt.out_dir);
    return 0;
}

RunPlan load_plan(const CliOptions& opt) {
    RunPlan plan = load_run_plan(opt.config_path);
    if (opt.seed_override >= 0)
        plan.experiment.master_seed = static_cast<std::uint64_t>(opt.seed_override);
    plan.experiment.jobs = opt.jobs;
    return plan;
}

int cmd_generate(const CliOptions& opt) {
    if (int rc = prepare_out_dir(opt)) return rc;
    const RunPlan plan = load_plan(opt);
    const ExperimentConfig& cfg = plan.experiment;

    const std::vector<UserModel> users = generate_population(
        cfg.users, ActivityMarginals::builtin(), cfg.light, cfg.motion, cfg.master_seed);

    const fs::path dir(opt.out_dir);
    std::vector<std::string> files;

    write_population_csv((dir / "population.csv").string(), users);
    files.push_back("population.csv");

    fs::create_directories(dir / "profiles");
    fs::create_directories(dir / "days");
    int day_files = 0;
    for (const UserModel& u : users) {
        char name[64];
        std::snprintf(name, sizeof name, "profiles/user%04d_expected.csv", u.id);
        write_profile_csv((dir / name).string(), u.expected.expected, nullptr, nullptr);
        files.push_back(name);

        for (std::size_t s = 0; s < cfg.std_levels.size(); ++s) {
            for (int d = 0; d < cfg.days_per_user; ++d) {
                StochasticDayConfig day_cfg;
                day_cfg.std_normalization = cfg.std_levels[s];
                day_cfg.rng_seed = derive_seed(cfg.master_seed, u.id,
                                               static_cast<std::uint64_t>(s) * 101 + d, 0xDA7);
                const EnergyProfile day = sample_actual_day(u.expected, day_cfg);
                std::snprintf(name, sizeof name, "days/user%04d_std%02d_day%d.csv", u.id,
                              static_cast<int>(cfg.std_levels[s] * 100.0 + 0.5), d);
                write_profile_csv((dir / name).string(), day.expected, &*day.actual,
                                  nullptr);
                ++day_files;
            }
        }
    }

    write_manifest((dir / "manifest.json").string(), plan.config_text, cfg.master_seed,
                   files, "generate");
    std::cout << "generated " << users.size() << " users, " << users.size()
              << " expected profiles, " << day_files << " sampled days in " << opt.out_dir
              << "\n";
    return 0;
}

int cmd_run(const CliOptions& opt) {
    if (int rc = prepare_out_dir(opt)) return rc;
    const RunPlan plan = load_plan(opt);
    const ExperimentConfig& cfg = plan.experiment;
    const fs::path dir(opt.out_dir);
    std::vector<std::string> files;

    if (plan.kind == "multiyear") {
        // cluster the population, then run the medoid users
        const std::vector<UserModel> users =
            generate_population(cfg.users, ActivityMarginals::builtin(), cfg.light,
                                cfg.motion, cfg.master_seed);
        std::vector<std::array<double, 3>> features;
        features.reserve(users.size());
        for (const UserModel& u : users) features.push_back(tri_interval_sums(u.expected));
        const KMedoidsResult clusters =
            cluster_users(features, plan.clusters, cfg.master_seed);
        std::vector<UserModel> medoids;
        for (int m : clusters.medoids) medoids.push_back(users[m]);

        const MultiyearResult result = run_multiyear(medoids, cfg, plan.years,
                                                     plan.annual_degradation,
                                                     plan.seasonal_amplitude);
        write_multiyear_csv((dir / "fig9_multiyear.csv").string(), result);
        write_multiyear_summary_json((dir / "summary.json").string(), result);
        files.push_back("fig9_multiyear.csv");
        files.push_back("summary.json");
        write_manifest((dir / "manifest.json").string(), plan.config_text,
                       cfg.master_seed, files, "multiyear");
        std::cout << "multiyear run complete: " << result.rows.size() << " day rows, "
                  << "summary in " << opt.out_dir << "\n";
        for (const auto& [id, frac] : result.utility_fraction)
            std::cout << "  " << allocator_name(id) << ": utility fraction "
                      << format_energy(frac) << ", target-violation days "
                      << format_energy(result.target_violation_day_pct.at(id)) << "%\n";
        return 0;
    }

    const SweepResult sweep = run_population_sweep(cfg);

    // per-cell traces
    for (AllocatorId id : cfg.allocators) {
        for (Regime regime : cfg.regimes) {
            for (double std_level : cfg.std_levels) {
                const CellKey cell{id, regime, std_level};
                std::vector<DayRecord> records;
                for (const DayRecord& r : sweep.records)
                    if (r.allocator == id && r.regime == regime && r.std_level == std_level)
                        records.push_back(r);
                const std::string name = cell_file_name(cell);
                write_cell_trace_csv((dir / name).string(), records);
                files.push_back(name);
            }
        }
    }

    write_day_summary_csv((dir / "days.csv").string(), sweep.records);
    write_summary_csv((dir / "summary.csv").string(), sweep.cells);
    write_summary_json((dir / "summary.json").string(), sweep.cells, "sweep");
    write_summary_csv((dir / "fig7_metrics.csv").string(), sweep.cells);
    write_exampleday_csv((dir / "fig6_exampleday.csv").string(), sweep.records, 0, 0,
                         cfg.regimes.front(), cfg.std_levels.back());
    files.insert(files.end(), {"days.csv", "summary.csv", "summary.json",
                               "fig7_metrics.csv", "fig6_exampleday.csv"});

    write_manifest((dir / "manifest.json").string(), plan.config_text, cfg.master_seed,
                   files, "sweep");
    std::cout << "sweep complete: " << sweep.records.size() << " day records, "
              << sweep.cells.size() << " cells, outputs in " << opt.out_dir << "\n";
    if (opt.verbose) {
        for (const auto& [key, m] : sweep.cells)
            std::cout << "  " << allocator_name(key.allocator) << ' '
                      << regime_name(key.regime) << " std "
                      << static_cast<int>(key.std_level * 100 + 0.5)
                      << "%: mean utility " << format_energy(m.mean_utility)
                      << " (norm " << format_energy(m.normalized_utility) << ")\n";
    }
    return 0;
}

int cmd_verify(const CliOptions& opt) {
    const VerifyReport report = verify_run(opt.out_dir);
    std::cout << "verify: " << report.checks_run << " checks";
    if (report.ok()) {
        std::cout << ", all passed\n";
        return 0;
    }
    std::cout << ", " << report.issues.size() << " failure(s)\n";
    for (const VerifyIssue& i : report.issues)
        std::cout << "  FAIL [" << i.check << "] " << i.where << ": " << i.detail << "\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eco: finite-horizon energy allocation experiments"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", opt.config_path, "run configuration (ini)")
                ->required()
                ->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory")->required();
        sub->add_option("--seed", opt.seed_override, "override the master seed");
        sub->add_option("--jobs", opt.jobs, "worker threads (default: logical cores)");
        sub->add_flag("--force", opt.force, "allow writing into a non-empty directory");
        sub->add_flag("--verbose", opt.verbose, "print per-cell metrics");
    };

    CLI::App* generate = app.add_subcommand("generate", "synthesize population profiles");
    add_common(generate, true);
    CLI::App* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run, true);
    run->add_option("--profiles", opt.profiles_dir,
                    "profiles directory from 'generate' (runs regenerate deterministically "
                    "from the seed; kept for bookkeeping)");
    CLI::App* verify = app.add_subcommand("verify", "replay invariants on a finished run");
    verify->add_option("--out", opt.out_dir, "run directory to verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(opt);
        if (run->parsed()) return cmd_run(opt);
        if (verify->parsed()) return cmd_verify(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
