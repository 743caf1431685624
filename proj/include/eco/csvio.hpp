#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eco/harness.hpp"

namespace eco {

// Energies print with 9 significant digits everywhere, so fixed seeds
// reproduce byte-identical files.
std::string format_energy(double value);

// index,expected_J,actual_J,allocated_J — missing columns stay empty.
void write_profile_csv(const std::string& path, const std::vector<double>& expected,
                       const std::vector<double>* actual,
                       const std::vector<double>* allocated);

void write_population_csv(const std::string& path, const std::vector<UserModel>& users);

// One row per (user, day, interval) of a sweep cell.
void write_cell_trace_csv(const std::string& path, const std::vector<DayRecord>& records);

// One row per simulated day.
void write_day_summary_csv(const std::string& path, const std::vector<DayRecord>& records);

// One row per (allocator, regime, std level).
void write_summary_csv(const std::string& path,
                       const std::map<CellKey, CellMetrics>& cells);

void write_summary_json(const std::string& path,
                        const std::map<CellKey, CellMetrics>& cells,
                        const std::string& kind);

// Example-day traces across allocators, plot-ready.
void write_exampleday_csv(const std::string& path, const std::vector<DayRecord>& records,
                          int user, int day, Regime regime, double std_level);

void write_multiyear_csv(const std::string& path, const MultiyearResult& result);
void write_multiyear_summary_json(const std::string& path, const MultiyearResult& result);

void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& files,
                    const std::string& kind);

// Reading side, used by the verifier.
struct TraceRow {
    int user = 0;
    int day = 0;
    int interval = 0;
    double expected = 0.0;
    double actual = 0.0;
    double allocated = 0.0;
    double useful = 0.0;
    double level = 0.0;
    double base = 0.0;
    int sleep = 0;
};
std::vector<TraceRow> read_cell_trace_csv(const std::string& path);

struct DaySummaryRow {
    int user = 0;
    double std_pct = 0.0;
    int day = 0;
    std::string regime;
    std::string allocator;
    double start_level = 0.0;
    double e_target = 0.0;
    double utility = 0.0;
    double replay_utility = 0.0;
    int has_replay = 0;
    double final_level = 0.0;
    int target_violated = 0;
    int emin_violations = 0;
    double mape_pct = 0.0;
};
std::vector<DaySummaryRow> read_day_summary_csv(const std::string& path);

std::string cell_file_name(const CellKey& key);

} // namespace eco
