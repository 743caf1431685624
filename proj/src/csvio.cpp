#include "eco/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eco {

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}
} // namespace

std::string format_energy(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void write_profile_csv(const std::string& path, const std::vector<double>& expected,
                       const std::vector<double>* actual,
                       const std::vector<double>* allocated) {
    std::ofstream out = open_out(path);
    out << "index,expected_J,actual_J,allocated_J\n";
    for (std::size_t t = 0; t < expected.size(); ++t) {
        out << t << ',' << format_energy(expected[t]) << ',';
        if (actual) out << format_energy((*actual)[t]);
        out << ',';
        if (allocated) out << format_energy((*allocated)[t]);
        out << '\n';
    }
}

void write_population_csv(const std::string& path, const std::vector<UserModel>& users) {
    std::ofstream out = open_out(path);
    out << "user";
    for (int h = 0; h < kHoursPerDay; ++h) out << ",h" << h;
    out << '\n';
    for (const UserModel& u : users) {
        out << u.id;
        for (int h = 0; h < kHoursPerDay; ++h)
            out << ',' << activity_name(u.schedule.activities[h]);
        out << '\n';
    }
}

void write_cell_trace_csv(const std::string& path, const std::vector<DayRecord>& records) {
    std::ofstream out = open_out(path);
    out << "user,day,interval,expected_J,actual_J,allocated_J,useful_J,level_J,base_J,sleep\n";
    for (const DayRecord& r : records) {
        const bool has_base = !r.base.empty();
        for (std::size_t t = 0; t < r.committed.size(); ++t) {
            out << r.user << ',' << r.day_index << ',' << t << ','
                << format_energy(r.expected[t]) << ',' << format_energy(r.actual[t]) << ','
                << format_energy(r.committed[t]) << ',' << format_energy(r.useful[t]) << ','
                << format_energy(r.levels[t + 1]) << ','
                << (has_base ? format_energy(r.base[t]) : std::string()) << ','
                << int(r.sleep[t]) << '\n';
        }
    }
}

void write_day_summary_csv(const std::string& path, const std::vector<DayRecord>& records) {
    std::ofstream out = open_out(path);
    out << "user,std_pct,day,regime,allocator,start_level_J,e_target_J,utility,"
           "replay_utility,has_replay,final_level_J,target_violated,emin_violations,"
           "mape_pct\n";
    for (const DayRecord& r : records) {
        out << r.user << ',' << format_energy(r.std_level * 100.0) << ',' << r.day_index
            << ',' << regime_name(r.regime) << ',' << allocator_name(r.allocator) << ','
            << format_energy(r.start_level) << ',' << format_energy(r.e_target) << ','
            << format_energy(r.total_utility) << ','
            << (r.has_replay ? format_energy(r.replay_utility) : std::string("0")) << ','
            << int(r.has_replay) << ',' << format_energy(r.levels.back()) << ','
            << int(r.target_violated) << ',' << r.emin_violation_intervals << ','
            << format_energy(r.mape_pct) << '\n';
    }
}

void write_summary_csv(const std::string& path,
                       const std::map<CellKey, CellMetrics>& cells) {
    std::ofstream out = open_out(path);
    out << "allocator,regime,std_pct,days,mean_utility,normalized_utility,"
           "emin_violation_pct,etarget_violation_pct,mean_mape_pct\n";
    for (const auto& [key, m] : cells) {
        out << allocator_name(key.allocator) << ',' << regime_name(key.regime) << ','
            << format_energy(key.std_level * 100.0) << ',' << m.days << ','
            << format_energy(m.mean_utility) << ',' << format_energy(m.normalized_utility)
            << ',' << format_energy(m.emin_violation_pct) << ','
            << format_energy(m.etarget_violation_pct) << ','
            << format_energy(m.mean_mape_pct) << '\n';
    }
}

void write_summary_json(const std::string& path,
                        const std::map<CellKey, CellMetrics>& cells,
                        const std::string& kind) {
    nlohmann::ordered_json doc;
    doc["kind"] = kind;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [key, m] : cells) {
        nlohmann::ordered_json row;
        row["allocator"] = allocator_name(key.allocator);
        row["regime"] = regime_name(key.regime);
        row["std_pct"] = key.std_level * 100.0;
        row["days"] = m.days;
        row["mean_utility"] = m.mean_utility;
        row["normalized_utility"] = m.normalized_utility;
        row["emin_violation_pct"] = m.emin_violation_pct;
        row["etarget_violation_pct"] = m.etarget_violation_pct;
        row["mean_mape_pct"] = m.mean_mape_pct;
        rows.push_back(row);
    }
    doc["cells"] = rows;
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_exampleday_csv(const std::string& path, const std::vector<DayRecord>& records,
                          int user, int day, Regime regime, double std_level) {
    std::vector<const DayRecord*> picks;
    for (const DayRecord& r : records)
        if (r.user == user && r.day_index == day && r.regime == regime &&
            r.std_level == std_level)
            picks.push_back(&r);
    if (picks.empty()) return;

    std::ofstream out = open_out(path);
    out << "interval,expected_J,actual_J";
    for (const DayRecord* r : picks)
        out << ',' << allocator_name(r->allocator) << "_alloc_J,"
            << allocator_name(r->allocator) << "_level_J";
    out << '\n';
    const std::size_t t_count = picks.front()->committed.size();
    for (std::size_t t = 0; t < t_count; ++t) {
        out << t << ',' << format_energy(picks.front()->expected[t]) << ','
            << format_energy(picks.front()->actual[t]);
        for (const DayRecord* r : picks)
            out << ',' << format_energy(r->committed[t]) << ','
                << format_energy(r->levels[t + 1]);
        out << '\n';
    }
}

void write_multiyear_csv(const std::string& path, const MultiyearResult& result) {
    std::ofstream out = open_out(path);
    out << "user,allocator,day,capacity_J,utility,final_level_J,target_violated\n";
    for (const MultiyearDayRow& r : result.rows) {
        out << r.user << ',' << allocator_name(r.allocator) << ',' << r.day << ','
            << format_energy(r.capacity) << ',' << format_energy(r.utility) << ','
            << format_energy(r.final_level) << ',' << int(r.target_violated) << '\n';
    }
}

void write_multiyear_summary_json(const std::string& path, const MultiyearResult& result) {
    nlohmann::ordered_json doc;
    doc["kind"] = "multiyear";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [id, total] : result.total_utility) {
        nlohmann::ordered_json row;
        row["allocator"] = allocator_name(id);
        row["total_utility"] = total;
        row["utility_fraction_of_iterative"] = result.utility_fraction.at(id);
        row["etarget_violation_day_pct"] = result.target_violation_day_pct.at(id);
        rows.push_back(row);
    }
    doc["allocators"] = rows;
    doc["target_clamp_warnings"] = result.warnings_target_clamped;
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_manifest(const std::string& path, const std::string& config_text,
                    std::uint64_t seed, const std::vector<std::string>& files,
                    const std::string& kind) {
    nlohmann::ordered_json doc;
    doc["tool"] = "eco";
    doc["version"] = "1.0.0";
    doc["kind"] = kind;
    doc["seed"] = seed;
    doc["files"] = files;
    doc["config"] = config_text;
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::string cell_file_name(const CellKey& key) {
    std::ostringstream name;
    name << "trace_" << allocator_name(key.allocator) << '_' << regime_name(key.regime)
         << "_std" << static_cast<int>(key.std_level * 100.0 + 0.5) << ".csv";
    return name.str();
}

std::vector<TraceRow> read_cell_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace file: " + path);
    std::vector<TraceRow> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> c = split_csv_line(line);
        if (c.size() < 10) throw std::runtime_error(path + ": short trace row");
        TraceRow r;
        r.user = std::stoi(c[0]);
        r.day = std::stoi(c[1]);
        r.interval = std::stoi(c[2]);
        r.expected = std::stod(c[3]);
        r.actual = std::stod(c[4]);
        r.allocated = std::stod(c[5]);
        r.useful = std::stod(c[6]);
        r.level = std::stod(c[7]);
        r.base = c[8].empty() ? 0.0 : std::stod(c[8]);
        r.sleep = std::stoi(c[9]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<DaySummaryRow> read_day_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read day summary: " + path);
    std::vector<DaySummaryRow> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> c = split_csv_line(line);
        if (c.size() < 14) throw std::runtime_error(path + ": short day-summary row");
        DaySummaryRow r;
        r.user = std::stoi(c[0]);
        r.std_pct = std::stod(c[1]);
        r.day = std::stoi(c[2]);
        r.regime = c[3];
        r.allocator = c[4];
        r.start_level = std::stod(c[5]);
        r.e_target = std::stod(c[6]);
        r.utility = std::stod(c[7]);
        r.replay_utility = std::stod(c[8]);
        r.has_replay = std::stoi(c[9]);
        r.final_level = std::stod(c[10]);
        r.target_violated = std::stoi(c[11]);
        r.emin_violations = std::stoi(c[12]);
        r.mape_pct = std::stod(c[13]);
        rows.push_back(r);
    }
    return rows;
}

} // namespace eco
