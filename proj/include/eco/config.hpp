#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eco/harness.hpp"

namespace eco {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sectioned key=value configuration ('#' and ';' comments, inline comments
// allowed). Unknown sections/keys are tolerated; type errors carry the
// line number of the offending entry.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const;

    const std::string& text() const { return text_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::string origin_;
    std::string text_;

    const Entry* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void fail(const Entry& e, const std::string& section,
                           const std::string& key, const std::string& what) const;
};

struct RunPlan {
    std::string kind = "sweep"; // sweep | multiyear
    ExperimentConfig experiment;
    // multiyear knobs
    int years = 3;
    double annual_degradation = 0.05;
    double seasonal_amplitude = 0.2;
    int clusters = 4;
    // raw config text, echoed into run manifests
    std::string config_text;
};

// Builds a run plan from a config file; every knob has a Table-2 default.
RunPlan load_run_plan(const std::string& path);
RunPlan run_plan_from_config(const ConfigFile& cfg);

UtilityFunction utility_from_config(const ConfigFile& cfg);

// Two-column CSV (energy_J,utility) with a header row.
std::vector<std::pair<double, double>> load_utility_points(const std::string& path);

} // namespace eco
