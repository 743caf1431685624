#include "eco/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace eco {

namespace {
std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    bool prev_space = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '#' || (s[i] == ';' && prev_space)) return s.substr(0, i);
        prev_space = std::isspace(static_cast<unsigned char>(s[i]));
    }
    return s;
}
} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = Entry{value, line_no};
    }
    return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
}

void ConfigFile::fail(const Entry& e, const std::string& section, const std::string& key,
                      const std::string& what) const {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": [" + section + "] " +
                      key + ": " + what + " (got '" + e.value + "')");
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (used != e->value.size()) fail(*e, section, key, "expected a number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(*e, section, key, "expected a number");
    }
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const long v = std::stol(e->value, &used);
        if (used != e->value.size()) fail(*e, section, key, "expected an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(*e, section, key, "expected an integer");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    fail(*e, section, key, "expected a boolean");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key,
                                              const std::vector<std::string>& fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) fail(*e, section, key, "expected a comma-separated list");
    return out;
}

std::vector<std::pair<double, double>> load_utility_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open utility points file: " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    std::getline(in, line); // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected energy_J,utility");
        pts.emplace_back(std::stod(a), std::stod(b));
    }
    return pts;
}

UtilityFunction utility_from_config(const ConfigFile& cfg) {
    const std::string family = cfg.get_string("utility", "family", "logarithmic");
    const double me = cfg.get_double("utility", "me", 1.08);
    if (family == "logarithmic") {
        return UtilityFunction::logarithmic(cfg.get_double("utility", "alpha", 1.0),
                                            cfg.get_double("utility", "gamma", 1.0), me);
    }
    if (family == "power_law") {
        return UtilityFunction::power_law(cfg.get_double("utility", "a", 1.0),
                                          cfg.get_double("utility", "b", 0.5),
                                          cfg.get_double("utility", "c", 0.0), me);
    }
    if (family == "tabulated") {
        const std::string path = cfg.get_string("utility", "points_csv", "");
        if (path.empty())
            throw ConfigError("[utility] family=tabulated requires points_csv");
        return UtilityFunction::tabulated(load_utility_points(path), me);
    }
    throw ConfigError("[utility] unknown family '" + family +
                      "' (valid: logarithmic, power_law, tabulated)");
}

RunPlan run_plan_from_config(const ConfigFile& cfg) {
    RunPlan plan;
    plan.config_text = cfg.text();
    plan.kind = cfg.get_string("experiment", "kind", "sweep");
    if (plan.kind != "sweep" && plan.kind != "multiyear")
        throw ConfigError("[experiment] kind must be 'sweep' or 'multiyear'");

    ExperimentConfig& e = plan.experiment;
    e.battery.capacity = cfg.get_double("battery", "capacity", 160.0);
    e.battery.e_min = cfg.get_double("battery", "e_min", 10.0);
    e.battery.eta = cfg.get_double("battery", "eta", 1.0);
    e.scarce_level = cfg.get_double("battery", "scarce_level", 16.0);
    e.abundant_level = cfg.get_double("battery", "abundant_level", 144.0);
    e.battery.e_target = e.scarce_level;
    e.battery.validate();

    e.beta = cfg.get_double("horizon", "beta", 0.99);
    if (!(e.beta > 0.0 && e.beta <= 1.0))
        throw ConfigError("[horizon] beta must be in (0, 1]");

    e.utility = utility_from_config(cfg);
    e.me = e.utility.min_energy();

    e.solver.tolerance = cfg.get_double("solver", "tolerance", 1e-6);
    e.solver.step_size = cfg.get_double("solver", "step_size", 1e-3);
    e.solver.relaxed_tolerance = cfg.get_double("solver", "relaxed_tolerance", 1e-3);
    e.solver.relaxed_step = cfg.get_double("solver", "relaxed_step", 5e-3);
    e.solver.max_iters = cfg.get_long("solver", "max_iters", 2'000'000);
    e.solver.validate();

    e.rollout.n_branches = static_cast<int>(cfg.get_long("rollout", "n_branches", 20));
    e.rollout.epsilon = cfg.get_double("rollout", "epsilon", 0.2);
    e.rollout.discount_future = cfg.get_bool("rollout", "discount_future", true);
    e.rollout.guard_slack = cfg.get_double("rollout", "guard_slack", 1e-6);
    e.rollout.validate();

    e.light.pv_area_cm2 = cfg.get_double("eh_model", "pv_area_cm2", 16.0);
    e.light.pv_efficiency = cfg.get_double("eh_model", "pv_efficiency", 0.05);
    e.light.office_irradiance_wm2 = cfg.get_double("eh_model", "office_irradiance_wm2", 9.0);
    e.light.store_factor = cfg.get_double("eh_model", "store_factor", 3.0);
    e.light.home_factor = cfg.get_double("eh_model", "home_factor", 0.5);
    e.light.outdoor_peak_irradiance_wm2 =
        cfg.get_double("eh_model", "outdoor_peak_irradiance_wm2", 41.7);
    e.light.solar_noon_hour = cfg.get_double("eh_model", "solar_noon_hour", 12.5);
    e.light.daylight_halfwidth_hours =
        cfg.get_double("eh_model", "daylight_halfwidth_hours", 6.5);
    e.light.night_dim_factor = cfg.get_double("eh_model", "night_dim_factor", 0.15);
    e.light.lights_on_hour = cfg.get_double("eh_model", "lights_on_hour", 6.0);
    e.light.validate();

    e.motion.energy_per_step_j = cfg.get_double("eh_model", "energy_per_step_uj", 7.8) * 1e-6;
    e.motion.steps_per_hour = cfg.get_double("eh_model", "steps_per_hour", 1800.0);
    e.motion.element_count = static_cast<int>(cfg.get_long("eh_model", "element_count", 10));
    e.motion.exercise_factor = cfg.get_double("eh_model", "exercise_factor", 2.0);
    e.motion.validate();

    e.users = static_cast<int>(cfg.get_long("experiment", "users", 200));
    e.days_per_user = static_cast<int>(cfg.get_long("experiment", "days_per_user", 7));
    e.master_seed = static_cast<std::uint64_t>(cfg.get_long("experiment", "seed", 20260811));
    if (e.users < 1 || e.days_per_user < 1)
        throw ConfigError("[experiment] users and days_per_user must be >= 1");

    {
        std::vector<std::string> levels =
            cfg.get_list("experiment", "std_levels", {"0", "5", "10", "15", "20", "25"});
        e.std_levels.clear();
        for (const std::string& s : levels) e.std_levels.push_back(std::stod(s) / 100.0);
        for (double p : e.std_levels)
            if (p < 0.0 || p > 0.25)
                throw ConfigError("[experiment] std_levels must lie in [0, 25] percent");
    }
    {
        std::vector<std::string> regimes =
            cfg.get_list("experiment", "regimes", {"scarce", "abundant"});
        e.regimes.clear();
        for (const std::string& r : regimes) {
            if (r == "scarce") e.regimes.push_back(Regime::Scarce);
            else if (r == "abundant") e.regimes.push_back(Regime::Abundant);
            else throw ConfigError("[experiment] unknown regime '" + r + "'");
        }
    }
    {
        std::vector<std::string> allocs = cfg.get_list(
            "experiment", "allocators",
            {"iterative", "eco", "closedform_corrected", "baseline_uniform_eno"});
        e.allocators.clear();
        for (const std::string& a : allocs) e.allocators.push_back(allocator_from_name(a));
    }

    plan.years = static_cast<int>(cfg.get_long("multiyear", "years", 3));
    plan.annual_degradation =
        cfg.get_double("multiyear", "annual_degradation_pct", 5.0) / 100.0;
    plan.seasonal_amplitude = cfg.get_double("multiyear", "seasonal_amplitude", 0.2);
    plan.clusters = static_cast<int>(cfg.get_long("multiyear", "clusters", 4));
    return plan;
}

RunPlan load_run_plan(const std::string& path) {
    return run_plan_from_config(ConfigFile::parse_file(path));
}

} // namespace eco
