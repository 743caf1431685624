#include "eco/eh_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eco {

namespace {
const char* kActivityNames[kActivityCount] = {
    "Sleep", "Housework", "PeopleCare", "Work", "Shop",
    "Eat",   "Leisure",   "Exercise",   "Travel", "Others"};
const char* kLocationNames[4] = {"home", "office", "store", "outdoors"};
} // namespace

const char* activity_name(Activity a) { return kActivityNames[static_cast<int>(a)]; }
const char* location_name(Location l) { return kLocationNames[static_cast<int>(l)]; }

Activity activity_from_name(const std::string& name) {
    for (int i = 0; i < kActivityCount; ++i)
        if (name == kActivityNames[i]) return static_cast<Activity>(i);
    throw std::invalid_argument("unknown activity label: " + name);
}

Location location_for(Activity a, int hour) {
    switch (a) {
    case Activity::Sleep:
    case Activity::Housework:
    case Activity::PeopleCare:
    case Activity::Leisure:
    case Activity::Others: return Location::Home;
    case Activity::Work: return Location::Office;
    case Activity::Shop: return Location::Store;
    case Activity::Exercise: return Location::Store;
    case Activity::Travel: return Location::Outdoors;
    case Activity::Eat: return (hour >= 9 && hour < 17) ? Location::Office : Location::Home;
    }
    throw std::invalid_argument("unknown activity");
}

DaySchedule DaySchedule::from_activities(const std::array<Activity, kHoursPerDay>& acts) {
    DaySchedule s;
    s.activities = acts;
    for (int h = 0; h < kHoursPerDay; ++h) s.locations[h] = location_for(acts[h], h);
    return s;
}

void DaySchedule::validate() const {
    for (int h = 0; h < kHoursPerDay; ++h)
        if (locations[h] != location_for(activities[h], h))
            throw std::invalid_argument("schedule: location inconsistent with activity at hour " +
                                        std::to_string(h));
}

void LightModelConfig::validate() const {
    if (pv_area_cm2 <= 0 || pv_efficiency <= 0 || office_irradiance_wm2 <= 0 ||
        outdoor_peak_irradiance_wm2 <= 0 || daylight_halfwidth_hours <= 0)
        throw std::invalid_argument("light model: parameters must be positive");
    if (night_dim_factor < 0.0 || night_dim_factor > 1.0)
        throw std::invalid_argument("light model: night_dim_factor must be in [0, 1]");
}

double LightModelConfig::irradiance(Location l, double hour) const {
    const double dim = hour < lights_on_hour ? night_dim_factor : 1.0;
    switch (l) {
    case Location::Home: return dim * home_factor * office_irradiance_wm2;
    case Location::Office: return dim * office_irradiance_wm2;
    case Location::Store: return dim * store_factor * office_irradiance_wm2;
    case Location::Outdoors: {
        const double phase = std::numbers::pi * (hour - solar_noon_hour) /
                             (2.0 * daylight_halfwidth_hours);
        return outdoor_peak_irradiance_wm2 * std::max(0.0, std::cos(phase));
    }
    }
    return 0.0;
}

double LightModelConfig::hour_energy(Location l, int hour, double outdoor_scale) const {
    const double irr = irradiance(l, hour + 0.5); // hour-center evaluation
    const double scale = (l == Location::Outdoors) ? outdoor_scale : 1.0;
    return scale * irr * (pv_area_cm2 * 1e-4) * pv_efficiency * 3600.0;
}

void MotionModelConfig::validate() const {
    if (energy_per_step_j <= 0 || steps_per_hour <= 0 || element_count <= 0 ||
        exercise_factor <= 0)
        throw std::invalid_argument("motion model: parameters must be positive");
    if (walking_hour_energy() <= 0)
        throw std::invalid_argument("motion model: degenerate walking energy");
}

double MotionModelConfig::hour_energy(Activity a) const {
    switch (a) {
    case Activity::Travel:
    case Activity::Shop:
    case Activity::Housework: return walking_hour_energy();
    case Activity::Exercise: return exercise_factor * walking_hour_energy();
    default: return 0.0;
    }
}

void StochasticDayConfig::validate() const {
    if (variance_window < 1 || variance_window % 2 == 0)
        throw std::invalid_argument("stochastic day: window must be odd and >= 1");
    if (std_normalization < 0.0 || std_normalization > 0.25)
        throw std::invalid_argument("stochastic day: normalization must be in [0, 0.25]");
}

EnergyProfile expected_profile(const DaySchedule& schedule,
                               const LightModelConfig& light,
                               const MotionModelConfig& motion,
                               double outdoor_scale) {
    schedule.validate();
    light.validate();
    motion.validate();
    EnergyProfile profile;
    profile.expected.resize(kHoursPerDay);
    for (int h = 0; h < kHoursPerDay; ++h) {
        profile.expected[h] = light.hour_energy(schedule.locations[h], h, outdoor_scale) +
                              motion.hour_energy(schedule.activities[h]);
    }
    return profile;
}

std::vector<double> deviation_profile(const std::vector<double>& expected,
                                      const StochasticDayConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(expected.size());
    const int half = cfg.variance_window / 2;
    std::vector<double> sigma(n, 0.0);
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - half);
        const int hi = std::min(n - 1, t + half);
        const int m = hi - lo + 1;
        if (m < 2) continue;
        double mean = 0.0;
        for (int i = lo; i <= hi; ++i) mean += expected[i];
        mean /= m;
        double var = 0.0;
        for (int i = lo; i <= hi; ++i) var += (expected[i] - mean) * (expected[i] - mean);
        var /= (m - 1);
        sigma[t] = std::sqrt(var);
    }
    const double sigma_max = *std::max_element(sigma.begin(), sigma.end());
    const double expected_max = *std::max_element(expected.begin(), expected.end());
    if (sigma_max <= 0.0 || expected_max <= 0.0) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        return sigma;
    }
    const double scale = cfg.std_normalization * expected_max / sigma_max;
    for (double& s : sigma) s *= scale;
    return sigma;
}

EnergyProfile sample_actual_day(const EnergyProfile& expected,
                                const StochasticDayConfig& cfg) {
    expected.validate();
    const std::vector<double> sigma = deviation_profile(expected.expected, cfg);
    EnergyProfile out = expected;
    out.actual = expected.expected;
    Rng rng(cfg.rng_seed);
    for (std::size_t t = 0; t < sigma.size(); ++t) {
        const double draw = rng.normal(expected.expected[t], sigma[t]);
        (*out.actual)[t] = std::max(0.0, draw);
    }
    return out;
}

std::optional<double> mape(const std::vector<double>& expected,
                           const std::vector<double>& actual) {
    if (expected.size() != actual.size())
        throw std::invalid_argument("mape: length mismatch");
    double sum = 0.0;
    int included = 0;
    for (std::size_t t = 0; t < expected.size(); ++t) {
        if (expected[t] == 0.0) continue;
        sum += std::abs(actual[t] - expected[t]) / expected[t];
        ++included;
    }
    if (included == 0) return std::nullopt;
    return 100.0 * sum / included;
}

std::array<double, 3> tri_interval_sums(const EnergyProfile& profile) {
    if (profile.horizon() != kHoursPerDay)
        throw std::invalid_argument("tri_interval_sums: need a 24-hour profile");
    std::array<double, 3> sums{0.0, 0.0, 0.0};
    for (int h = 0; h < kHoursPerDay; ++h) sums[h / 8] += profile.expected[h];
    return sums;
}

namespace {
double sq_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}
} // namespace

KMedoidsResult cluster_users(const std::vector<std::array<double, 3>>& features,
                             int k, std::uint64_t /*seed*/) {
    const int n = static_cast<int>(features.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("cluster_users: need 1 <= k <= number of users");

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = std::sqrt(sq_dist(features[i], features[j]));

    auto total_cost = [&](const std::vector<int>& medoids) {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int m : medoids) best = std::min(best, dist[i][m]);
            cost += best;
        }
        return cost;
    };

    // BUILD: start from the 1-medoid optimum, then greedily add the point
    // with the largest cost reduction. Strict inequalities keep ties at the
    // lowest index.
    std::vector<int> medoids;
    {
        int best_i = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            double c = 0.0;
            for (int j = 0; j < n; ++j) c += dist[j][i];
            if (c < best_cost) {
                best_cost = c;
                best_i = i;
            }
        }
        medoids.push_back(best_i);
    }
    std::vector<double> nearest(n);
    auto refresh_nearest = [&]() {
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int m : medoids) best = std::min(best, dist[i][m]);
            nearest[i] = best;
        }
    };
    refresh_nearest();
    while (static_cast<int>(medoids.size()) < k) {
        int best_i = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
            double gain = 0.0;
            for (int j = 0; j < n; ++j)
                gain += std::max(0.0, nearest[j] - dist[j][i]);
            if (gain > best_gain) {
                best_gain = gain;
                best_i = i;
            }
        }
        medoids.push_back(best_i);
        refresh_nearest();
    }

    // SWAP: apply the best strictly-improving (medoid, candidate) exchange
    // until none remains.
    double current = total_cost(medoids);
    for (;;) {
        double best_cost = current;
        int best_m = -1, best_c = -1;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (int c = 0; c < n; ++c) {
                if (std::find(medoids.begin(), medoids.end(), c) != medoids.end()) continue;
                std::vector<int> trial = medoids;
                trial[mi] = c;
                const double cost = total_cost(trial);
                if (cost < best_cost - 1e-12) {
                    best_cost = cost;
                    best_m = static_cast<int>(mi);
                    best_c = c;
                }
            }
        }
        if (best_m < 0) break;
        medoids[best_m] = best_c;
        current = best_cost;
    }

    std::sort(medoids.begin(), medoids.end());
    KMedoidsResult res;
    res.medoids = medoids;
    res.total_cost = current;
    res.assignment.resize(n);
    for (int i = 0; i < n; ++i) {
        int best_m = medoids[0];
        double best = dist[i][medoids[0]];
        for (int m : medoids) {
            if (dist[i][m] < best) {
                best = dist[i][m];
                best_m = m;
            }
        }
        // report the cluster as the position within the sorted medoid list
        res.assignment[i] = static_cast<int>(
            std::find(medoids.begin(), medoids.end(), best_m) - medoids.begin());
    }
    return res;
}

ActivityMarginals ActivityMarginals::builtin() {
    // Hourly activity fractions (percent) for a typical weekday population.
    // Columns: Sleep, Housework, PeopleCare, Work, Shop, Eat, Leisure,
    // Exercise, Travel, Others. Approximate digitization; data/ ships the
    // same table as CSV.
    static const int table[kHoursPerDay][kActivityCount] = {
        {94, 0, 0, 2, 0, 0, 3, 0, 0, 1},   // 0
        {96, 0, 0, 2, 0, 0, 1, 0, 0, 1},   // 1
        {97, 0, 0, 2, 0, 0, 0, 0, 0, 1},   // 2
        {97, 0, 0, 2, 0, 0, 0, 0, 0, 1},   // 3
        {95, 0, 0, 3, 0, 0, 0, 0, 1, 1},   // 4
        {88, 1, 1, 4, 0, 1, 1, 1, 2, 1},   // 5
        {70, 4, 3, 6, 0, 4, 3, 2, 6, 2},   // 6
        {45, 7, 5, 10, 1, 8, 5, 2, 14, 3}, // 7
        {20, 9, 6, 25, 2, 6, 6, 2, 20, 4}, // 8
        {8, 12, 7, 40, 4, 3, 8, 3, 10, 5}, // 9
        {4, 12, 7, 45, 5, 2, 9, 3, 8, 5},  // 10
        {2, 11, 6, 46, 6, 4, 9, 3, 8, 5},  // 11
        {1, 9, 5, 40, 6, 14, 9, 2, 9, 5},  // 12
        {1, 10, 5, 44, 6, 6, 11, 2, 10, 5},// 13
        {1, 11, 6, 43, 6, 3, 12, 2, 11, 5},// 14
        {1, 11, 6, 40, 7, 3, 13, 3, 11, 5},// 15
        {1, 11, 6, 35, 8, 4, 14, 4, 12, 5},// 16
        {1, 12, 5, 22, 9, 8, 15, 7, 16, 5},// 17
        {2, 12, 5, 12, 9, 16, 19, 8, 12, 5},// 18
        {3, 0, 5, 0, 0, 14, 61, 0, 0, 17}, // 19  (home, sedentary from here on)
        {8, 0, 5, 0, 0, 8, 68, 0, 0, 11},  // 20  (home, sedentary)
        {20, 0, 4, 0, 0, 6, 60, 0, 0, 10}, // 21
        {42, 0, 2, 0, 0, 2, 48, 0, 0, 6},  // 22
        {72, 0, 1, 0, 0, 1, 20, 0, 0, 6},  // 23
    };
    ActivityMarginals m;
    for (int h = 0; h < kHoursPerDay; ++h)
        for (int a = 0; a < kActivityCount; ++a)
            m.p[h][a] = table[h][a] / 100.0;
    m.validate();
    return m;
}

ActivityMarginals ActivityMarginals::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open activity table: " + path);
    ActivityMarginals m;
    std::string line;
    std::getline(in, line); // header
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ','); // hour column
        const int h = std::stoi(cell);
        if (h < 0 || h >= kHoursPerDay)
            throw std::runtime_error("activity table: hour out of range");
        for (int a = 0; a < kActivityCount; ++a) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("activity table: missing column");
            m.p[h][a] = std::stod(cell);
        }
        ++rows;
    }
    if (rows != kHoursPerDay)
        throw std::runtime_error("activity table: expected 24 rows");
    m.validate();
    return m;
}

void ActivityMarginals::validate() const {
    for (int h = 0; h < kHoursPerDay; ++h) {
        double sum = 0.0;
        for (int a = 0; a < kActivityCount; ++a) {
            if (p[h][a] < 0.0) throw std::invalid_argument("activity table: negative fraction");
            sum += p[h][a];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("activity table: hour " + std::to_string(h) +
                                        " does not sum to 1");
    }
}

DaySchedule sample_schedule(const ActivityMarginals& marginals, Rng& rng,
                            bool user_propensities) {
    // Per-user tilts; activities with the largest lifestyle spread get the
    // widest multipliers.
    std::array<double, kActivityCount> tilt;
    tilt.fill(1.0);
    if (user_propensities) {
        static const double spread[kActivityCount] = {
            0.10, 0.50, 0.60, 0.80, 0.60, 0.20, 0.40, 0.90, 0.90, 0.40};
        for (int a = 0; a < kActivityCount; ++a)
            tilt[a] = std::exp(rng.normal(0.0, spread[a]));
    }

    std::array<Activity, kHoursPerDay> acts{};
    for (int h = 0; h < kHoursPerDay; ++h) {
        double total = 0.0;
        std::array<double, kActivityCount> w;
        for (int a = 0; a < kActivityCount; ++a) {
            w[a] = marginals.p[h][a] * tilt[a];
            total += w[a];
        }
        double r = rng.uniform01() * total;
        int pick = kActivityCount - 1;
        for (int a = 0; a < kActivityCount; ++a) {
            if (r < w[a]) {
                pick = a;
                break;
            }
            r -= w[a];
        }
        acts[h] = static_cast<Activity>(pick);
    }
    return DaySchedule::from_activities(acts);
}

std::vector<UserModel> generate_population(int user_count,
                                           const ActivityMarginals& marginals,
                                           const LightModelConfig& light,
                                           const MotionModelConfig& motion,
                                           std::uint64_t master_seed) {
    std::vector<UserModel> users;
    users.reserve(user_count);
    for (int uid = 0; uid < user_count; ++uid) {
        Rng rng(derive_seed(master_seed, uid, 0, 0xA11CE));
        UserModel u;
        u.id = uid;
        u.schedule = sample_schedule(marginals, rng);
        u.expected = expected_profile(u.schedule, light, motion);
        users.push_back(std::move(u));
    }
    return users;
}

} // namespace eco
