#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eco/core.hpp"
#include "eco/rng.hpp"

namespace eco {

// Ten activity categories and the four location types they map to.
enum class Activity {
    Sleep, Housework, PeopleCare, Work, Shop, Eat, Leisure, Exercise, Travel, Others
};
enum class Location { Home, Office, Store, Outdoors };

constexpr int kActivityCount = 10;
constexpr int kHoursPerDay = 24;

const char* activity_name(Activity a);
const char* location_name(Location l);
Activity activity_from_name(const std::string& name);

// Fixed activity -> location mapping; "Eat" resolves to office during
// working hours (9-17) and home otherwise.
Location location_for(Activity a, int hour);

struct DaySchedule {
    std::array<Activity, kHoursPerDay> activities{};
    std::array<Location, kHoursPerDay> locations{};

    static DaySchedule from_activities(const std::array<Activity, kHoursPerDay>& acts);
    void validate() const; // locations must agree with the mapping
};

// Light model: indoor locations get fixed irradiance levels relative to the
// office; outdoors follows a cosine clear-sky curve. PV conversion is linear
// in irradiance (system losses folded into the efficiency).
struct LightModelConfig {
    double pv_area_cm2 = 16.0;
    double pv_efficiency = 0.05;
    double office_irradiance_wm2 = 9.0;
    double store_factor = 3.0;
    double home_factor = 0.5;
    double outdoor_peak_irradiance_wm2 = 41.7;
    double solar_noon_hour = 12.5;
    double daylight_halfwidth_hours = 6.5;
    // indoor lights run dimmed before this hour (overnight trickle)
    double night_dim_factor = 0.15;
    double lights_on_hour = 6.0;

    void validate() const;
    double irradiance(Location l, double hour) const; // W/m^2 at an hour center
    double hour_energy(Location l, int hour, double outdoor_scale = 1.0) const; // [J]
};

// Piezoelectric motion model: walking harvests energy_per_step * steps_per_hour
// * element_count per hour; exercise scales that by exercise_factor.
struct MotionModelConfig {
    double energy_per_step_j = 7.8e-6;
    double steps_per_hour = 1800.0;
    int element_count = 10;
    double exercise_factor = 2.0;

    void validate() const;
    double walking_hour_energy() const {
        return energy_per_step_j * steps_per_hour * element_count;
    }
    double hour_energy(Activity a) const; // [J]
};

struct StochasticDayConfig {
    int variance_window = 7;
    double std_normalization = 0.0; // fraction of the daily peak, [0, 0.25]
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Hourly expected harvest: light by location plus motion by activity.
EnergyProfile expected_profile(const DaySchedule& schedule,
                               const LightModelConfig& light,
                               const MotionModelConfig& motion,
                               double outdoor_scale = 1.0);

// Per-hour standard deviations: moving variance of the expected profile
// (window shrinks at the day edges), square-rooted and rescaled so the
// largest sigma equals std_normalization * max expected.
std::vector<double> deviation_profile(const std::vector<double>& expected,
                                      const StochasticDayConfig& cfg);

// Draws one actual day: each hour is a rectified Gaussian around the
// expected value. Deterministic under cfg.rng_seed.
EnergyProfile sample_actual_day(const EnergyProfile& expected,
                                const StochasticDayConfig& cfg);

// Mean absolute percentage error; hours with zero expected harvest are
// excluded. Empty optional when every hour is excluded.
std::optional<double> mape(const std::vector<double>& expected,
                           const std::vector<double>& actual);

// Summed harvest over [0,8), [8,16), [16,24) — the clustering features.
std::array<double, 3> tri_interval_sums(const EnergyProfile& profile);

struct KMedoidsResult {
    std::vector<int> assignment;
    std::vector<int> medoids; // indices into the input, ascending
    double total_cost = 0.0;
};

// PAM-style k-medoids (greedy build + swap) with Euclidean distance.
// Fully deterministic; ties resolve to the lowest index. The seed is
// accepted for interface stability but the deterministic build needs none.
KMedoidsResult cluster_users(const std::vector<std::array<double, 3>>& features,
                             int k, std::uint64_t seed = 0);

// Hour-by-activity population fractions used to synthesize schedules.
// Row h holds the probability of each activity during hour h.
struct ActivityMarginals {
    std::array<std::array<double, kActivityCount>, kHoursPerDay> p{};

    static ActivityMarginals builtin(); // shipped digitization (data/ CSV mirrors it)
    static ActivityMarginals from_csv(const std::string& path);
    void validate() const;
};

// Samples one schedule. Per-user propensity multipliers tilt the shared
// marginals so the population develops persistent user types (homebodies,
// commuters, outdoor-heavy users) while hourly fractions stay close to the
// table on average.
DaySchedule sample_schedule(const ActivityMarginals& marginals, Rng& rng,
                            bool user_propensities = true);

struct UserModel {
    int id = 0;
    DaySchedule schedule;
    EnergyProfile expected;
};

std::vector<UserModel> generate_population(int user_count,
                                           const ActivityMarginals& marginals,
                                           const LightModelConfig& light,
                                           const MotionModelConfig& motion,
                                           std::uint64_t master_seed);

} // namespace eco
