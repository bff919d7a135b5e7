#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cropyield/domain.hpp"

namespace cropyield::synth {

struct YearTarget {
  int year = 0;
  int zones = 0;
  double yield_mean = 0;
  double yield_std = 0;
};

/// Default per-year zone counts and yield moments (t/ha), 2013-2018.
std::vector<YearTarget> default_years();

/// Annual cosine cycle: mean + amplitude * cos(2 pi (doy - peak_doy) / 365.25).
struct Seasonal {
  double mean = 0;
  double amplitude = 0;
  int peak_doy = 1;
  double noise_sd = 0;

  double at(int doy) const;
};

struct GenConfig {
  std::vector<YearTarget> years = default_years();
  int zone_pool = 400;  // zones are drawn from Z0001..Z<pool>

  // Sowing happens in the autumn before the harvest year.
  int sowing_month = 9;
  int sowing_day = 20;
  int sowing_window_days = 42;
  int harvest_lag_min = 7;  // days after the 40-week season
  int harvest_lag_max = 21;

  Seasonal temp{10.0, 6.5, 200, 2.2};  // daily mean, deg C
  double temp_ar = 0.7;
  double zone_temp_sd = 0.8;
  double year_temp_sd = 0.0;  // random, not tied to yield
  Seasonal diurnal_range{8.0, 2.5, 190, 1.5};
  double min_diurnal_range = 1.0;

  double wet_day_prob = 0.45;
  double wet_day_mean_mm = 4.5;
  double zone_precip_sd = 0.2;  // log-scale spread of per-zone wetness
  double year_precip_sd = 0.0;

  Seasonal solar{10.5, 8.0, 172, 2.5};  // MJ/m2/day
  double wet_day_solar_factor = 0.6;
  Seasonal humidity{80.0, 8.0, 15, 5.0};  // %
  double wet_day_humidity_bump = 6.0;

  // Lognormal nutrient indices (median, log sd) and pH.
  double p_median = 22.0, p_log_sd = 0.45;
  double k_median = 170.0, k_log_sd = 0.35;
  double mg_median = 75.0, mg_log_sd = 0.4;
  double ph_mean = 6.9, ph_sd = 0.7;
  double test_drift_log_sd = 0.08;  // change between successive tests
  int test_interval_min = 3;
  int test_interval_max = 4;
  std::array<double, 4> soil_type_probs{0.2, 0.35, 0.25, 0.2};
  std::array<double, 5> stone_content_probs{0.25, 0.3, 0.25, 0.15, 0.05};
  std::array<double, 3> organic_matter_probs{0.3, 0.55, 0.15};
  std::array<double, 4> caco3_probs{0.2, 0.35, 0.3, 0.15};

  // Yield = mean + std * (w_weather g + w_soil s + w_noise e) / norm, where g
  // and s are standardized weather and soil signals and e ~ N(0, 1).
  double weather_weight = 1.0;
  double soil_weight = 0.6;
  double noise_weight = 0.6;
  // Share of each year's target mean deviation carried by a year-wide
  // temperature anomaly, so between-year yield differences follow weather.
  double year_link = 1.0;
  double dd_curvature = 0.35;
  double ap_curvature = 0.25;
  double dd_ap_interaction = 0.3;
  std::array<double, 8> soil_coefs{0.4, 0.3, 0.2, 0.3, 0.4, -0.3, 0.3, -0.1};

  /// Throws Error on the first invalid field.
  void validate() const;
};

struct ZoneProfile {
  std::string zone_id;
  double temp_offset = 0;
  double precip_factor = 1;
};

std::string zone_id(int zone);
ZoneProfile zone_profile(int zone, const GenConfig& cfg, std::uint64_t seed);

Date sowing_date(int zone, int year, const GenConfig& cfg, std::uint64_t seed);
Date harvest_date(int zone, int year, const GenConfig& cfg, std::uint64_t seed);

/// Daily weather from the sowing date for 40 weeks (280 days).
std::vector<WeatherDaily> gen_weather(int zone, int year, const GenConfig& cfg, std::uint64_t seed);

/// Soil test history of one zone over the configured years: a test every
/// test_interval_min..max years, the first one on or before the first year.
std::vector<SoilRecord> gen_soil(int zone, const GenConfig& cfg, std::uint64_t seed);

/// Raw signal terms of the yield process for one instance.
struct YieldSignals {
  double soil = 0;
  double weather = 0;
};

/// Population moments used to standardize the yield signals.
struct YieldCalibration {
  std::array<double, 8> soil_mean{};
  std::array<double, 8> soil_sd{};
  double dd_mean = 0, dd_sd = 1;
  double ap_mean = 0, ap_sd = 1;
  double soil_signal_mean = 0, soil_signal_sd = 1;
  double weather_signal_mean = 0, weather_signal_sd = 1;
};

/// Growth-window totals of dd_sum and ap_sum from a weather feature block.
std::pair<double, double> growth_totals(std::span<const double> weather_features);

YieldSignals yield_signals(std::span<const double> soil_features, std::span<const double> weather_features,
                           const GenConfig& cfg, const YieldCalibration& cal);

YieldCalibration calibrate(std::span<const std::vector<double>> soil_features,
                           std::span<const std::vector<double>> weather_features, const GenConfig& cfg);

/// Yield in t/ha, clipped to [1, 18] and rounded to 0.01.
double gen_yield(std::span<const double> soil_features, std::span<const double> weather_features,
                 const YearTarget& target, const GenConfig& cfg, const YieldCalibration& cal,
                 std::uint64_t seed);

/// Zones present in `year` (sorted), a deterministic subset of the pool.
std::vector<int> zones_for_year(const YearTarget& target, const GenConfig& cfg, std::uint64_t seed);

/// Whole dataset in memory: one crop record per (year, zone), weather for
/// every season and the soil history of every zone used.
Dataset gen_dataset(const GenConfig& cfg, std::uint64_t seed);

/// soil.csv, weather.csv and crop.csv under `dir` (created if needed).
void write_dataset(const std::filesystem::path& dir, const Dataset& data);

}  // namespace cropyield::synth
