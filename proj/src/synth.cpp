#include "cropyield/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "cropyield/features.hpp"
#include "cropyield/ingest.hpp"
#include "cropyield/learn/rng.hpp"

namespace cropyield::synth {

namespace {

// Stream tags keep the random draws of different quantities independent.
enum Stream : std::uint64_t {
  kZoneStream = 1,
  kSowingStream,
  kHarvestStream,
  kWeatherStream,
  kYearStream,
  kSoilStream,
  kYieldStream,
  kSubsetStream,
};

Rng stream(std::uint64_t seed, Stream tag, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(derive_seed(derive_seed(derive_seed(seed, tag), a), b));
}

// Box-Muller; written out so the sequence does not depend on the standard
// library's distribution implementation.
double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

// Dividing by an exact power of ten gives the double nearest the decimal,
// so values print back in their short form.
double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

template <std::size_t N>
int categorical(Rng& rng, const std::array<double, N>& probs) {
  double total = 0;
  for (double p : probs) total += p;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < probs[i]) return static_cast<int>(i);
    u -= probs[i];
  }
  return static_cast<int>(N - 1);
}

int day_of_year(Date d) {
  return days_between(Date{d.year(), std::chrono::January, std::chrono::day{1}}, d) + 1;
}

struct YearEffect {
  double temp = 0;
  double precip_factor = 1;
};

YearEffect year_effect(int year, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kYearStream, static_cast<std::uint64_t>(year));
  YearEffect e;
  e.temp = cfg.year_temp_sd * normal(rng);
  e.precip_factor = std::exp(cfg.year_precip_sd * normal(rng));
  return e;
}

template <std::size_t N>
void check_probs(const std::array<double, N>& probs, const char* name) {
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0)) throw Error(fmt::format("synth: {} probabilities must be >= 0", name));
    total += p;
  }
  if (!(total > 0)) throw Error(fmt::format("synth: {} probabilities sum to zero", name));
}

}  // namespace

std::vector<YearTarget> default_years() {
  return {{2013, 359, 8.99, 1.86}, {2014, 335, 10.78, 1.61}, {2015, 362, 11.71, 1.36},
          {2016, 221, 9.94, 1.42},  {2017, 331, 10.24, 1.79}, {2018, 264, 9.36, 1.75}};
}

double Seasonal::at(int doy) const {
  return mean + amplitude * std::cos(2.0 * std::numbers::pi * (doy - peak_doy) / 365.25);
}

void GenConfig::validate() const {
  if (years.empty()) throw Error("synth: no years configured");
  std::set<int> seen;
  for (const auto& y : years) {
    if (!seen.insert(y.year).second) throw Error(fmt::format("synth: year {} listed twice", y.year));
    if (y.zones <= 0) throw Error(fmt::format("synth: year {} needs a positive zone count", y.year));
    if (y.zones > zone_pool)
      throw Error(fmt::format("synth: year {} asks for {} zones but the pool has {}", y.year, y.zones, zone_pool));
    if (!(y.yield_std >= 0)) throw Error(fmt::format("synth: year {} yield std must be >= 0", y.year));
    if (!(y.yield_mean >= 1 && y.yield_mean <= 18))
      throw Error(fmt::format("synth: year {} yield mean outside [1, 18]", y.year));
  }
  if (zone_pool <= 0 || zone_pool > 9999) throw Error("synth: zone_pool must be in 1..9999");
  if (!Date{std::chrono::year{2001}, std::chrono::month{static_cast<unsigned>(sowing_month)},
            std::chrono::day{static_cast<unsigned>(sowing_day)}}
           .ok())
    throw Error("synth: invalid sowing month/day");
  if (sowing_window_days < 1) throw Error("synth: sowing_window_days must be >= 1");
  if (harvest_lag_min < 0 || harvest_lag_max < harvest_lag_min)
    throw Error("synth: need 0 <= harvest_lag_min <= harvest_lag_max");
  // Seasons of consecutive years must not overlap.
  if (sowing_window_days + 40 * 7 > 365) throw Error("synth: sowing window too wide");
  for (const Seasonal* s : {&temp, &diurnal_range, &solar, &humidity})
    if (!(s->noise_sd >= 0)) throw Error("synth: seasonal noise sd must be >= 0");
  if (!(temp_ar >= 0 && temp_ar < 1)) throw Error("synth: temp_ar must be in [0, 1)");
  for (double v : {zone_temp_sd, year_temp_sd, zone_precip_sd, year_precip_sd, p_log_sd, k_log_sd, mg_log_sd,
                   ph_sd, test_drift_log_sd, wet_day_mean_mm})
    if (!(v >= 0)) throw Error("synth: spreads and means must be >= 0");
  if (!(wet_day_prob >= 0 && wet_day_prob <= 1)) throw Error("synth: wet_day_prob must be in [0, 1]");
  if (!(p_median > 0 && k_median > 0 && mg_median > 0)) throw Error("synth: nutrient medians must be > 0");
  if (test_interval_min < 1 || test_interval_max < test_interval_min)
    throw Error("synth: need 1 <= test_interval_min <= test_interval_max");
  check_probs(soil_type_probs, "soil_type");
  check_probs(stone_content_probs, "stone_content");
  check_probs(organic_matter_probs, "organic_matter");
  check_probs(caco3_probs, "caco3");
  if (!(weather_weight >= 0 && soil_weight >= 0 && noise_weight >= 0))
    throw Error("synth: yield weights must be >= 0");
  if (weather_weight + soil_weight + noise_weight <= 0) throw Error("synth: yield weights are all zero");
  if (!(year_link >= 0 && year_link <= 1)) throw Error("synth: year_link must be in [0, 1]");
}

std::string zone_id(int zone) { return fmt::format("Z{:04d}", zone); }

ZoneProfile zone_profile(int zone, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kZoneStream, static_cast<std::uint64_t>(zone));
  ZoneProfile z;
  z.zone_id = zone_id(zone);
  z.temp_offset = cfg.zone_temp_sd * normal(rng);
  z.precip_factor = std::exp(cfg.zone_precip_sd * normal(rng));
  return z;
}

Date sowing_date(int zone, int year, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kSowingStream, static_cast<std::uint64_t>(zone), static_cast<std::uint64_t>(year));
  const Date start{std::chrono::year{year - 1}, std::chrono::month{static_cast<unsigned>(cfg.sowing_month)},
                   std::chrono::day{static_cast<unsigned>(cfg.sowing_day)}};
  return add_days(start, uniform_int(rng, 0, cfg.sowing_window_days - 1));
}

Date harvest_date(int zone, int year, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kHarvestStream, static_cast<std::uint64_t>(zone), static_cast<std::uint64_t>(year));
  return add_days(sowing_date(zone, year, cfg, seed),
                  40 * 7 + uniform_int(rng, cfg.harvest_lag_min, cfg.harvest_lag_max));
}

std::vector<WeatherDaily> gen_weather(int zone, int year, const GenConfig& cfg, std::uint64_t seed) {
  const ZoneProfile zp = zone_profile(zone, cfg, seed);
  const YearEffect ye = year_effect(year, cfg, seed);
  const Date sowing = sowing_date(zone, year, cfg, seed);
  Rng rng = stream(seed, kWeatherStream, static_cast<std::uint64_t>(zone), static_cast<std::uint64_t>(year));

  constexpr int kDays = 40 * 7;
  std::vector<WeatherDaily> out;
  out.reserve(kDays);
  const double innovation = std::sqrt(1.0 - cfg.temp_ar * cfg.temp_ar) * cfg.temp.noise_sd;
  double e = cfg.temp.noise_sd * normal(rng);
  for (int d = 0; d < kDays; ++d) {
    const Date date = add_days(sowing, d);
    const int doy = day_of_year(date);
    if (d > 0) e = cfg.temp_ar * e + innovation * normal(rng);
    const double mean = cfg.temp.at(doy) + zp.temp_offset + ye.temp + e;
    const double range =
        std::max(cfg.min_diurnal_range, cfg.diurnal_range.at(doy) + cfg.diurnal_range.noise_sd * normal(rng));
    const bool wet = uniform01(rng) < cfg.wet_day_prob;
    const double amount_u = uniform01(rng);
    const double solar_noise = normal(rng);
    const double humidity_noise = normal(rng);

    WeatherDaily w;
    w.zone_id = zp.zone_id;
    w.date = date;
    w.t_max = round_to(std::clamp(mean + range / 2, -45.0, 45.0), 2);
    w.t_min = round_to(std::clamp(mean - range / 2, -45.0, 45.0), 2);
    if (w.t_min >= w.t_max) w.t_min = w.t_max - 0.5;
    const double amount = -std::log(1.0 - amount_u) * cfg.wet_day_mean_mm * zp.precip_factor * ye.precip_factor;
    w.precip = wet ? round_to(std::min(amount, 150.0), 1) : 0.0;
    double solar = cfg.solar.at(doy) + cfg.solar.noise_sd * solar_noise;
    if (wet) solar *= cfg.wet_day_solar_factor;
    w.solar = round_to(std::clamp(solar, 0.2, 35.0), 2);
    const double hum =
        cfg.humidity.at(doy) + cfg.humidity.noise_sd * humidity_noise + (wet ? cfg.wet_day_humidity_bump : 0.0);
    w.humidity = round_to(std::clamp(hum, 25.0, 100.0), 1);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<SoilRecord> gen_soil(int zone, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kSoilStream, static_cast<std::uint64_t>(zone));
  int first_year = cfg.years.front().year, last_year = first_year;
  for (const auto& y : cfg.years) {
    first_year = std::min(first_year, y.year);
    last_year = std::max(last_year, y.year);
  }
  const OrdinalOrders orders = OrdinalOrders::defaults();
  const double p0 = cfg.p_median * std::exp(cfg.p_log_sd * normal(rng));
  const double k0 = cfg.k_median * std::exp(cfg.k_log_sd * normal(rng));
  const double mg0 = cfg.mg_median * std::exp(cfg.mg_log_sd * normal(rng));
  const double ph0 = cfg.ph_mean + cfg.ph_sd * normal(rng);
  const std::string soil_type = orders.of(OrdinalField::soil_type)[categorical(rng, cfg.soil_type_probs)];
  const std::string stone = orders.of(OrdinalField::stone_content)[categorical(rng, cfg.stone_content_probs)];
  const std::string organic =
      orders.of(OrdinalField::organic_matter)[categorical(rng, cfg.organic_matter_probs)];
  const std::string caco3 = orders.of(OrdinalField::caco3)[categorical(rng, cfg.caco3_probs)];

  std::vector<SoilRecord> out;
  int year = first_year - uniform_int(rng, 0, cfg.test_interval_max - 1);
  while (year <= last_year) {
    SoilRecord r;
    r.zone_id = zone_id(zone);
    r.test_year = year;
    const double drift = cfg.test_drift_log_sd;
    r.p = round_to(std::clamp(p0 * std::exp(drift * normal(rng)), 0.5, 900.0), 1);
    r.k = round_to(std::clamp(k0 * std::exp(drift * normal(rng)), 5.0, 2900.0), 1);
    r.mg = round_to(std::clamp(mg0 * std::exp(drift * normal(rng)), 2.0, 1900.0), 1);
    r.ph = round_to(std::clamp(ph0 + 0.1 * normal(rng), 4.0, 9.0), 1);
    r.soil_type = soil_type;
    r.stone_content = stone;
    r.organic_matter = organic;
    r.caco3 = caco3;
    out.push_back(std::move(r));
    year += uniform_int(rng, cfg.test_interval_min, cfg.test_interval_max);
  }
  return out;
}

std::pair<double, double> growth_totals(std::span<const double> weather_features) {
  if (weather_features.size() != kWeatherFeatureCount)
    throw Error(fmt::format("expected {} weather features, got {}", kWeatherFeatureCount, weather_features.size()));
  const std::size_t stride = kWeeklyAggregateNames.size();
  double dd = 0, ap = 0;
  for (std::size_t w = 0; w < static_cast<std::size_t>(kGrowthWeeks); ++w) {
    dd += weather_features[w * stride + 1];
    ap += weather_features[w * stride + 3];
  }
  return {dd, ap};
}

YieldSignals yield_signals(std::span<const double> soil_features, std::span<const double> weather_features,
                           const GenConfig& cfg, const YieldCalibration& cal) {
  if (soil_features.size() != kSoilFeatureCount)
    throw Error(fmt::format("expected {} soil features, got {}", kSoilFeatureCount, soil_features.size()));
  YieldSignals s;
  for (std::size_t j = 0; j < kSoilFeatureCount; ++j)
    if (cal.soil_sd[j] > 0) s.soil += cfg.soil_coefs[j] * (soil_features[j] - cal.soil_mean[j]) / cal.soil_sd[j];
  const auto [dd, ap] = growth_totals(weather_features);
  const double u = (dd - cal.dd_mean) / cal.dd_sd;
  const double v = (ap - cal.ap_mean) / cal.ap_sd;
  s.weather = u - cfg.dd_curvature * u * u - cfg.ap_curvature * v * v + cfg.dd_ap_interaction * u * v;
  return s;
}

namespace {

// Growth-window degree days with every daily mean shifted by delta.
double growth_degree_days(const std::vector<WeatherDaily>& season, double delta) {
  const std::size_t first = static_cast<std::size_t>(kFirstGrowthWeek - 1) * 7;
  const std::size_t last = std::min(season.size(), first + static_cast<std::size_t>(kGrowthWeeks) * 7);
  double dd = 0;
  for (std::size_t d = first; d < last; ++d) dd += std::max(0.0, (season[d].t_max + season[d].t_min) / 2 + delta);
  return dd;
}

std::pair<double, double> moments(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 1.0};
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  return {m, sd > 0 ? sd : 1.0};
}

void fit_signal_moments(YieldCalibration& cal, std::span<const std::vector<double>> soil,
                        std::span<const std::vector<double>> weather, const GenConfig& cfg) {
  std::vector<double> ss, ws;
  for (std::size_t i = 0; i < soil.size(); ++i) {
    const YieldSignals s = yield_signals(soil[i], weather[i], cfg, cal);
    ss.push_back(s.soil);
    ws.push_back(s.weather);
  }
  std::tie(cal.soil_signal_mean, cal.soil_signal_sd) = moments(ss);
  std::tie(cal.weather_signal_mean, cal.weather_signal_sd) = moments(ws);
}

}  // namespace

YieldCalibration calibrate(std::span<const std::vector<double>> soil_features,
                           std::span<const std::vector<double>> weather_features, const GenConfig& cfg) {
  if (soil_features.size() != weather_features.size()) throw Error("calibrate: feature set sizes differ");
  YieldCalibration cal;
  for (std::size_t j = 0; j < kSoilFeatureCount; ++j) {
    std::vector<double> col;
    for (const auto& s : soil_features) col.push_back(s.at(j));
    auto [m, sd] = moments(col);
    cal.soil_mean[j] = m;
    cal.soil_sd[j] = sd;
  }
  std::vector<double> dd, ap;
  for (const auto& w : weather_features) {
    auto [d, a] = growth_totals(w);
    dd.push_back(d);
    ap.push_back(a);
  }
  std::tie(cal.dd_mean, cal.dd_sd) = moments(dd);
  std::tie(cal.ap_mean, cal.ap_sd) = moments(ap);
  fit_signal_moments(cal, soil_features, weather_features, cfg);
  return cal;
}

double gen_yield(std::span<const double> soil_features, std::span<const double> weather_features,
                 const YearTarget& target, const GenConfig& cfg, const YieldCalibration& cal, std::uint64_t seed) {
  const YieldSignals s = yield_signals(soil_features, weather_features, cfg, cal);
  const double g = (s.weather - cal.weather_signal_mean) / cal.weather_signal_sd;
  const double h = (s.soil - cal.soil_signal_mean) / cal.soil_signal_sd;
  Rng rng(seed);
  const double e = normal(rng);
  const double norm = std::sqrt(cfg.weather_weight * cfg.weather_weight + cfg.soil_weight * cfg.soil_weight +
                                cfg.noise_weight * cfg.noise_weight);
  const double latent = (cfg.weather_weight * g + cfg.soil_weight * h + cfg.noise_weight * e) / norm;
  return round_to(std::clamp(target.yield_mean + target.yield_std * latent, 1.0, 18.0), 2);
}

std::vector<int> zones_for_year(const YearTarget& target, const GenConfig& cfg, std::uint64_t seed) {
  Rng rng = stream(seed, kSubsetStream, static_cast<std::uint64_t>(target.year));
  std::vector<int> pool(static_cast<std::size_t>(cfg.zone_pool));
  for (int i = 0; i < cfg.zone_pool; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
  const auto take = static_cast<std::size_t>(target.zones);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Dataset gen_dataset(const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();

  struct Job {
    int zone = 0;
    std::size_t year_index = 0;
    CropRecord crop;
    std::vector<WeatherDaily> weather;
    std::vector<double> soil_features;
    std::vector<double> weather_features;
  };
  std::vector<Job> jobs;
  std::set<int> used_zones;
  for (std::size_t yi = 0; yi < cfg.years.size(); ++yi)
    for (int z : zones_for_year(cfg.years[yi], cfg, seed)) {
      Job j;
      j.zone = z;
      j.year_index = yi;
      jobs.push_back(std::move(j));
      used_zones.insert(z);
    }

  std::map<int, std::vector<SoilRecord>> histories;
  for (int z : used_zones) histories.emplace(z, gen_soil(z, cfg, seed));

  auto build_features = [&](Job& j) {
    const int year = cfg.years[j.year_index].year;
    const auto weeks = aggregate_weeks(j.weather, j.crop.sowing_date);
    const SoilRecord* soil = nullptr;
    for (const auto& r : histories.at(j.zone))
      if (r.test_year <= year) soil = &r;
    // gen_soil always starts on or before the first configured year.
    InstanceResult built = build_instance(j.crop, *soil, weeks, FeatureMode::soil_weather);
    j.soil_features = std::move(built.instance->soil_features);
    j.weather_features = std::move(built.instance->weather_features);
  };

  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Job& j = jobs[static_cast<std::size_t>(i)];
    const int year = cfg.years[j.year_index].year;
    j.weather = gen_weather(j.zone, year, cfg, seed);
    j.crop.zone_id = zone_id(j.zone);
    j.crop.year = year;
    j.crop.sowing_date = sowing_date(j.zone, year, cfg, seed);
    j.crop.harvest_date = harvest_date(j.zone, year, cfg, seed);
    build_features(j);
  }

  auto collect = [&] {
    std::vector<std::vector<double>> all_soil, all_weather;
    for (const auto& j : jobs) {
      all_soil.push_back(j.soil_features);
      all_weather.push_back(j.weather_features);
    }
    return calibrate(all_soil, all_weather, cfg);
  };
  YieldCalibration global = collect();

  if (cfg.year_link > 0 && cfg.weather_weight > 0) {
    // Shift each year's temperatures so its mean growth-window degree days sit
    // where the year's target mean puts it on the weather signal.
    double zones = 0, mu = 0, sigma = 0;
    for (const auto& t : cfg.years) {
      zones += t.zones;
      mu += t.zones * t.yield_mean;
      sigma += t.zones * t.yield_std;
    }
    mu /= zones;
    sigma /= zones;
    const double norm = std::sqrt(cfg.weather_weight * cfg.weather_weight + cfg.soil_weight * cfg.soil_weight +
                                  cfg.noise_weight * cfg.noise_weight);
    for (std::size_t yi = 0; yi < cfg.years.size(); ++yi) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < jobs.size(); ++i)
        if (jobs[i].year_index == yi) members.push_back(i);
      if (members.empty()) continue;
      const double z = sigma > 0 ? (cfg.years[yi].yield_mean - mu) / sigma : 0.0;
      const double u = std::clamp(cfg.year_link * z * norm / cfg.weather_weight * global.weather_signal_sd, -2.0, 2.0);
      const double target = global.dd_mean + u * global.dd_sd;
      auto mean_dd = [&](double delta) {
        double total = 0;
        for (std::size_t i : members) total += growth_degree_days(jobs[i].weather, delta);
        return total / static_cast<double>(members.size());
      };
      double lo = -8.0, hi = 8.0;
      for (int it = 0; it < 50; ++it) {
        const double mid = (lo + hi) / 2;
        (mean_dd(mid) < target ? lo : hi) = mid;
      }
      const double delta = round_to((lo + hi) / 2, 2);
      if (delta == 0) continue;
      for (std::size_t i : members) {
        for (auto& w : jobs[i].weather) {
          w.t_max = round_to(std::clamp(w.t_max + delta, -45.0, 45.0), 2);
          w.t_min = round_to(std::clamp(w.t_min + delta, -45.0, 45.0), 2);
          if (w.t_min >= w.t_max) w.t_min = w.t_max - 0.5;
        }
        build_features(jobs[i]);
      }
    }
    global = collect();
  }

  // Signals are re-centred per year so each year's yields follow its own
  // target moments.
  for (std::size_t yi = 0; yi < cfg.years.size(); ++yi) {
    std::vector<std::vector<double>> ys, yw;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].year_index == yi) {
        ys.push_back(jobs[i].soil_features);
        yw.push_back(jobs[i].weather_features);
        members.push_back(i);
      }
    YieldCalibration cal = global;
    fit_signal_moments(cal, ys, yw, cfg);
    for (std::size_t i : members) {
      Job& j = jobs[i];
      j.crop.yield_t_ha = gen_yield(j.soil_features, j.weather_features, cfg.years[yi], cfg, cal,
                                    derive_seed(derive_seed(seed, kYieldStream),
                                                static_cast<std::uint64_t>(j.zone) * 10000u +
                                                    static_cast<std::uint64_t>(j.crop.year)));
    }
  }

  Dataset data;
  for (auto& [z, hist] : histories)
    for (auto& r : hist) data.soil.push_back(std::move(r));
  std::size_t total_days = 0;
  for (const auto& j : jobs) total_days += j.weather.size();
  data.weather.reserve(total_days);
  for (auto& j : jobs) {
    for (auto& w : j.weather) data.weather.push_back(std::move(w));
    data.crop.push_back(std::move(j.crop));
  }
  return data;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", (dir / name).string()));
    return out;
  };
  {
    auto out = open("soil.csv");
    write_soil_csv(out, data.soil);
  }
  {
    auto out = open("weather.csv");
    write_weather_csv(out, data.weather);
  }
  {
    auto out = open("crop.csv");
    write_crop_csv(out, data.crop);
  }
}

}  // namespace cropyield::synth
