#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "cropyield/features.hpp"
#include "cropyield/ingest.hpp"
#include "cropyield/parallel.hpp"
#include "cropyield/synth.hpp"
#include "support.hpp"

using namespace cropyield;
using namespace cropyield::synth;

namespace {

GenConfig small_config() {
  GenConfig c;
  c.years = {{2015, 40, 8.0, 1.5}, {2016, 30, 9.0, 1.2}, {2017, 35, 7.5, 2.0}};
  c.zone_pool = 60;
  return c;
}

const Dataset& default_dataset() {
  static const Dataset d = gen_dataset(GenConfig{}, 42);
  return d;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Correlation between yield and the generator's weather signal, pooled over
// per-year standardized values.
double weather_yield_correlation(const Dataset& data, const GenConfig& cfg) {
  auto asm_ = assemble_instances(data, FeatureMode::soil_weather);
  std::vector<std::vector<double>> soil, weather;
  for (const auto& i : asm_.instances) {
    soil.push_back(i.soil_features);
    weather.push_back(i.weather_features);
  }
  const auto cal = calibrate(soil, weather, cfg);
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_year;
  for (std::size_t k = 0; k < asm_.instances.size(); ++k) {
    auto s = yield_signals(soil[k], weather[k], cfg, cal);
    by_year[asm_.instances[k].year].first.push_back(s.weather);
    by_year[asm_.instances[k].year].second.push_back(asm_.instances[k].yield_t_ha);
  }
  double sum = 0;
  for (const auto& [y, v] : by_year) sum += pearson(v.first, v.second);
  return sum / static_cast<double>(by_year.size());
}

}  // namespace

TEST(SynthWeather, RecordsAreValidAndCoverTheSeason) {
  GenConfig cfg;
  ValidationConfig v;
  for (int zone = 1; zone <= 20; ++zone) {
    auto days = gen_weather(zone, 2016, cfg, 7);
    ASSERT_GE(days.size(), 280u);
    const Date sow = sowing_date(zone, 2016, cfg, 7);
    EXPECT_LE(days.front().date, sow);
    for (std::size_t i = 0; i < days.size(); ++i) {
      const auto& d = days[i];
      EXPECT_EQ(d.zone_id, zone_id(zone));
      EXPECT_LT(d.t_min, d.t_max);
      EXPECT_GE(d.humidity, 25.0);
      EXPECT_LE(d.humidity, 100.0);
      EXPECT_GE(d.precip, 0.0);
      EXPECT_FALSE(validate(d, v).has_value());
      if (i) {
        EXPECT_EQ(days_between(days[i - 1].date, d.date), 1);
      }
    }
    // All 40 weeks from sowing are complete.
    auto weeks = aggregate_weeks(days, sow);
    for (int w = 1; w <= 40; ++w) EXPECT_TRUE(weeks.count(w)) << zone << " week " << w;
  }
}

TEST(SynthWeather, SummerWarmerThanWinter) {
  GenConfig cfg;
  double jan = 0, jul = 0;
  int nj = 0, nl = 0;
  for (int zone = 1; zone <= 50; ++zone)
    for (const auto& d : gen_weather(zone, 2015, cfg, 11)) {
      const unsigned m = static_cast<unsigned>(d.date.month());
      if (m == 1) {
        jan += d.daily_mean();
        ++nj;
      } else if (m == 7) {
        jul += d.daily_mean();
        ++nl;
      }
    }
  ASSERT_GT(nj, 0);
  ASSERT_GT(nl, 0);
  EXPECT_GT(jul / nl, jan / nj + 5.0);
}

TEST(SynthWeather, DeterministicPerZoneYearAndSeed) {
  GenConfig cfg;
  EXPECT_EQ(gen_weather(3, 2014, cfg, 1), gen_weather(3, 2014, cfg, 1));
  EXPECT_NE(gen_weather(3, 2014, cfg, 1), gen_weather(3, 2014, cfg, 2));
  EXPECT_NE(gen_weather(3, 2014, cfg, 1), gen_weather(4, 2014, cfg, 1));
}

TEST(SynthDates, SowingWindowAndHarvestLag) {
  GenConfig cfg;
  for (int zone = 1; zone <= 100; ++zone) {
    const Date sow = sowing_date(zone, 2016, cfg, 5);
    EXPECT_EQ(static_cast<int>(sow.year()), 2015);  // autumn before harvest
    const int offset = days_between(testsupport::date(2015, 9, 20), sow);
    EXPECT_GE(offset, 0);
    EXPECT_LE(offset, cfg.sowing_window_days);
    const int lag = days_between(sow, harvest_date(zone, 2016, cfg, 5)) - 280;
    EXPECT_GE(lag, cfg.harvest_lag_min);
    EXPECT_LE(lag, cfg.harvest_lag_max);
  }
}

TEST(SynthSoil, HistoriesValidateAndStartEarly) {
  GenConfig cfg;
  ValidationConfig v;
  for (int zone = 1; zone <= 100; ++zone) {
    auto hist = gen_soil(zone, cfg, 3);
    ASSERT_FALSE(hist.empty());
    EXPECT_LE(hist.front().test_year, cfg.years.front().year);
    for (std::size_t i = 0; i < hist.size(); ++i) {
      EXPECT_FALSE(validate(hist[i], v).has_value());
      EXPECT_EQ(hist[i].zone_id, zone_id(zone));
      if (i) {
        const int gap = hist[i].test_year - hist[i - 1].test_year;
        EXPECT_GE(gap, cfg.test_interval_min);
        EXPECT_LE(gap, cfg.test_interval_max);
        // Categories are stable properties of the zone.
        EXPECT_EQ(hist[i].soil_type, hist[0].soil_type);
      }
    }
  }
}

TEST(SynthDataset, DefaultShapeAndCarryForward) {
  const Dataset& d = default_dataset();
  EXPECT_EQ(d.crop.size(), 1872u);
  std::map<int, int> per_year;
  for (const auto& c : d.crop) ++per_year[c.year];
  for (const auto& t : default_years()) EXPECT_EQ(per_year[t.year], t.zones) << t.year;
  std::set<std::pair<std::string, int>> tested;
  for (const auto& s : d.soil) tested.insert({s.zone_id, s.test_year});
  int carried = 0;
  for (const auto& c : d.crop) {
    auto s = carry_forward_soil(d.soil, c.zone_id, c.year);
    ASSERT_TRUE(s.has_value()) << c.zone_id << " " << c.year;
    if (!tested.count({c.zone_id, c.year})) ++carried;
  }
  EXPECT_GT(carried, 0);
  EXPECT_LT(carried, static_cast<int>(d.crop.size()));
}

TEST(SynthDataset, PerYearMomentsNearTargets) {
  const Dataset& d = default_dataset();
  for (const auto& t : default_years()) {
    std::vector<double> y;
    for (const auto& c : d.crop)
      if (c.year == t.year) y.push_back(c.yield_t_ha);
    double m = 0;
    for (double v : y) m += v;
    m /= y.size();
    double ss = 0;
    for (double v : y) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / (y.size() - 1));
    EXPECT_NEAR(m, t.yield_mean, 0.35) << t.year;
    EXPECT_NEAR(sd, t.yield_std, 0.35) << t.year;
  }
}

TEST(SynthDataset, DeterministicAcrossThreadCounts) {
  const GenConfig cfg = small_config();
  set_thread_count(1);
  const Dataset a = gen_dataset(cfg, 9);
  set_thread_count(4);
  const Dataset b = gen_dataset(cfg, 9);
  set_thread_count(0);
  EXPECT_EQ(a.crop, b.crop);
  EXPECT_EQ(a.soil, b.soil);
  EXPECT_EQ(a.weather, b.weather);
  EXPECT_NE(a.crop, gen_dataset(cfg, 10).crop);
}

TEST(SynthDataset, ClosedLoopThroughIngest) {
  const GenConfig cfg = small_config();
  const Dataset d = gen_dataset(cfg, 21);
  auto dir = testsupport::scratch_dir("synth_loop");
  write_dataset(dir, d);
  auto r = ingest_files(dir / "soil.csv", dir / "weather.csv", dir / "crop.csv");
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.data.crop, d.crop);
  EXPECT_EQ(r.data.soil, d.soil);
  EXPECT_EQ(r.data.weather, d.weather);
  auto a = assemble_instances(r.data, FeatureMode::soil_weather);
  EXPECT_EQ(a.instances.size(), d.crop.size());
  EXPECT_TRUE(a.log.empty());
}

TEST(SynthYield, NullWeightMakesYieldIgnoreWeather) {
  GenConfig cfg;
  cfg.weather_weight = 0;
  testsupport::Gen g(31);
  std::vector<std::vector<double>> soil, weather;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> s, w;
    for (int j = 0; j < 8; ++j) s.push_back(testsupport::uniform(g, 0, 5));
    for (int j = 0; j < 144; ++j) w.push_back(testsupport::uniform(g, 0, 40));
    soil.push_back(s);
    weather.push_back(w);
  }
  const auto cal = calibrate(soil, weather, cfg);
  const YearTarget t{2018, 50, 9.36, 1.75};
  for (int i = 0; i + 1 < 50; ++i)
    EXPECT_EQ(gen_yield(soil[i], weather[i], t, cfg, cal, 5), gen_yield(soil[i], weather[i + 1], t, cfg, cal, 5));
  GenConfig on;
  const auto cal_on = calibrate(soil, weather, on);
  int differ = 0;
  for (int i = 0; i + 1 < 50; ++i)
    differ += gen_yield(soil[i], weather[i], t, on, cal_on, 5) != gen_yield(soil[i], weather[i + 1], t, on, cal_on, 5);
  EXPECT_GT(differ, 40);
}

TEST(SynthYield, WeatherSignalDrivesDefaultYieldOnly) {
  const double with = weather_yield_correlation(default_dataset(), GenConfig{});
  GenConfig null_cfg;
  null_cfg.weather_weight = 0;
  const double without = weather_yield_correlation(gen_dataset(null_cfg, 42), null_cfg);
  EXPECT_GT(with, 0.5);
  EXPECT_LT(std::abs(without), 0.15);
}

namespace {

std::map<int, double> year_mean_temp(const Dataset& d) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& w : d.weather) {
    // Seasons start in autumn and end by early summer.
    const int year = int(w.date.year()) + (unsigned(w.date.month()) >= 9 ? 1 : 0);
    auto& [sum, n] = acc[year];
    sum += (w.t_max + w.t_min) / 2;
    ++n;
  }
  std::map<int, double> out;
  for (auto& [y, a] : acc) out[y] = a.first / a.second;
  return out;
}

}  // namespace

TEST(SynthYearLink, WarmerYearsHaveHigherTargetMeans) {
  GenConfig cfg;
  const auto temps = year_mean_temp(default_dataset());
  for (const auto& a : cfg.years)
    for (const auto& b : cfg.years)
      if (a.yield_mean + 0.3 < b.yield_mean) {
        EXPECT_LT(temps.at(a.year), temps.at(b.year)) << a.year << " " << b.year;
      }
}

TEST(SynthYearLink, NoShiftWithoutLinkOrWeatherWeight) {
  for (int variant = 0; variant < 2; ++variant) {
    GenConfig cfg = small_config();
    (variant == 0 ? cfg.year_link : cfg.weather_weight) = 0;
    const Dataset d = gen_dataset(cfg, 9);
    const auto& c = d.crop.front();
    const auto season = gen_weather(std::stoi(c.zone_id.substr(1)), c.year, cfg, 9);
    const auto first = std::find(d.weather.begin(), d.weather.end(), season.front());
    ASSERT_NE(first, d.weather.end()) << variant;
    EXPECT_TRUE(std::equal(season.begin(), season.end(), first)) << variant;
  }
}

TEST(SynthYield, ClippedAndRounded) {
  for (const auto& c : default_dataset().crop) {
    EXPECT_GE(c.yield_t_ha, 1.0);
    EXPECT_LE(c.yield_t_ha, 18.0);
    EXPECT_NEAR(c.yield_t_ha * 100, std::round(c.yield_t_ha * 100), 1e-6);
  }
}

TEST(SynthZones, SubsetsAreSortedDistinctAndInPool) {
  GenConfig cfg;
  for (const auto& t : default_years()) {
    auto z = zones_for_year(t, cfg, 42);
    ASSERT_EQ(static_cast<int>(z.size()), t.zones);
    EXPECT_TRUE(std::is_sorted(z.begin(), z.end()));
    EXPECT_EQ(std::set<int>(z.begin(), z.end()).size(), z.size());
    EXPECT_GE(z.front(), 1);
    EXPECT_LE(z.back(), cfg.zone_pool);
  }
  EXPECT_EQ(zone_id(7), "Z0007");
}

TEST(SynthConfig, ValidateRejectsBadSettings) {
  GenConfig c;
  c.zone_pool = 100;  // fewer than the 362 zones asked for in 2015
  EXPECT_THROW(c.validate(), Error);
  c = GenConfig{};
  c.wet_day_prob = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = GenConfig{};
  c.harvest_lag_min = 30;
  c.harvest_lag_max = 10;
  EXPECT_THROW(c.validate(), Error);
  c = GenConfig{};
  c.weather_weight = c.soil_weight = c.noise_weight = 0;
  EXPECT_THROW(c.validate(), Error);
  c = GenConfig{};
  c.year_link = 1.5;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(GenConfig{}.validate());
}
