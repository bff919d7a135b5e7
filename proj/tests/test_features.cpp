#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cropyield/features.hpp"
#include "cropyield/parallel.hpp"
#include "support.hpp"

using namespace cropyield;
using testsupport::date;
using testsupport::day;
using testsupport::Gen;

namespace {

// Straight-line restatement of the six weekly formulas.
struct OracleWeek {
  double t_avg, dd_sum, egd, ap_sum, sr_sum, h_avg;
};

OracleWeek oracle_week(const std::vector<WeatherDaily>& days) {
  const double n = static_cast<double>(days.size());
  double t = 0, dd = 0, egd = 0, ap = 0, sr = 0, h = 0;
  for (const auto& d : days) {
    const double m = 0.5 * d.t_max + 0.5 * d.t_min;
    t += m / n;
    dd += m > 0 ? m : 0;
    egd += m > 5 ? 1 : 0;
    ap += d.precip;
    sr += d.solar;
    h += d.humidity / n;
  }
  return {t, dd, egd, ap, sr, h};
}

bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST(WeeklyAggregate, HandComputedWeek) {
  std::vector<WeatherDaily> days;
  // daily means: 0, 5, 5.5, -2, 10, 7, 3
  const double tmin[] = {-2, 3, 4, -4, 6, 5, 1};
  const double tmax[] = {2, 7, 7, 0, 14, 9, 5};
  for (int i = 0; i < 7; ++i)
    days.push_back(day(date(2018, 3, 1 + i), tmin[i], tmax[i], i * 1.5, 10 + i, 70 + i));
  auto w = weekly_aggregate(days, 20);
  EXPECT_NEAR(w.t_avg, 28.5 / 7, 1e-12);
  EXPECT_NEAR(w.dd_sum, 30.5, 1e-12);
  EXPECT_EQ(w.egd_total, 3);  // 5.0 exactly is not above the threshold
  EXPECT_NEAR(w.ap_sum, 31.5, 1e-12);
  EXPECT_NEAR(w.sr_sum, 91, 1e-12);
  EXPECT_NEAR(w.h_avg, 73, 1e-12);
  EXPECT_EQ(w.week_index, 20);
  EXPECT_EQ(w.days, 7);
}

TEST(WeeklyAggregate, MatchesOracleOnRandomWeeks) {
  Gen g(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = testsupport::uniform_int(g, 1, 7);
    std::vector<WeatherDaily> days;
    for (int i = 0; i < n; ++i) days.push_back(testsupport::random_day(g, add_days(date(2018, 1, 1), i)));
    const auto w = weekly_aggregate(days);
    const auto o = oracle_week(days);
    EXPECT_TRUE(close(w.t_avg, o.t_avg)) << rep;
    EXPECT_TRUE(close(w.dd_sum, o.dd_sum)) << rep;
    EXPECT_EQ(w.egd_total, static_cast<int>(o.egd)) << rep;
    EXPECT_TRUE(close(w.ap_sum, o.ap_sum)) << rep;
    EXPECT_TRUE(close(w.sr_sum, o.sr_sum)) << rep;
    EXPECT_TRUE(close(w.h_avg, o.h_avg)) << rep;
    EXPECT_GE(w.egd_total, 0);
    EXPECT_LE(w.egd_total, n);
    EXPECT_GE(w.dd_sum, 0);
  }
}

TEST(WeeklyAggregate, PermutationInvariantBitForBit) {
  Gen g(7);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<WeatherDaily> days;
    for (int i = 0; i < 7; ++i) days.push_back(testsupport::random_day(g, add_days(date(2018, 1, 1), i)));
    const auto a = weekly_aggregate(days).values();
    std::shuffle(days.begin(), days.end(), g);
    const auto b = weekly_aggregate(days).values();
    EXPECT_EQ(a, b);
  }
}

TEST(WeeklyAggregate, BoundaryCases) {
  std::vector<WeatherDaily> cold(7, day(date(2018, 1, 1), -8, -2));
  auto w = weekly_aggregate(cold);
  EXPECT_EQ(w.dd_sum, 0.0);
  EXPECT_EQ(w.egd_total, 0);
  std::vector<WeatherDaily> warm(7, day(date(2018, 6, 1), 10, 20));
  EXPECT_EQ(weekly_aggregate(warm).egd_total, 7);
  std::vector<WeatherDaily> exact(7, day(date(2018, 6, 1), 5, 5));
  EXPECT_EQ(weekly_aggregate(exact).egd_total, 0);
  EXPECT_THROW(weekly_aggregate(std::vector<WeatherDaily>{}), Error);
  EXPECT_THROW(weekly_aggregate(std::vector<WeatherDaily>(8, day(date(2018, 1, 1), 0, 1))), Error);
}

TEST(AssignWeeks, AnchorsOnSowingDay) {
  const Date sowing = date(2017, 10, 1);
  std::vector<WeatherDaily> days;
  for (int i = -3; i < 30; ++i) days.push_back(day(add_days(sowing, i), 0, 1));
  auto weeks = assign_weeks(days, sowing);
  EXPECT_EQ(weeks.size(), 5u);
  EXPECT_EQ(weeks.at(1).front().date, sowing);
  EXPECT_EQ(weeks.at(1).size(), 7u);
  EXPECT_EQ(weeks.at(2).front().date, add_days(sowing, 7));
  EXPECT_EQ(weeks.at(5).size(), 2u);
  // day 112 is the first day of week 17
  std::vector<WeatherDaily> one{day(add_days(sowing, 112), 0, 1)};
  EXPECT_EQ(assign_weeks(one, sowing).begin()->first, 17);
  EXPECT_EQ(assign_weeks(std::vector<WeatherDaily>{day(add_days(sowing, 111), 0, 1)}, sowing).begin()->first, 16);
}

TEST(AggregateWeeks, DropsShortWeeks) {
  const Date sowing = date(2017, 10, 1);
  std::vector<WeatherDaily> days;
  for (int i = 0; i < 21; ++i)
    if (i != 9) days.push_back(day(add_days(sowing, i), 0, 1));
  auto full = aggregate_weeks(days, sowing, 7);
  EXPECT_EQ(full.size(), 2u);
  EXPECT_FALSE(full.count(2));
  auto lax = aggregate_weeks(days, sowing, 6);
  EXPECT_EQ(lax.size(), 3u);
  EXPECT_EQ(lax.at(2).days, 6);
}

TEST(FeatureNames, DocumentedOrder) {
  const auto names = feature_names(FeatureMode::soil_weather);
  ASSERT_EQ(names.size(), 152u);
  const std::vector<std::string> soil{"p", "k", "mg", "ph", "soil_type", "stone_content", "organic_matter", "caco3"};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(names[i], soil[i]);
  const char* aggs[] = {"t_avg", "dd_sum", "egd_total", "ap_sum", "sr_sum", "h_avg"};
  std::size_t k = 8;
  for (int w = 17; w <= 40; ++w)
    for (const char* a : aggs) EXPECT_EQ(names[k++], "w" + std::to_string(w) + "_" + a);
  EXPECT_EQ(feature_names(FeatureMode::soil_only).size(), 8u);
}

namespace {

SoilRecord soil(const std::string& zone, int year) {
  return {zone, year, 20, 150, 60, 7.0, "medium", "low", "moderate", "calc"};
}

std::map<int, WeeklyWeather> full_weeks() {
  std::map<int, WeeklyWeather> weeks;
  for (int w = 1; w <= 40; ++w) {
    WeeklyWeather ww;
    ww.week_index = w;
    ww.t_avg = w;
    ww.dd_sum = w * 7;
    ww.egd_total = w % 8;
    ww.ap_sum = 100 + w;
    ww.sr_sum = 200 + w;
    ww.h_avg = 50 + w * 0.5;
    ww.days = 7;
    weeks[w] = ww;
  }
  return weeks;
}

}  // namespace

TEST(BuildInstance, LayoutAndMissingWeeks) {
  CropRecord crop{"Z1", 2018, date(2017, 10, 1), date(2018, 8, 1), 9.5};
  auto weeks = full_weeks();
  auto r = build_instance(crop, soil("Z1", 2016), weeks, FeatureMode::soil_weather);
  ASSERT_TRUE(r.instance);
  const auto& inst = *r.instance;
  EXPECT_EQ(inst.soil_features, (std::vector<double>{20, 150, 60, 7, 1, 1, 1, 2}));
  ASSERT_EQ(inst.weather_features.size(), 144u);
  EXPECT_EQ(inst.weather_features[0], 17);       // w17 t_avg
  EXPECT_EQ(inst.weather_features[1], 119);      // w17 dd_sum
  EXPECT_EQ(inst.weather_features[143], 70);     // w40 h_avg
  EXPECT_EQ(inst.yield_t_ha, 9.5);

  weeks.erase(23);
  weeks.erase(31);
  weeks.erase(5);  // outside the growth window: irrelevant
  r = build_instance(crop, soil("Z1", 2016), weeks, FeatureMode::soil_weather);
  EXPECT_FALSE(r.instance);
  EXPECT_EQ(r.missing_weeks, (std::vector<int>{23, 31}));
  EXPECT_EQ(r.reason(), "missing weeks [23,31]");

  r = build_instance(crop, soil("Z1", 2016), {}, FeatureMode::soil_only);
  ASSERT_TRUE(r.instance);
  EXPECT_TRUE(r.instance->weather_features.empty());

  auto bad = soil("Z1", 2016);
  bad.caco3 = "chalky";
  EXPECT_THROW(build_instance(crop, bad, weeks, FeatureMode::soil_only), Error);
}

TEST(BuildMatrix, ShapesAndErrors) {
  CropRecord crop{"Z1", 2018, date(2017, 10, 1), date(2018, 8, 1), 9.5};
  auto inst = *build_instance(crop, soil("Z1", 2016), full_weeks(), FeatureMode::soil_weather).instance;
  auto inst2 = inst;
  inst2.zone_id = "Z2";
  std::vector<Instance> v{inst, inst2};
  auto m = build_matrix(v, FeatureMode::soil_weather);
  EXPECT_EQ(m.cols(), 152u);
  EXPECT_EQ(m.rows, 2u);
  EXPECT_EQ(m.values.size(), 304u);
  EXPECT_EQ(m.meta[1].zone_id, "Z2");
  auto s = build_matrix(v, FeatureMode::soil_only);
  EXPECT_EQ(s.cols(), 8u);
  EXPECT_EQ(s.row(1)[3], 7.0);

  v.push_back(inst);
  EXPECT_THROW(build_matrix(v, FeatureMode::soil_weather), Error);
  v.pop_back();
  v[1].weather_features.pop_back();
  EXPECT_THROW(build_matrix(v, FeatureMode::soil_weather), Error);
  v[1].weather_features.push_back(std::nan(""));
  EXPECT_THROW(build_matrix(v, FeatureMode::soil_weather), Error);

  auto sel = m.select_rows(std::vector<std::size_t>{1});
  EXPECT_EQ(sel.rows, 1u);
  EXPECT_EQ(sel.meta[0].zone_id, "Z2");

  std::ostringstream csv;
  write_features_csv(csv, s);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "zone_id,year,p,k,mg,ph,soil_type,stone_content,organic_matter,caco3,yield_t_ha");
}

namespace {

Dataset small_dataset(Gen& g, int zones, int years) {
  Dataset d;
  for (int z = 0; z < zones; ++z) {
    const std::string id = "Z" + std::to_string(z);
    d.soil.push_back(soil(id, 2012 + (z % 3)));
    for (int y = 2014; y < 2014 + years; ++y) {
      const Date sowing = add_days(date(y - 1, 9, 25), testsupport::uniform_int(g, 0, 30));
      d.crop.push_back({id, y, sowing, add_days(sowing, 300), testsupport::uniform(g, 5, 12)});
      for (int i = 0; i < 280; ++i) {
        if (z % 7 == 3 && y == 2015 && i == 150) continue;  // one hole inside the growth window
        d.weather.push_back(testsupport::random_day(g, add_days(sowing, i)));
        d.weather.back().zone_id = id;
      }
    }
  }
  d.crop.push_back({"NOSOIL", 2015, date(2014, 10, 1), date(2015, 8, 1), 8});
  return d;
}

}  // namespace

TEST(Assemble, ParallelMatchesSerialAndLogsDrops) {
  Gen g(99);
  Dataset d = small_dataset(g, 15, 3);
  std::shuffle(d.weather.begin(), d.weather.end(), g);
  set_thread_count(4);
  auto par = assemble_instances(d, FeatureMode::soil_weather);
  set_thread_count(0);
  auto ser = assemble_instances_serial(d, FeatureMode::soil_weather);
  ASSERT_EQ(par.instances.size(), ser.instances.size());
  for (std::size_t i = 0; i < par.instances.size(); ++i) {
    EXPECT_EQ(par.instances[i].zone_id, ser.instances[i].zone_id);
    EXPECT_EQ(par.instances[i].soil_features, ser.instances[i].soil_features);
    EXPECT_EQ(par.instances[i].weather_features, ser.instances[i].weather_features);
  }
  EXPECT_EQ(par.log, ser.log);
  // zones 3 and 10 lose 2015 (missing day), plus the zone without soil.
  EXPECT_EQ(par.instances.size(), 15u * 3u - 2u);
  EXPECT_EQ(par.log.size(), 3u);
  EXPECT_EQ(par.log.count_prefix("rejected:"), 3u);

  AssemblyOptions lax;
  lax.min_week_days = 6;
  EXPECT_EQ(assemble_instances(d, FeatureMode::soil_weather, lax).instances.size(), 45u);

  auto soil_only = assemble_instances(d, FeatureMode::soil_only);
  EXPECT_EQ(soil_only.instances.size(), 45u);
}

TEST(Assemble, MatchesDirectComputation) {
  Gen g(5);
  Dataset d = small_dataset(g, 2, 1);
  auto a = assemble_instances(d, FeatureMode::soil_weather);
  ASSERT_EQ(a.instances.size(), 2u);
  const auto& crop = d.crop[0];
  std::vector<WeatherDaily> mine;
  for (const auto& w : d.weather)
    if (w.zone_id == crop.zone_id) mine.push_back(w);
  std::size_t k = 0;
  for (int wk = 17; wk <= 40; ++wk) {
    std::vector<WeatherDaily> bucket;
    for (const auto& w : mine) {
      const int off = days_between(crop.sowing_date, w.date);
      if (off >= (wk - 1) * 7 && off < wk * 7) bucket.push_back(w);
    }
    const auto o = oracle_week(bucket);
    const double expect[6] = {o.t_avg, o.dd_sum, o.egd, o.ap_sum, o.sr_sum, o.h_avg};
    for (double e : expect) EXPECT_TRUE(close(a.instances[0].weather_features[k++], e));
  }
}
