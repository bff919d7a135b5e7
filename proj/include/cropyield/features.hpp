#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cropyield/domain.hpp"
#include "cropyield/ingest.hpp"

namespace cropyield {

// Growth window, in weeks counted from the sowing week (week 1).
inline constexpr int kFirstGrowthWeek = 17;
inline constexpr int kLastGrowthWeek = 40;
inline constexpr int kGrowthWeeks = kLastGrowthWeek - kFirstGrowthWeek + 1;

inline constexpr std::array<std::string_view, 6> kWeeklyAggregateNames = {
    "t_avg", "dd_sum", "egd_total", "ap_sum", "sr_sum", "h_avg"};
inline constexpr std::size_t kSoilFeatureCount = 8;
inline constexpr std::size_t kWeatherFeatureCount = kGrowthWeeks * kWeeklyAggregateNames.size();

// Daily mean temperature above this counts as an effective growing day.
inline constexpr double kGrowingDayThreshold = 5.0;

struct WeeklyWeather {
  int week_index = 0;
  double t_avg = 0;
  double dd_sum = 0;
  int egd_total = 0;
  double ap_sum = 0;
  double sr_sum = 0;
  double h_avg = 0;
  int days = 0;

  /// Values in kWeeklyAggregateNames order.
  std::array<double, 6> values() const;
};

enum class FeatureMode { soil_only, soil_weather };

std::string_view mode_name(FeatureMode m);
FeatureMode parse_mode(std::string_view text);

/// Buckets days into 7-day weeks anchored at the sowing date (week 1 starts
/// on the sowing day). Days before sowing are dropped.
std::map<int, std::vector<WeatherDaily>> assign_weeks(std::span<const WeatherDaily> days, Date sowing);

/// Six weekly agro-climatic aggregates of 1..7 days. Throws Error on an
/// empty or oversized bucket.
WeeklyWeather weekly_aggregate(std::span<const WeatherDaily> week_days, int week_index = 0);

/// assign_weeks + weekly_aggregate, keeping only weeks with at least
/// `min_days` observed days.
std::map<int, WeeklyWeather> aggregate_weeks(std::span<const WeatherDaily> days, Date sowing,
                                             int min_days = 7);

struct Instance {
  std::string zone_id;
  int year = 0;
  std::vector<double> soil_features;
  std::vector<double> weather_features;  // empty in soil-only mode
  double yield_t_ha = 0;
};

const std::vector<std::string>& soil_feature_names();
const std::vector<std::string>& weather_feature_names();
std::vector<std::string> feature_names(FeatureMode mode);

struct InstanceResult {
  std::optional<Instance> instance;
  std::vector<int> missing_weeks;

  std::string reason() const;
};

/// Soil-only mode ignores `weeks`. Soil+weather mode requires every growth
/// window week to be present and otherwise reports the missing ones.
InstanceResult build_instance(const CropRecord& crop, const SoilRecord& soil,
                              const std::map<int, WeeklyWeather>& weeks, FeatureMode mode,
                              const OrdinalOrders& orders = OrdinalOrders::defaults());

struct RowMeta {
  std::string zone_id;
  int year = 0;
  bool operator==(const RowMeta&) const = default;
};

struct MatrixView {
  std::span<const double> data;  // row-major
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

struct DesignMatrix {
  std::vector<std::string> column_names;
  std::size_t rows = 0;
  std::vector<double> values;  // row-major rows x cols
  std::vector<double> target;
  std::vector<RowMeta> meta;

  std::size_t cols() const { return column_names.size(); }
  MatrixView view() const { return {values, rows, cols()}; }
  std::span<const double> row(std::size_t i) const { return view().row(i); }
  DesignMatrix select_rows(std::span<const std::size_t> indices) const;
};

/// Rows follow input order. Soil-only mode uses only the soil part of each
/// instance. Throws Error on a duplicate (zone_id, year) or a weather block
/// of the wrong size.
DesignMatrix build_matrix(std::span<const Instance> instances, FeatureMode mode);

/// zone_id,year,<feature columns>,yield_t_ha
void write_features_csv(std::ostream& out, const DesignMatrix& m);

struct AssemblyOptions {
  OrdinalOrders ordinals = OrdinalOrders::defaults();
  int min_week_days = 7;
};

struct Assembly {
  std::vector<Instance> instances;
  RejectionLog log;  // zone-years dropped, keyed by crop record ordinal
};

/// Builds one instance per crop record (soil carried forward, weather
/// aggregated over the growth window). Parallel over crop records; output
/// order is crop record order.
Assembly assemble_instances(const Dataset& data, FeatureMode mode, const AssemblyOptions& opts = {});
/// Single-threaded reference for assemble_instances.
Assembly assemble_instances_serial(const Dataset& data, FeatureMode mode,
                                   const AssemblyOptions& opts = {});

}  // namespace cropyield
