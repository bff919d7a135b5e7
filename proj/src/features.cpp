#include "cropyield/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

namespace cropyield {

std::array<double, 6> WeeklyWeather::values() const {
  return {t_avg, dd_sum, static_cast<double>(egd_total), ap_sum, sr_sum, h_avg};
}

std::string_view mode_name(FeatureMode m) {
  return m == FeatureMode::soil_only ? "soil" : "soil_weather";
}

FeatureMode parse_mode(std::string_view text) {
  if (text == "soil" || text == "soil_only") return FeatureMode::soil_only;
  if (text == "soil_weather") return FeatureMode::soil_weather;
  throw Error(fmt::format("unknown feature mode '{}'", text));
}

std::map<int, std::vector<WeatherDaily>> assign_weeks(std::span<const WeatherDaily> days, Date sowing) {
  std::map<int, std::vector<WeatherDaily>> weeks;
  for (const auto& d : days) {
    int offset = days_between(sowing, d.date);
    if (offset < 0) continue;
    weeks[offset / 7 + 1].push_back(d);
  }
  return weeks;
}

WeeklyWeather weekly_aggregate(std::span<const WeatherDaily> week_days, int week_index) {
  if (week_days.empty()) throw Error(fmt::format("week {} has no days", week_index));
  if (week_days.size() > 7)
    throw Error(fmt::format("week {} has {} days", week_index, week_days.size()));

  // Fixed summation order so the result does not depend on input order.
  std::vector<const WeatherDaily*> sorted;
  sorted.reserve(week_days.size());
  for (const auto& d : week_days) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(), [](const WeatherDaily* a, const WeatherDaily* b) {
    return std::tie(a->date, a->t_min, a->t_max, a->precip, a->solar, a->humidity) <
           std::tie(b->date, b->t_min, b->t_max, b->precip, b->solar, b->humidity);
  });

  WeeklyWeather w;
  w.week_index = week_index;
  w.days = static_cast<int>(sorted.size());
  double mean_sum = 0, humidity_sum = 0;
  for (const auto* d : sorted) {
    double mean = d->daily_mean();
    mean_sum += mean;
    w.dd_sum += std::max(0.0, mean);
    if (mean > kGrowingDayThreshold) ++w.egd_total;
    w.ap_sum += d->precip;
    w.sr_sum += d->solar;
    humidity_sum += d->humidity;
  }
  w.t_avg = mean_sum / w.days;
  w.h_avg = humidity_sum / w.days;
  return w;
}

std::map<int, WeeklyWeather> aggregate_weeks(std::span<const WeatherDaily> days, Date sowing,
                                             int min_days) {
  std::map<int, WeeklyWeather> out;
  for (const auto& [week, bucket] : assign_weeks(days, sowing)) {
    if (static_cast<int>(bucket.size()) < min_days) continue;
    out.emplace(week, weekly_aggregate(bucket, week));
  }
  return out;
}

const std::vector<std::string>& soil_feature_names() {
  static const std::vector<std::string> names = {
      "p", "k", "mg", "ph", "soil_type", "stone_content", "organic_matter", "caco3"};
  return names;
}

const std::vector<std::string>& weather_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (int w = kFirstGrowthWeek; w <= kLastGrowthWeek; ++w)
      for (auto agg : kWeeklyAggregateNames) n.push_back(fmt::format("w{}_{}", w, agg));
    return n;
  }();
  return names;
}

std::vector<std::string> feature_names(FeatureMode mode) {
  auto names = soil_feature_names();
  if (mode == FeatureMode::soil_weather) {
    const auto& w = weather_feature_names();
    names.insert(names.end(), w.begin(), w.end());
  }
  return names;
}

std::string InstanceResult::reason() const {
  if (instance) return {};
  return fmt::format("missing weeks [{}]", fmt::join(missing_weeks, ","));
}

InstanceResult build_instance(const CropRecord& crop, const SoilRecord& soil,
                              const std::map<int, WeeklyWeather>& weeks, FeatureMode mode,
                              const OrdinalOrders& orders) {
  InstanceResult result;
  Instance inst;
  inst.zone_id = crop.zone_id;
  inst.year = crop.year;
  inst.yield_t_ha = crop.yield_t_ha;
  inst.soil_features = {soil.p, soil.k, soil.mg, soil.ph};
  for (auto f : kOrdinalFields)
    inst.soil_features.push_back(static_cast<double>(orders.encode(f, soil.ordinal(f))));

  if (mode == FeatureMode::soil_weather) {
    inst.weather_features.reserve(kWeatherFeatureCount);
    for (int w = kFirstGrowthWeek; w <= kLastGrowthWeek; ++w) {
      auto it = weeks.find(w);
      if (it == weeks.end()) {
        result.missing_weeks.push_back(w);
        continue;
      }
      for (double v : it->second.values()) inst.weather_features.push_back(v);
    }
    if (!result.missing_weeks.empty()) return result;
  }
  result.instance = std::move(inst);
  return result;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> indices) const {
  DesignMatrix out;
  out.column_names = column_names;
  out.rows = indices.size();
  out.values.reserve(indices.size() * cols());
  for (auto i : indices) {
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.target.push_back(target[i]);
    out.meta.push_back(meta[i]);
  }
  return out;
}

DesignMatrix build_matrix(std::span<const Instance> instances, FeatureMode mode) {
  DesignMatrix m;
  m.column_names = feature_names(mode);
  m.rows = instances.size();
  m.values.reserve(m.rows * m.cols());
  std::set<std::pair<std::string, int>> seen;
  for (const auto& inst : instances) {
    if (!seen.emplace(inst.zone_id, inst.year).second)
      throw Error(fmt::format("duplicate instance for zone {} year {}", inst.zone_id, inst.year));
    if (inst.soil_features.size() != kSoilFeatureCount)
      throw Error(fmt::format("instance {}/{} has {} soil features", inst.zone_id, inst.year,
                              inst.soil_features.size()));
    m.values.insert(m.values.end(), inst.soil_features.begin(), inst.soil_features.end());
    if (mode == FeatureMode::soil_weather) {
      if (inst.weather_features.size() != kWeatherFeatureCount)
        throw Error(fmt::format("instance {}/{} has {} weather features", inst.zone_id, inst.year,
                                inst.weather_features.size()));
      m.values.insert(m.values.end(), inst.weather_features.begin(), inst.weather_features.end());
    }
    m.target.push_back(inst.yield_t_ha);
    m.meta.push_back({inst.zone_id, inst.year});
  }
  for (double v : m.values)
    if (!std::isfinite(v)) throw Error("non-finite value in design matrix");
  for (double v : m.target)
    if (!std::isfinite(v)) throw Error("non-finite target in design matrix");
  return m;
}

void write_features_csv(std::ostream& out, const DesignMatrix& m) {
  out << "zone_id,year";
  for (const auto& c : m.column_names) out << ',' << c;
  out << ",yield_t_ha\n";
  std::string line;
  for (std::size_t i = 0; i < m.rows; ++i) {
    line = m.meta[i].zone_id;
    line += ',';
    line += std::to_string(m.meta[i].year);
    for (double v : m.row(i)) {
      line += ',';
      line += format_number(v);
    }
    line += ',';
    line += format_number(m.target[i]);
    line += '\n';
    out << line;
  }
}

namespace {

// Weather rows per zone, sorted by date.
class WeatherIndex {
 public:
  explicit WeatherIndex(std::span<const WeatherDaily> days) {
    for (const auto& d : days) by_zone_[d.zone_id].push_back(d);
    for (auto& [zone, v] : by_zone_)
      std::stable_sort(v.begin(), v.end(),
                       [](const WeatherDaily& a, const WeatherDaily& b) { return a.date < b.date; });
  }

  std::span<const WeatherDaily> range(const std::string& zone, Date from, Date to) const {
    auto it = by_zone_.find(zone);
    if (it == by_zone_.end()) return {};
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), from,
                               [](const WeatherDaily& d, Date x) { return d.date < x; });
    auto hi = std::lower_bound(lo, v.end(), to, [](const WeatherDaily& d, Date x) { return d.date < x; });
    return {lo, hi};
  }

 private:
  std::unordered_map<std::string, std::vector<WeatherDaily>> by_zone_;
};

struct Outcome {
  std::optional<Instance> instance;
  std::string reason;
};

Outcome assemble_one(const CropRecord& crop, const SoilIndex& soil, const WeatherIndex& weather,
                     FeatureMode mode, const AssemblyOptions& opts) {
  const SoilRecord* s = soil.lookup(crop.zone_id, crop.year);
  if (!s)
    return {std::nullopt, fmt::format("rejected: no soil test for zone {} at or before {}",
                                      crop.zone_id, crop.year)};
  std::map<int, WeeklyWeather> weeks;
  if (mode == FeatureMode::soil_weather) {
    auto days = weather.range(crop.zone_id, crop.sowing_date,
                              add_days(crop.sowing_date, kLastGrowthWeek * 7));
    weeks = aggregate_weeks(days, crop.sowing_date, opts.min_week_days);
  }
  InstanceResult built;
  try {
    built = build_instance(crop, *s, weeks, mode, opts.ordinals);
  } catch (const Error& e) {
    return {std::nullopt, fmt::format("rejected: zone {} year {} {}", crop.zone_id, crop.year, e.what())};
  }
  if (!built.instance)
    return {std::nullopt, fmt::format("rejected: zone {} year {} {}", crop.zone_id, crop.year,
                                      built.reason())};
  return {std::move(built.instance), {}};
}

Assembly collect(std::vector<Outcome>& outcomes) {
  Assembly out;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].instance)
      out.instances.push_back(std::move(*outcomes[i].instance));
    else
      out.log.add("assembly", i + 1, std::move(outcomes[i].reason));
  }
  return out;
}

}  // namespace

Assembly assemble_instances(const Dataset& data, FeatureMode mode, const AssemblyOptions& opts) {
  SoilIndex soil(data.soil);
  WeatherIndex weather(mode == FeatureMode::soil_weather ? std::span<const WeatherDaily>(data.weather)
                                                         : std::span<const WeatherDaily>{});
  const auto n = static_cast<std::ptrdiff_t>(data.crop.size());
  std::vector<Outcome> outcomes(data.crop.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    outcomes[i] = assemble_one(data.crop[i], soil, weather, mode, opts);
  return collect(outcomes);
}

Assembly assemble_instances_serial(const Dataset& data, FeatureMode mode, const AssemblyOptions& opts) {
  SoilIndex soil(data.soil);
  WeatherIndex weather(mode == FeatureMode::soil_weather ? std::span<const WeatherDaily>(data.weather)
                                                         : std::span<const WeatherDaily>{});
  std::vector<Outcome> outcomes;
  outcomes.reserve(data.crop.size());
  for (const auto& c : data.crop) outcomes.push_back(assemble_one(c, soil, weather, mode, opts));
  return collect(outcomes);
}

}  // namespace cropyield
