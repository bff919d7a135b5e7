#include "cropyield/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace cropyield {

std::vector<learn::ModelKind> RunConfig::default_models() {
  using learn::ModelKind;
  return {ModelKind::decision_tree, ModelKind::linear_svr,        ModelKind::random_forest,
          ModelKind::extra_trees,   ModelKind::gradient_boosting, ModelKind::hist_gradient_boosting};
}

std::map<learn::ModelKind, learn::ModelParams> RunConfig::default_model_params() {
  std::map<learn::ModelKind, learn::ModelParams> out;
  for (auto k : default_models()) out.emplace(k, learn::ModelParams::defaults(k));
  return out;
}

std::filesystem::path RunConfig::soil_path() const {
  return paths.soil.empty() ? paths.out / "data" / "soil.csv" : paths.soil;
}
std::filesystem::path RunConfig::weather_path() const {
  return paths.weather.empty() ? paths.out / "data" / "weather.csv" : paths.weather;
}
std::filesystem::path RunConfig::crop_path() const {
  return paths.crop.empty() ? paths.out / "data" / "crop.csv" : paths.crop;
}

void RunConfig::validate() const {
  if (models.empty()) throw Error("config: [run] models is empty");
  std::set<learn::ModelKind> seen;
  for (auto k : models)
    if (!seen.insert(k).second) throw Error(fmt::format("config: model {} listed twice", learn::kind_name(k)));
  if (train_first_year > train_last_year) throw Error("config: train_first_year > train_last_year");
  if (min_week_days < 1 || min_week_days > 7) throw Error("config: min_week_days must be in 1..7");
  if (threads < 0) throw Error("config: threads must be >= 0");
  for (const auto& [kind, p] : model_params) {
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(fmt::format("config: [model.{}] {}", learn::kind_name(kind), e.what()));
    }
  }
  const std::pair<const char*, Range> ranges[] = {
      {"p", validation.p},         {"k", validation.k},         {"mg", validation.mg},
      {"ph", validation.ph},       {"temperature", validation.temperature}, {"precip", validation.precip},
      {"solar", validation.solar}, {"humidity", validation.humidity},       {"yield", validation.yield}};
  for (const auto& [name, r] : ranges)
    if (!(r.lo <= r.hi)) throw Error(fmt::format("config: [validation] {}_min > {}_max", name, name));
  for (auto f : kOrdinalFields) {
    const auto& labels = validation.ordinals.of(f);
    if (labels.empty()) throw Error(fmt::format("config: [ordinal] {} has no labels", ordinal_field_name(f)));
    std::set<std::string> uniq(labels.begin(), labels.end());
    if (uniq.size() != labels.size())
      throw Error(fmt::format("config: [ordinal] {} repeats a label", ordinal_field_name(f)));
  }
  synth.validate();
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  for (auto k : models) {
    auto it = model_params.find(k);
    learn::ModelParams p = it != model_params.end() ? it->second : learn::ModelParams::defaults(k);
    p.kind = k;
    e.models.push_back(p);
  }
  e.test_year = test_year;
  e.train_years = YearRange{train_first_year, train_last_year};
  e.modes = mode;
  e.alternative = alternative;
  e.assembly.ordinals = validation.ordinals;
  e.assembly.min_week_days = min_week_days;
  e.seed = seed;
  e.config_digest = config_digest(*this);
  return e;
}

namespace {

struct Binding {
  std::string section;
  std::string key;
  std::string doc;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

[[noreturn]] void bad_value(const std::string& what, const std::string& text) {
  throw Error(fmt::format("bad value '{}' ({})", text, what));
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) bad_value(what, text);
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == sep)
      flush();
    else
      cur += c;
  }
  flush();
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

template <typename T>
std::string join_numbers(const T& values) {
  std::string s;
  for (const auto& v : values) {
    if (!s.empty()) s += ' ';
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
      s += format_number(v);
    else
      s += std::to_string(v);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& w : words(text)) out.push_back(parse_number<double>(w, "number"));
  return out;
}

struct Table {
  std::vector<Binding> rows;
  std::string section;

  void add(std::string key, std::string doc, std::function<std::string()> get,
           std::function<void(const std::string&)> set) {
    rows.push_back({section, std::move(key), std::move(doc), std::move(get), std::move(set)});
  }
  void integer(std::string key, std::string doc, int& v) {
    add(std::move(key), std::move(doc), [&v] { return std::to_string(v); },
        [&v](const std::string& t) { v = parse_number<int>(t, "integer"); });
  }
  void u64(std::string key, std::string doc, std::uint64_t& v) {
    add(std::move(key), std::move(doc), [&v] { return std::to_string(v); },
        [&v](const std::string& t) { v = parse_number<std::uint64_t>(t, "unsigned integer"); });
  }
  void real(std::string key, std::string doc, double& v) {
    add(std::move(key), std::move(doc), [&v] { return format_number(v); },
        [&v](const std::string& t) { v = parse_number<double>(t, "number"); });
  }
  void boolean(std::string key, std::string doc, bool& v) {
    add(std::move(key), std::move(doc), [&v] { return std::string(v ? "true" : "false"); },
        [&v](const std::string& t) {
          if (t == "true" || t == "yes" || t == "1")
            v = true;
          else if (t == "false" || t == "no" || t == "0")
            v = false;
          else
            bad_value("true or false", t);
        });
  }
  void path(std::string key, std::string doc, std::filesystem::path& v) {
    add(std::move(key), std::move(doc), [&v] { return v.string(); },
        [&v](const std::string& t) { v = t; });
  }
  void range(std::string name, std::string unit, Range& r) {
    real(name + "_min", "lowest accepted " + name + unit, r.lo);
    real(name + "_max", "highest accepted " + name + unit, r.hi);
  }
  template <std::size_t N>
  void reals(std::string key, std::string doc, std::array<double, N>& v) {
    add(std::move(key), std::move(doc), [&v] { return join_numbers(v); },
        [&v](const std::string& t) {
          auto xs = parse_doubles(t);
          if (xs.size() != N) bad_value(fmt::format("{} numbers", N), t);
          std::copy(xs.begin(), xs.end(), v.begin());
        });
  }
  void seasonal(const std::string& prefix, const std::string& what, synth::Seasonal& s) {
    real(prefix + "_mean", what + ": annual mean", s.mean);
    real(prefix + "_amplitude", what + ": seasonal amplitude", s.amplitude);
    integer(prefix + "_peak_doy", what + ": day of year of the seasonal peak", s.peak_doy);
    real(prefix + "_noise_sd", what + ": daily noise sd", s.noise_sd);
  }
};

// Staging for the per-year synth columns, which only make sense together.
struct YearColumns {
  std::optional<std::vector<int>> years, zones;
  std::optional<std::vector<double>> mean, std;
};

std::vector<Binding> bindings(RunConfig& c, YearColumns* stage) {
  Table t;
  t.section = "paths";
  t.path("soil", "soil tests CSV (empty: <out>/data/soil.csv)", c.paths.soil);
  t.path("weather", "daily weather CSV (empty: <out>/data/weather.csv)", c.paths.weather);
  t.path("crop", "crop records CSV (empty: <out>/data/crop.csv)", c.paths.crop);
  t.path("out", "output directory for every command", c.paths.out);

  t.section = "run";
  t.u64("seed", "master seed for generation and model training", c.seed);
  t.integer("threads", "OpenMP threads (0 = runtime default)", c.threads);
  t.add("mode", "soil, soil_weather or both", [&c] { return std::string(mode_selection_name(c.mode)); },
        [&c](const std::string& v) { c.mode = parse_mode_selection(v); });
  t.integer("test_year", "held-out test year", c.test_year);
  t.integer("train_first_year", "first training year", c.train_first_year);
  t.integer("train_last_year", "last training year (years >= test_year are never used)", c.train_last_year);
  t.add("models", "comma-separated model kinds, in report order",
        [&c] {
          std::string s;
          for (auto k : c.models) s += (s.empty() ? "" : ",") + std::string(learn::kind_name(k));
          return s;
        },
        [&c](const std::string& v) {
          c.models.clear();
          for (const auto& name : split(v, ',')) c.models.push_back(learn::parse_kind(name));
        });
  t.add("alternative", "paired test direction: sw_less (soil+weather errors smaller) or sw_greater",
        [&c] { return std::string(alternative_name(c.alternative)); },
        [&c](const std::string& v) { c.alternative = parse_alternative(v); });
  t.integer("min_week_days", "observed days a growth week needs (1..7)", c.min_week_days);

  t.section = "validation";
  t.range("p", " (mg/l)", c.validation.p);
  t.range("k", " (mg/l)", c.validation.k);
  t.range("mg", " (mg/l)", c.validation.mg);
  t.range("ph", "", c.validation.ph);
  t.range("temperature", " (deg C)", c.validation.temperature);
  t.range("precip", " (mm/day)", c.validation.precip);
  t.range("solar", " (MJ/m2/day)", c.validation.solar);
  t.range("humidity", " (%)", c.validation.humidity);
  t.range("yield", " (t/ha)", c.validation.yield);

  t.section = "ordinal";
  for (auto f : kOrdinalFields) {
    auto& labels = c.validation.ordinals.of(f);
    t.add(std::string(ordinal_field_name(f)), "category labels from lowest to highest code, '|'-separated",
          [&labels] {
            std::string s;
            for (const auto& l : labels) s += (s.empty() ? "" : "|") + l;
            return s;
          },
          [&labels](const std::string& v) { labels = split(v, '|'); });
  }

  for (auto& [kind, p] : c.model_params) {
    t.section = "model." + std::string(learn::kind_name(kind));
    t.integer("max_depth", "tree depth limit (-1 = unlimited)", p.max_depth);
    t.integer("min_samples_leaf", "minimum rows per leaf", p.min_samples_leaf);
    t.integer("n_estimators", "trees or boosting rounds", p.n_estimators);
    t.real("learning_rate", "boosting shrinkage", p.learning_rate);
    t.real("subsample", "row fraction per boosting round", p.subsample);
    t.integer("max_features", "features tried per split (0 = family default)", p.max_features);
    t.boolean("bootstrap", "bootstrap rows per tree (random forest)", p.bootstrap);
    t.integer("n_bins", "feature bins (histogram boosting)", p.n_bins);
    t.integer("max_leaves", "leaves per tree (histogram boosting)", p.max_leaves);
    t.real("svr_epsilon", "epsilon-insensitive margin (t/ha)", p.svr.epsilon);
    t.real("svr_c", "loss weight against the L2 penalty", p.svr.c);
    t.integer("svr_iterations", "subgradient iterations", p.svr.iterations);
    t.real("svr_step_size", "base step size", p.svr.step_size);
  }

  t.section = "synth";
  auto& g = c.synth;
  t.add("years", "harvest years, space-separated",
        [&g] {
          std::vector<int> v;
          for (const auto& y : g.years) v.push_back(y.year);
          return join_numbers(v);
        },
        [stage](const std::string& v) {
          std::vector<int> xs;
          for (const auto& w : words(v)) xs.push_back(parse_number<int>(w, "integer"));
          stage->years = xs;
        });
  t.add("zones", "zone count per year",
        [&g] {
          std::vector<int> v;
          for (const auto& y : g.years) v.push_back(y.zones);
          return join_numbers(v);
        },
        [stage](const std::string& v) {
          std::vector<int> xs;
          for (const auto& w : words(v)) xs.push_back(parse_number<int>(w, "integer"));
          stage->zones = xs;
        });
  t.add("yield_mean", "target yield mean per year (t/ha)",
        [&g] {
          std::vector<double> v;
          for (const auto& y : g.years) v.push_back(y.yield_mean);
          return join_numbers(v);
        },
        [stage](const std::string& v) { stage->mean = parse_doubles(v); });
  t.add("yield_std", "target yield std per year (t/ha)",
        [&g] {
          std::vector<double> v;
          for (const auto& y : g.years) v.push_back(y.yield_std);
          return join_numbers(v);
        },
        [stage](const std::string& v) { stage->std = parse_doubles(v); });
  t.integer("zone_pool", "number of distinct zones to draw from", g.zone_pool);
  t.integer("sowing_month", "first possible sowing month (year before harvest)", g.sowing_month);
  t.integer("sowing_day", "first possible sowing day of month", g.sowing_day);
  t.integer("sowing_window_days", "length of the sowing window", g.sowing_window_days);
  t.integer("harvest_lag_min", "earliest harvest, days after the 40-week season", g.harvest_lag_min);
  t.integer("harvest_lag_max", "latest harvest, days after the 40-week season", g.harvest_lag_max);
  t.seasonal("temp", "daily mean temperature (deg C)", g.temp);
  t.real("temp_ar", "day-to-day autocorrelation of temperature noise", g.temp_ar);
  t.real("zone_temp_sd", "sd of per-zone temperature offsets", g.zone_temp_sd);
  t.real("year_temp_sd", "sd of random per-year temperature offsets (independent of yield)", g.year_temp_sd);
  t.seasonal("diurnal_range", "t_max - t_min (deg C)", g.diurnal_range);
  t.real("min_diurnal_range", "smallest t_max - t_min", g.min_diurnal_range);
  t.real("wet_day_prob", "probability of rain on a day", g.wet_day_prob);
  t.real("wet_day_mean_mm", "mean rain on a wet day (mm)", g.wet_day_mean_mm);
  t.real("zone_precip_sd", "log sd of per-zone wetness", g.zone_precip_sd);
  t.real("year_precip_sd", "log sd of random per-year wetness (independent of yield)", g.year_precip_sd);
  t.seasonal("solar", "solar radiation (MJ/m2/day)", g.solar);
  t.real("wet_day_solar_factor", "solar multiplier on wet days", g.wet_day_solar_factor);
  t.seasonal("humidity", "relative humidity (%)", g.humidity);
  t.real("wet_day_humidity_bump", "humidity added on wet days", g.wet_day_humidity_bump);
  t.real("p_median", "median P index (mg/l)", g.p_median);
  t.real("p_log_sd", "log sd of P across zones", g.p_log_sd);
  t.real("k_median", "median K index (mg/l)", g.k_median);
  t.real("k_log_sd", "log sd of K across zones", g.k_log_sd);
  t.real("mg_median", "median Mg index (mg/l)", g.mg_median);
  t.real("mg_log_sd", "log sd of Mg across zones", g.mg_log_sd);
  t.real("ph_mean", "mean pH", g.ph_mean);
  t.real("ph_sd", "sd of pH across zones", g.ph_sd);
  t.real("test_drift_log_sd", "log sd of nutrient change between tests", g.test_drift_log_sd);
  t.integer("test_interval_min", "shortest gap between soil tests (years)", g.test_interval_min);
  t.integer("test_interval_max", "longest gap between soil tests (years)", g.test_interval_max);
  t.reals("soil_type_probs", "soil_type category weights", g.soil_type_probs);
  t.reals("stone_content_probs", "stone_content category weights", g.stone_content_probs);
  t.reals("organic_matter_probs", "organic_matter category weights", g.organic_matter_probs);
  t.reals("caco3_probs", "caco3 category weights", g.caco3_probs);
  t.real("weather_weight", "weight of the weather signal in yield (0 = weather-independent)", g.weather_weight);
  t.real("soil_weight", "weight of the soil signal in yield", g.soil_weight);
  t.real("noise_weight", "weight of the noise term in yield", g.noise_weight);
  t.real("year_link", "share of each year's yield mean shift expressed as a year temperature anomaly (0..1)",
         g.year_link);
  t.real("dd_curvature", "concavity of yield in growth-window degree days", g.dd_curvature);
  t.real("ap_curvature", "concavity of yield in growth-window precipitation", g.ap_curvature);
  t.real("dd_ap_interaction", "degree days x precipitation interaction", g.dd_ap_interaction);
  t.reals("soil_coefs", "soil feature coefficients, in feature column order", g.soil_coefs);
  return std::move(t.rows);
}

void apply_years(RunConfig& c, const YearColumns& s) {
  if (!s.years && !s.zones && !s.mean && !s.std) return;
  if (!s.years || !s.zones || !s.mean || !s.std)
    throw Error("config: [synth] years, zones, yield_mean and yield_std must be given together");
  const std::size_t n = s.years->size();
  if (s.zones->size() != n || s.mean->size() != n || s.std->size() != n)
    throw Error("config: [synth] years, zones, yield_mean and yield_std differ in length");
  c.synth.years.clear();
  for (std::size_t i = 0; i < n; ++i)
    c.synth.years.push_back({(*s.years)[i], (*s.zones)[i], (*s.mean)[i], (*s.std)[i]});
}

}  // namespace

std::vector<ConfigKey> config_keys(const RunConfig& cfg) {
  RunConfig copy = cfg;
  YearColumns stage;
  std::vector<ConfigKey> out;
  for (const auto& b : bindings(copy, &stage)) out.push_back({b.section, b.key, b.get(), b.doc});
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  // '#' comments are accepted as well as ';'.
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line.clear();
    cleaned << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    std::istringstream text(cleaned.str());
    boost::property_tree::read_ini(text, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }

  RunConfig cfg;
  YearColumns stage;
  std::vector<Binding> table = bindings(cfg, &stage);
  std::set<std::string> sections;
  for (const auto& b : table) sections.insert(b.section);

  for (const auto& [section, body] : tree) {
    if (!body.data().empty())
      throw Error(fmt::format("{}: key '{}' is outside any [section]", source, section));
    if (!sections.count(section)) throw Error(fmt::format("{}: unknown section [{}]", source, section));
    for (const auto& [key, value] : body) {
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Binding& b) { return b.section == section && b.key == key; });
      if (it == table.end()) throw Error(fmt::format("{}: unknown key '{}' in [{}]", source, key, section));
      try {
        it->set(value.data());
      } catch (const Error& e) {
        throw Error(fmt::format("{}: [{}] {}: {}", source, section, key, e.what()));
      }
    }
  }
  apply_years(cfg, stage);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read config {}", path.string()));
  return parse_config(in, path.string());
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : config_keys(cfg)) {
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("; {}\n{} = {}\n", k.doc, k.key, k.value);
  }
  return out;
}

std::string config_digest(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& k : config_keys(cfg)) {
    if (k.section == "paths" || (k.section == "run" && k.key == "threads")) continue;
    feed(k.section);
    feed(".");
    feed(k.key);
    feed("=");
    feed(k.value);
    feed("\n");
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cropyield
