#include "cropyield/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cropyield/learn/model.hpp"
#include "cropyield/learn/rng.hpp"

namespace cropyield {

SplitIndices temporal_split(std::span<const RowMeta> meta, int test_year,
                            std::optional<YearRange> train_years) {
  SplitIndices s;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    const int y = meta[i].year;
    if (y == test_year)
      s.test.push_back(i);
    else if (y < test_year && (!train_years || train_years->contains(y)))
      s.train.push_back(i);
  }
  if (s.test.empty()) throw Error(fmt::format("temporal split: no instances for test year {}", test_year));
  if (s.train.empty())
    throw Error(fmt::format("temporal split: no training instances before {}", test_year));
  return s;
}

std::string_view mode_selection_name(ModeSelection m) {
  switch (m) {
    case ModeSelection::soil: return "soil";
    case ModeSelection::soil_weather: return "soil_weather";
    case ModeSelection::both: return "both";
  }
  return "?";
}

ModeSelection parse_mode_selection(std::string_view text) {
  for (auto m : {ModeSelection::soil, ModeSelection::soil_weather, ModeSelection::both})
    if (mode_selection_name(m) == text) return m;
  throw Error(fmt::format("unknown mode '{}' (expected soil, soil_weather or both)", text));
}

std::string_view alternative_name(Alternative a) {
  return a == Alternative::b_less_than_a ? "sw_less" : "sw_greater";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "sw_less") return Alternative::b_less_than_a;
  if (text == "sw_greater") return Alternative::b_greater_than_a;
  throw Error(fmt::format("unknown alternative '{}' (expected sw_less or sw_greater)", text));
}

std::uint64_t model_seed(std::uint64_t run_seed, std::size_t index) {
  return derive_seed(run_seed, 0x6d6f64656cULL + index);
}

namespace {

struct ModeRun {
  double mae = 0;
  std::vector<double> errors;
};

ModeRun run_mode(const DesignMatrix& full, const SplitIndices& split, const learn::ModelParams& params) {
  const DesignMatrix train = full.select_rows(split.train);
  const DesignMatrix test = full.select_rows(split.test);
  const learn::TrainedModel model = learn::train(train, params);
  const std::vector<double> pred = learn::predict(model, test);
  ModeRun r;
  r.errors = abs_errors(test.target, pred);
  r.mae = mae(test.target, pred);
  return r;
}

}  // namespace

Report run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  if (cfg.models.empty()) throw Error("experiment needs at least one model");
  for (const auto& p : cfg.models) p.validate();

  const bool want_soil = cfg.modes != ModeSelection::soil_weather;
  const bool want_sw = cfg.modes != ModeSelection::soil;

  // Instances complete in soil+weather mode define the common set, so both
  // modes see exactly the same rows.
  Assembly assembly = assemble_instances(
      data, want_sw ? FeatureMode::soil_weather : FeatureMode::soil_only, cfg.assembly);

  Report report;
  report.test_year = cfg.test_year;
  report.seed = cfg.seed;
  report.config_digest = cfg.config_digest;
  report.modes = cfg.modes;
  report.alternative = cfg.alternative;
  report.n_dropped = assembly.log.size();

  std::optional<DesignMatrix> m_soil, m_sw;
  if (want_soil) m_soil = build_matrix(assembly.instances, FeatureMode::soil_only);
  if (want_sw) m_sw = build_matrix(assembly.instances, FeatureMode::soil_weather);
  const DesignMatrix& any = m_sw ? *m_sw : *m_soil;
  const SplitIndices split = temporal_split(any.meta, cfg.test_year, cfg.train_years);
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  int lo = cfg.test_year, hi = 0;
  for (std::size_t i : split.train) {
    lo = std::min(lo, any.meta[i].year);
    hi = std::max(hi, any.meta[i].year);
  }
  report.train_years = YearRange{lo, hi};

  for (std::size_t k = 0; k < cfg.models.size(); ++k) {
    learn::ModelParams params = cfg.models[k];
    params.seed = model_seed(cfg.seed, k);
    ModelResult r;
    r.kind = params.kind;
    if (m_soil) {
      ModeRun run = run_mode(*m_soil, split, params);
      r.mae_soil = run.mae;
      r.abs_err_soil = std::move(run.errors);
    }
    if (m_sw) {
      ModeRun run = run_mode(*m_sw, split, params);
      r.mae_sw = run.mae;
      r.abs_err_sw = std::move(run.errors);
    }
    if (m_soil && m_sw) r.paired = paired_t_one_tailed(r.abs_err_soil, r.abs_err_sw, cfg.alternative);
    report.models.push_back(std::move(r));
  }

  auto panel = [&](auto mae_of, auto z_of) {
    std::vector<double> maes;
    for (const auto& r : report.models) maes.push_back(*mae_of(r));
    if (maes.size() < 2) return;
    auto z = zscore_panel(maes);
    for (std::size_t i = 0; i < z.size(); ++i) z_of(report.models[i]) = z[i];
  };
  if (want_soil && report.models.size() >= 2)
    panel([](const ModelResult& r) { return r.mae_soil; },
          [](ModelResult& r) -> std::optional<ZScore>& { return r.z_soil; });
  if (want_sw && report.models.size() >= 2)
    panel([](const ModelResult& r) { return r.mae_sw; },
          [](ModelResult& r) -> std::optional<ZScore>& { return r.z_sw; });
  return report;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(fmt::format("report.csv line {}: bad number '{}'", line, field));
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

constexpr std::string_view kReportHeader = "model,mae_soil,mae_sw,z_soil,p_soil,z_sw,p_sw,t_paired,p_paired";

}  // namespace

void write_report_csv(std::ostream& out, const Report& report) {
  out << kReportHeader << '\n';
  for (const auto& r : report.models) {
    auto z = [](const std::optional<ZScore>& s) { return s ? std::optional<double>(s->z) : std::nullopt; };
    auto p = [](const std::optional<ZScore>& s) { return s ? std::optional<double>(s->p) : std::nullopt; };
    std::optional<double> t, pp;
    if (r.paired) {
      t = r.paired->t;
      pp = r.paired->p;
    }
    out << learn::kind_name(r.kind) << ',' << opt_number(r.mae_soil) << ',' << opt_number(r.mae_sw) << ','
        << opt_number(z(r.z_soil)) << ',' << opt_number(p(r.z_soil)) << ',' << opt_number(z(r.z_sw)) << ','
        << opt_number(p(r.z_sw)) << ',' << opt_number(t) << ',' << opt_number(pp) << '\n';
  }
}

Report read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("report.csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader) throw Error(fmt::format("report.csv: unexpected header '{}'", line));
  Report report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 9) throw Error(fmt::format("report.csv line {}: expected 9 fields, got {}", lineno, f.size()));
    ModelResult r;
    r.kind = learn::parse_kind(f[0]);
    r.mae_soil = parse_opt(f[1], lineno);
    r.mae_sw = parse_opt(f[2], lineno);
    auto zs = parse_opt(f[3], lineno), ps = parse_opt(f[4], lineno);
    if (zs && ps) r.z_soil = ZScore{*zs, *ps};
    auto zw = parse_opt(f[5], lineno), pw = parse_opt(f[6], lineno);
    if (zw && pw) r.z_sw = ZScore{*zw, *pw};
    auto t = parse_opt(f[7], lineno), p = parse_opt(f[8], lineno);
    if (t && p) r.paired = PairedTest{*t, *p, 0};
    report.models.push_back(std::move(r));
  }
  return report;
}

namespace {

std::string fixed(const std::optional<double>& v, int digits) {
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string("-");
}

std::string pvalue(const std::optional<double>& p) {
  if (!p) return "-";
  if (*p != 0 && *p < 1e-3) return fmt::format("{:.1e}", *p);
  return fmt::format("{:.3f}", *p);
}

std::optional<double> zval(const std::optional<ZScore>& s) { return s ? std::optional<double>(s->z) : std::nullopt; }
std::optional<double> zp(const std::optional<ZScore>& s) { return s ? std::optional<double>(s->p) : std::nullopt; }

}  // namespace

std::string render_report_text(const Report& report) {
  std::string out = "Winter wheat yield experiment\n";
  if (report.train_years)
    out += fmt::format("train years    {}-{} ({} rows)\n", report.train_years->first, report.train_years->last,
                       report.n_train);
  out += fmt::format("test year      {} ({} rows)\n", report.test_year, report.n_test);
  out += fmt::format("modes          {}\n", mode_selection_name(report.modes));
  out += fmt::format("dropped        {} zone-years\n", report.n_dropped);
  out += fmt::format("seed           {}\n", report.seed);
  out += fmt::format("config digest  {}\n\n", report.config_digest.empty() ? "-" : report.config_digest);

  out += fmt::format("{:<20}{:>10}{:>10}{:>9}{:>9}{:>9}{:>9}{:>10}{:>10}\n", "Model", "MAE soil", "MAE s+w",
                     "z soil", "p soil", "z s+w", "p s+w", "t paired", "p paired");
  for (const auto& r : report.models) {
    std::optional<double> t, p;
    if (r.paired) {
      t = r.paired->t;
      p = r.paired->p;
    }
    out += fmt::format("{:<20}{:>10}{:>10}{:>9}{:>9}{:>9}{:>9}{:>10}{:>10}\n", learn::display_name(r.kind),
                       fixed(r.mae_soil, 3), fixed(r.mae_sw, 3), fixed(zval(r.z_soil), 2), pvalue(zp(r.z_soil)),
                       fixed(zval(r.z_sw), 2), pvalue(zp(r.z_sw)), fixed(t, 2), pvalue(p));
  }
  return out;
}

std::string render_comparison_text(const Report& report) {
  std::string out = "Paired comparison: soil vs soil+weather absolute errors\n";
  out += fmt::format("alternative: {}\n\n",
                     report.alternative == Alternative::b_less_than_a ? "soil+weather errors are smaller"
                                                                      : "soil+weather errors are larger");
  out += fmt::format("{:<20}{:>10}{:>10}{:>10}{:>10}{:>10}  {}\n", "Model", "MAE soil", "MAE s+w", "change",
                     "t", "p", "p < 0.05");
  for (const auto& r : report.models) {
    std::optional<double> change, t, p;
    if (r.mae_soil && r.mae_sw) change = *r.mae_sw - *r.mae_soil;
    if (r.paired) {
      t = r.paired->t;
      p = r.paired->p;
    }
    std::string sig = p ? (*p < 0.05 ? "yes" : "no") : "-";
    out += fmt::format("{:<20}{:>10}{:>10}{:>10}{:>10}{:>10}  {}\n", learn::display_name(r.kind),
                       fixed(r.mae_soil, 3), fixed(r.mae_sw, 3), change ? fmt::format("{:+.3f}", *change) : "-",
                       fixed(t, 2), pvalue(p), sig);
  }
  return out;
}

std::string render_mae_svg(const Report& report) {
  constexpr int kGroup = 110, kBar = 36, kLeft = 60, kTop = 40, kPlotH = 260, kBottom = 70;
  const int n = static_cast<int>(report.models.size());
  const int width = kLeft + std::max(1, n) * kGroup + 150;
  const int height = kTop + kPlotH + kBottom;

  double vmax = 0;
  for (const auto& r : report.models) vmax = std::max({vmax, r.mae_soil.value_or(0), r.mae_sw.value_or(0)});
  double step = 0.5;
  while (vmax / step > 8) step *= 2;
  const double top = std::max(step, std::ceil(vmax * 1.05 / step) * step);
  auto ypix = [&](double v) { return kTop + kPlotH - v / top * kPlotH; };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n",
      width, height);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  s += fmt::format("<text x=\"{}\" y=\"22\" font-size=\"15\">MAE by model (test year {})</text>\n", kLeft,
                   report.test_year);
  for (double v = 0; v <= top + 1e-9; v += step) {
    const double y = ypix(v);
    s += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n", kLeft, y,
                     kLeft + n * kGroup, y);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.1f}</text>\n", kLeft - 6, y + 4, v);
  }
  s += fmt::format("<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">MAE (t/ha)</text>\n",
                   kTop + kPlotH / 2, kTop + kPlotH / 2);

  const char* colors[2] = {"#9e9e9e", "#2f6fa7"};
  for (int i = 0; i < n; ++i) {
    const auto& r = report.models[static_cast<std::size_t>(i)];
    const int gx = kLeft + i * kGroup + (kGroup - 2 * kBar) / 2;
    const std::optional<double> vals[2] = {r.mae_soil, r.mae_sw};
    for (int b = 0; b < 2; ++b) {
      if (!vals[b]) continue;
      const double y = ypix(*vals[b]);
      const int x = gx + b * kBar;
      s += fmt::format("<rect x=\"{}\" y=\"{:.1f}\" width=\"{}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x, y,
                       kBar - 4, kTop + kPlotH - y, colors[b]);
      s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{:.2f}</text>\n",
                       x + (kBar - 4) / 2, y - 4, *vals[b]);
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + i * kGroup + kGroup / 2,
                     kTop + kPlotH + 18, learn::display_name(r.kind));
  }
  s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLeft, kTop + kPlotH,
                   kLeft + n * kGroup, kTop + kPlotH);
  const int lx = kLeft + n * kGroup + 20;
  const char* labels[2] = {"soil", "soil + weather"};
  for (int b = 0; b < 2; ++b) {
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n", lx, kTop + b * 22,
                     colors[b]);
    s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 20, kTop + b * 22 + 12, labels[b]);
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cropyield
