#include "cropyield/commands.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cropyield/features.hpp"
#include "cropyield/ingest.hpp"
#include "cropyield/parallel.hpp"

namespace cropyield {

namespace {

constexpr std::string_view kComparisonMarker = "\n== Paired comparison ==\n";

void say(const LogSink& log, const std::string& line) {
  if (log) log(line);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(fmt::format("write failed: {}", path.string()));
}

void prepare(const RunConfig& cfg) {
  cfg.validate();
  set_thread_count(cfg.threads);
}

IngestResult load_inputs(const RunConfig& cfg, const LogSink& log) {
  IngestResult r = ingest_files(cfg.soil_path(), cfg.weather_path(), cfg.crop_path(), cfg.validation);
  say(log, fmt::format("ingested {} soil tests, {} weather days, {} crop records ({} lines not used)",
                       r.data.soil.size(), r.data.weather.size(), r.data.crop.size(), r.log.size()));
  return r;
}

std::vector<FeatureMode> selected_modes(ModeSelection m) {
  switch (m) {
    case ModeSelection::soil: return {FeatureMode::soil_only};
    case ModeSelection::soil_weather: return {FeatureMode::soil_weather};
    case ModeSelection::both: return {FeatureMode::soil_only, FeatureMode::soil_weather};
  }
  return {};
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const LogSink& log) {
  prepare(cfg);
  const Dataset data = synth::gen_dataset(cfg.synth, cfg.seed);
  const auto dir = cfg.paths.out / "data";
  synth::write_dataset(dir, data);
  say(log, fmt::format("wrote {} crop rows, {} weather rows, {} soil tests to {}", data.crop.size(),
                       data.weather.size(), data.soil.size(), dir.string()));
}

void cmd_ingest(const RunConfig& cfg, const LogSink& log) {
  prepare(cfg);
  const IngestResult r = load_inputs(cfg, log);
  const auto dir = cfg.paths.out / "clean";
  {
    auto out = open_out(dir / "soil.csv");
    write_soil_csv(out, r.data.soil);
  }
  {
    auto out = open_out(dir / "weather.csv");
    write_weather_csv(out, r.data.weather);
  }
  {
    auto out = open_out(dir / "crop.csv");
    write_crop_csv(out, r.data.crop);
  }
  auto rej = open_out(cfg.paths.out / "rejections.csv");
  r.log.write_csv(rej);
  say(log, fmt::format("{} rejected, {} duplicates, {} filtered", r.log.count_prefix("rejected:"),
                       r.log.count_prefix("duplicate:"), r.log.count_prefix("filtered:")));
}

void cmd_features(const RunConfig& cfg, const LogSink& log) {
  prepare(cfg);
  const IngestResult r = load_inputs(cfg, log);
  AssemblyOptions opts;
  opts.ordinals = cfg.validation.ordinals;
  opts.min_week_days = cfg.min_week_days;
  RejectionLog assembly_log;
  for (FeatureMode mode : selected_modes(cfg.mode)) {
    Assembly a = assemble_instances(r.data, mode, opts);
    const DesignMatrix m = build_matrix(a.instances, mode);
    const auto path = cfg.paths.out / fmt::format("features_{}.csv", mode_name(mode));
    auto out = open_out(path);
    write_features_csv(out, m);
    say(log, fmt::format("{}: {} rows x {} features ({} zone-years dropped) -> {}", mode_name(mode), m.rows,
                         m.cols(), a.log.size(), path.string()));
    for (auto& e : a.log.entries) e.source = fmt::format("assembly_{}", mode_name(mode));
    assembly_log.append(a.log);
  }
  auto out = open_out(cfg.paths.out / "assembly_log.csv");
  assembly_log.write_csv(out);
}

Report cmd_evaluate(const RunConfig& cfg, const LogSink& log) {
  prepare(cfg);
  const IngestResult r = load_inputs(cfg, log);
  const Report report = run_experiment(r.data, cfg.experiment());
  {
    auto out = open_out(cfg.paths.out / "report.csv");
    write_report_csv(out, report);
  }
  write_text(cfg.paths.out / "report.txt", render_report_text(report));
  write_text(cfg.paths.out / "mae_chart.svg", render_mae_svg(report));
  say(log, fmt::format("evaluated {} models on {} train / {} test rows -> {}", report.models.size(),
                       report.n_train, report.n_test, (cfg.paths.out / "report.csv").string()));
  return report;
}

void cmd_compare(const RunConfig& cfg, const LogSink& log) {
  prepare(cfg);
  const auto csv_path = cfg.paths.out / "report.csv";
  std::ifstream in(csv_path);
  if (!in) throw Error(fmt::format("cannot read {} (run evaluate first)", csv_path.string()));
  Report report = read_report_csv(in);
  report.alternative = cfg.alternative;
  const std::string comparison = render_comparison_text(report);
  write_text(cfg.paths.out / "comparison.txt", comparison);

  const auto txt_path = cfg.paths.out / "report.txt";
  std::string text;
  if (std::ifstream txt(txt_path); txt) {
    std::ostringstream buf;
    buf << txt.rdbuf();
    text = buf.str();
    if (auto pos = text.find(kComparisonMarker); pos != std::string::npos) text.erase(pos);
  }
  text += kComparisonMarker;
  text += comparison;
  write_text(txt_path, text);
  say(log, fmt::format("compared {} models -> {}", report.models.size(), (cfg.paths.out / "comparison.txt").string()));
}

}  // namespace cropyield
