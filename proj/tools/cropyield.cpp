#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cropyield/commands.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<int> test_year;
  std::optional<int> threads;
};

void add_global_flags(CLI::App& cmd, GlobalFlags& f) {
  cmd.add_option("--config", f.config, "Config file (INI); defaults apply when omitted")->check(CLI::ExistingFile);
  cmd.add_option("--seed", f.seed, "Master seed (overrides [run] seed)");
  cmd.add_option("--out", f.out, "Output directory (overrides [paths] out)");
  cmd.add_option("--mode", f.mode, "soil | soil_weather | both (overrides [run] mode)")
      ->check(CLI::IsMember({"soil", "soil_weather", "both"}));
  cmd.add_option("--test-year", f.test_year, "Held-out test year (overrides [run] test_year)");
  cmd.add_option("--threads", f.threads, "OpenMP threads, 0 = default (overrides [run] threads)")
      ->check(CLI::NonNegativeNumber);
}

cropyield::RunConfig resolve(const GlobalFlags& f) {
  cropyield::RunConfig cfg = f.config.empty() ? cropyield::RunConfig{} : cropyield::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.paths.out = *f.out;
  if (f.mode) cfg.mode = cropyield::parse_mode_selection(*f.mode);
  if (f.test_year) cfg.test_year = *f.test_year;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

void log_line(std::string_view line) { std::cerr << "cropyield: " << line << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Winter wheat yield experiments on soil and weather data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cropyield 1.0");

  GlobalFlags flags;
  bool null_weather = false;
  std::string models;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset under <out>/data");
  add_global_flags(*synth, flags);
  synth->add_flag("--null-weather", null_weather, "Make yield independent of weather (weather_weight = 0)");

  auto* ingest = app.add_subcommand("ingest", "Validate inputs; write cleaned CSVs and rejections.csv");
  add_global_flags(*ingest, flags);

  auto* features = app.add_subcommand("features", "Write the design matrix for each selected mode");
  add_global_flags(*features, flags);

  auto* evaluate = app.add_subcommand("evaluate", "Train and test every model; write report.csv/txt and mae_chart.svg");
  add_global_flags(*evaluate, flags);
  evaluate->add_option("--models", models, "Comma-separated model kinds (overrides [run] models)");

  auto* compare = app.add_subcommand("compare", "Paired soil vs soil+weather comparison from report.csv");
  add_global_flags(*compare, flags);

  auto* config = app.add_subcommand("config", "Print the effective config with every key documented");
  add_global_flags(*config, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    cropyield::RunConfig cfg = resolve(flags);
    if (null_weather) cfg.synth.weather_weight = 0;
    if (!models.empty()) {
      cfg.models.clear();
      std::string name;
      for (std::size_t i = 0; i <= models.size(); ++i) {
        if (i == models.size() || models[i] == ',') {
          if (!name.empty()) cfg.models.push_back(cropyield::learn::parse_kind(name));
          name.clear();
        } else {
          name += models[i];
        }
      }
    }

    if (*synth)
      cropyield::cmd_synth(cfg, log_line);
    else if (*ingest)
      cropyield::cmd_ingest(cfg, log_line);
    else if (*features)
      cropyield::cmd_features(cfg, log_line);
    else if (*evaluate)
      cropyield::cmd_evaluate(cfg, log_line);
    else if (*compare)
      cropyield::cmd_compare(cfg, log_line);
    else if (*config) {
      cfg.validate();
      std::cout << cropyield::dump_config(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "cropyield: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
