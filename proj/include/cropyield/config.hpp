#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cropyield/domain.hpp"
#include "cropyield/experiment.hpp"
#include "cropyield/learn/params.hpp"
#include "cropyield/synth.hpp"

namespace cropyield {

struct Paths {
  // Empty input paths resolve to <out>/data/<name>.csv, where synth writes.
  std::filesystem::path soil;
  std::filesystem::path weather;
  std::filesystem::path crop;
  std::filesystem::path out = "out";
};

struct RunConfig {
  Paths paths;
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = OpenMP default
  ModeSelection mode = ModeSelection::both;
  int test_year = 2018;
  int train_first_year = 2013;
  int train_last_year = 2017;
  std::vector<learn::ModelKind> models = default_models();
  Alternative alternative = Alternative::b_less_than_a;
  int min_week_days = 7;
  std::map<learn::ModelKind, learn::ModelParams> model_params = default_model_params();
  ValidationConfig validation;
  synth::GenConfig synth;

  static std::vector<learn::ModelKind> default_models();
  static std::map<learn::ModelKind, learn::ModelParams> default_model_params();

  std::filesystem::path soil_path() const;
  std::filesystem::path weather_path() const;
  std::filesystem::path crop_path() const;

  /// Throws Error on inconsistent settings (empty model list, bad years...).
  void validate() const;
  ExperimentConfig experiment() const;
};

/// One documented config key. `section` is e.g. "run" or "model.extra_trees".
struct ConfigKey {
  std::string section;
  std::string key;
  std::string value;  // current value in config syntax
  std::string doc;
};

/// Every key with its value in `cfg`, in file order.
std::vector<ConfigKey> config_keys(const RunConfig& cfg);

/// INI-style file: [section] headers, key = value lines, ';' or '#'
/// comments. Unknown sections or keys and malformed values throw Error.
RunConfig parse_config(std::istream& in, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Complete config file with a comment line documenting each key;
/// parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a (hex) over every key that affects results; paths and the thread
/// count are excluded.
std::string config_digest(const RunConfig& cfg);

}  // namespace cropyield
