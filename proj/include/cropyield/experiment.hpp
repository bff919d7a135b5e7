#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cropyield/features.hpp"
#include "cropyield/learn/params.hpp"
#include "cropyield/stats.hpp"

namespace cropyield {

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int y) const { return y >= first && y <= last; }
  bool operator==(const YearRange&) const = default;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Train: rows with year < test_year (and inside `train_years` when given).
/// Test: rows with year == test_year. Throws Error if either side is empty.
SplitIndices temporal_split(std::span<const RowMeta> meta, int test_year,
                            std::optional<YearRange> train_years = std::nullopt);

enum class ModeSelection { soil, soil_weather, both };

std::string_view mode_selection_name(ModeSelection m);
ModeSelection parse_mode_selection(std::string_view text);

std::string_view alternative_name(Alternative a);
Alternative parse_alternative(std::string_view text);

struct ExperimentConfig {
  std::vector<learn::ModelParams> models;
  int test_year = 2018;
  std::optional<YearRange> train_years = YearRange{2013, 2017};
  ModeSelection modes = ModeSelection::both;
  /// Paired test on (soil errors, soil+weather errors).
  Alternative alternative = Alternative::b_less_than_a;
  AssemblyOptions assembly;
  std::uint64_t seed = 42;
  std::string config_digest;
};

struct ModelResult {
  learn::ModelKind kind = learn::ModelKind::decision_tree;
  std::optional<double> mae_soil;
  std::optional<double> mae_sw;
  std::optional<ZScore> z_soil;
  std::optional<ZScore> z_sw;
  std::optional<PairedTest> paired;
  std::vector<double> abs_err_soil;
  std::vector<double> abs_err_sw;
};

struct Report {
  std::vector<ModelResult> models;
  std::optional<YearRange> train_years;  // years actually present in the training rows
  int test_year = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  ModeSelection modes = ModeSelection::both;
  Alternative alternative = Alternative::b_less_than_a;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_dropped = 0;  // crop records without a complete instance
};

/// Seed handed to the model at position `index` of the configured list.
std::uint64_t model_seed(std::uint64_t run_seed, std::size_t index);

/// Both modes share one instance set: the zone-years that are complete in
/// soil+weather mode. Every model is trained on the same split in each mode.
Report run_experiment(const Dataset& data, const ExperimentConfig& cfg);

/// model,mae_soil,mae_sw,z_soil,p_soil,z_sw,p_sw,t_paired,p_paired
/// Missing values (mode not run) are empty fields.
void write_report_csv(std::ostream& out, const Report& report);
/// Reads only the per-model rows; metadata is left at defaults.
Report read_report_csv(std::istream& in);

std::string render_report_text(const Report& report);
std::string render_comparison_text(const Report& report);
std::string render_mae_svg(const Report& report);

}  // namespace cropyield
