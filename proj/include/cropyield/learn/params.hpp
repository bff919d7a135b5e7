#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cropyield::learn {

enum class ModelKind {
  decision_tree,
  linear_svr,
  random_forest,
  extra_trees,
  gradient_boosting,
  hist_gradient_boosting,
};

std::string_view kind_name(ModelKind k);
ModelKind parse_kind(std::string_view name);
/// Label used in report tables and charts.
std::string_view display_name(ModelKind k);

inline constexpr int kUnlimitedDepth = -1;

struct SvrParams {
  double epsilon = 0.1;
  double c = 1.0;
  int iterations = 5000;
  double step_size = 1.0;
};

/// Hyperparameters for every model family. Fields a family does not use
/// are ignored by it.
struct ModelParams {
  ModelKind kind = ModelKind::decision_tree;
  int max_depth = 6;         // kUnlimitedDepth for no limit; 0 gives a single leaf
  int min_samples_leaf = 5;
  int n_estimators = 200;    // boosting accepts 0 (constant predictor)
  double learning_rate = 0.1;
  double subsample = 1.0;    // row fraction per boosting round
  int max_features = 0;      // features tried per split; 0 = family default
  bool bootstrap = true;     // random forest only
  int n_bins = 64;           // histogram booster
  int max_leaves = 31;       // histogram booster
  SvrParams svr;
  std::uint64_t seed = 0;

  /// Family defaults. Random forest tries ceil(d/3) features per split; the
  /// histogram booster grows leaf-wise without a depth limit.
  static ModelParams defaults(ModelKind kind);

  /// Throws Error describing the first violated constraint.
  void validate() const;

  /// Features tried per split for a matrix with `n_features` columns.
  int features_per_split(int n_features) const;
};

}  // namespace cropyield::learn
