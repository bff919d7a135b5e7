#include "cropyield/learn/params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cropyield/domain.hpp"

namespace cropyield::learn {

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::linear_svr: return "linear_svr";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::extra_trees: return "extra_trees";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::hist_gradient_boosting: return "hist_gradient_boosting";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (auto k : {ModelKind::decision_tree, ModelKind::linear_svr, ModelKind::random_forest,
                 ModelKind::extra_trees, ModelKind::gradient_boosting, ModelKind::hist_gradient_boosting})
    if (kind_name(k) == name) return k;
  throw Error(fmt::format("unknown model kind '{}'", name));
}

std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::decision_tree: return "Decision Tree";
    case ModelKind::linear_svr: return "Support Vector";
    case ModelKind::random_forest: return "Random Forest";
    case ModelKind::extra_trees: return "Extra Trees";
    case ModelKind::gradient_boosting: return "Gradient Boosting";
    case ModelKind::hist_gradient_boosting: return "Hist Boosting";
  }
  return "?";
}

ModelParams ModelParams::defaults(ModelKind kind) {
  ModelParams p;
  p.kind = kind;
  switch (kind) {
    case ModelKind::decision_tree:
      p.n_estimators = 1;
      break;
    case ModelKind::hist_gradient_boosting:
      p.max_depth = kUnlimitedDepth;
      break;
    default:
      break;
  }
  return p;
}

void ModelParams::validate() const {
  auto fail = [](std::string msg) { throw Error("invalid model params: " + msg); };
  if (max_depth < kUnlimitedDepth) fail(fmt::format("max_depth {}", max_depth));
  if (min_samples_leaf < 1) fail(fmt::format("min_samples_leaf {} < 1", min_samples_leaf));
  bool boosting = kind == ModelKind::gradient_boosting || kind == ModelKind::hist_gradient_boosting;
  if (n_estimators < (boosting ? 0 : 1)) fail(fmt::format("n_estimators {}", n_estimators));
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    fail(fmt::format("learning_rate {} must be > 0", learning_rate));
  if (!(subsample > 0 && subsample <= 1)) fail(fmt::format("subsample {} not in (0,1]", subsample));
  if (max_features < 0) fail(fmt::format("max_features {}", max_features));
  if (n_bins < 2 || n_bins > 65535) fail(fmt::format("n_bins {} not in [2, 65535]", n_bins));
  if (max_leaves < 2) fail(fmt::format("max_leaves {} < 2", max_leaves));
  if (!(svr.epsilon >= 0)) fail(fmt::format("epsilon {}", svr.epsilon));
  if (!(svr.c > 0)) fail(fmt::format("c {}", svr.c));
  if (svr.iterations < 1) fail(fmt::format("iterations {}", svr.iterations));
  if (!(svr.step_size > 0)) fail(fmt::format("step_size {}", svr.step_size));
}

int ModelParams::features_per_split(int n_features) const {
  if (max_features > 0) return std::min(max_features, n_features);
  if (kind == ModelKind::random_forest) return std::max(1, (n_features + 2) / 3);
  return n_features;
}

}  // namespace cropyield::learn
