#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cropyield/features.hpp"
#include "cropyield/learn/params.hpp"
#include "cropyield/learn/svr.hpp"
#include "cropyield/learn/tree.hpp"

namespace cropyield::learn {

/// base + scale * (t_1 + t_2 + ...), accumulated tree by tree; with
/// `average` set the tree outputs are summed and divided by the tree count.
struct TreeEnsemble {
  double base = 0;
  double scale = 1;
  bool average = false;
  std::vector<Tree> trees;

  double predict(std::span<const double> row) const;
  bool operator==(const TreeEnsemble&) const = default;
};

struct TrainedModel {
  ModelKind kind = ModelKind::decision_tree;
  std::vector<std::string> column_names;
  std::variant<TreeEnsemble, LinearModel> body;

  const TreeEnsemble& ensemble() const { return std::get<TreeEnsemble>(body); }
  const LinearModel& linear() const { return std::get<LinearModel>(body); }
};

// All trainers throw Error on an empty matrix, non-finite values or invalid
// params. params.kind is ignored; the trainer decides the family.
TrainedModel train_decision_tree(const DesignMatrix& m, ModelParams params);
/// Bootstrap rows (unless params.bootstrap is false) and ceil(d/3) features
/// per split by default. Tree i is seeded from (params.seed, i).
TrainedModel train_random_forest(const DesignMatrix& m, ModelParams params);
/// All rows, random thresholds, all features per split by default.
TrainedModel train_extra_trees(const DesignMatrix& m, ModelParams params);
/// Squared-error boosting of depth-limited CART trees from the mean.
/// `train_mse`, when given, receives the training MSE after 0..n rounds.
TrainedModel train_gradient_boosting(const DesignMatrix& m, ModelParams params,
                                     std::vector<double>* train_mse = nullptr);
/// Boosting of leaf-wise trees over equal-frequency feature bins.
TrainedModel train_hist_gradient_boosting(const DesignMatrix& m, ModelParams params,
                                          std::vector<double>* train_mse = nullptr);
TrainedModel train_linear_svr(const DesignMatrix& m, ModelParams params);

/// Dispatches on params.kind.
TrainedModel train(const DesignMatrix& m, const ModelParams& params);

/// Throws Error naming the differing columns when `m` was not built with the
/// training column layout.
std::vector<double> predict(const TrainedModel& model, const DesignMatrix& m);
std::vector<double> predict(const TrainedModel& model, MatrixView x);

/// Line-oriented text format, first line "cropyield-model 1". Numbers are
/// written in shortest round-trip form, so load(save(m)) predicts
/// identically.
void save_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace cropyield::learn
