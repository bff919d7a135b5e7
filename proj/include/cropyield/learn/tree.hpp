#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cropyield/features.hpp"
#include "cropyield/learn/rng.hpp"

namespace cropyield::learn {

struct SplitChoice {
  int feature = -1;
  double threshold = 0;  // rows with x <= threshold go left
  double score = 0;      // weighted-variance reduction of the node

  bool operator==(const SplitChoice&) const = default;
};

/// Exhaustive CART split search over `rows` (a multiset; repeats count as
/// weight) and `features`. Candidates are midpoints between consecutive
/// distinct values; ties go to the lowest feature index, then the lowest
/// threshold. nullopt when no candidate reduces variance or every candidate
/// leaves a side with fewer than `min_samples_leaf` rows.
std::optional<SplitChoice> best_split(MatrixView x, std::span<const double> y,
                                      std::span<const std::size_t> rows,
                                      std::span<const int> features, int min_samples_leaf = 1);
/// Single-threaded reference for best_split; results are identical.
std::optional<SplitChoice> best_split_serial(MatrixView x, std::span<const double> y,
                                             std::span<const std::size_t> rows,
                                             std::span<const int> features, int min_samples_leaf = 1);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0;  // leaf output, relative to Tree::offset

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  double offset = 0;
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

/// Row indices of each column sorted by value (ties by row index). Shared
/// read-only by every tree grown on the same matrix.
class SortedColumns {
 public:
  explicit SortedColumns(MatrixView x);
  std::span<const std::int32_t> order(std::size_t feature) const {
    return {order_.data() + feature * rows_, rows_};
  }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::int32_t> order_;
};

enum class ThresholdRule { best, random };

struct GrowSpec {
  int max_depth = 6;
  int min_samples_leaf = 5;
  int features_per_split = 0;  // 0 or >= d: all features
  ThresholdRule rule = ThresholdRule::best;
};

/// Grows one regression tree on `targets` (already shifted by `offset`).
/// `weights[i]` is the multiplicity of row i; zero excludes it. `rng` is
/// required when features are subsampled or thresholds are random.
Tree grow_tree(MatrixView x, const SortedColumns& sorted, std::span<const double> targets,
               std::span<const int> weights, double offset, const GrowSpec& spec, Rng* rng);

/// Split point strictly between two distinct values (never equal to `hi`).
double split_midpoint(double lo, double hi);

/// Weighted mean in row order.
double weighted_mean(std::span<const double> y, std::span<const int> weights);

}  // namespace cropyield::learn
