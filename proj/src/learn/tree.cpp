#include "cropyield/learn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cropyield::learn {

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf())
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  return offset + nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  // children are always created after their parent
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

double split_midpoint(double lo, double hi) {
  const double gap = hi - lo;
  double m = std::isfinite(gap) ? lo + gap / 2.0 : lo / 2.0 + hi / 2.0;
  if (!(m < hi)) m = lo;
  return m;
}

double weighted_mean(std::span<const double> y, std::span<const int> weights) {
  double s = 0;
  long long w = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (weights[i] == 0) continue;
    s += weights[i] * y[i];
    w += weights[i];
  }
  return s / static_cast<double>(w);
}

SortedColumns::SortedColumns(MatrixView x) : rows_(x.rows), order_(x.rows * x.cols) {
  const auto cols = static_cast<std::ptrdiff_t>(x.cols);
#pragma omp parallel for schedule(static) if (x.rows * x.cols > 20000)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    auto first = order_.begin() + j * static_cast<std::ptrdiff_t>(rows_);
    std::iota(first, first + static_cast<std::ptrdiff_t>(rows_), 0);
    const auto col = static_cast<std::size_t>(j);
    std::stable_sort(first, first + static_cast<std::ptrdiff_t>(rows_),
                     [&](std::int32_t a, std::int32_t b) {
                       return x(static_cast<std::size_t>(a), col) < x(static_cast<std::size_t>(b), col);
                     });
  }
}

namespace {

struct FeatureBest {
  double gain = 0;  // reduction of the node's weighted sum of squares
  double threshold = 0;
  bool valid = false;
};

struct NodeStats {
  double weight = 0;
  double mean = 0;
  double centered_sum = 0;  // sum of w * (t - mean); ~0
  double sse = 0;
  bool constant = true;
};

class Grower {
 public:
  Grower(MatrixView x, const SortedColumns& sorted, std::span<const double> targets,
         std::span<const int> weights, const GrowSpec& spec, Rng* rng, bool parallel)
      : x_(x), t_(targets), w_(weights), spec_(spec), rng_(rng), parallel_(parallel),
        goes_left_(x.rows, 0) {
    for (auto w : weights)
      if (w > 0) ++m_;
    seg_.resize(m_ * x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) {
      std::size_t k = 0;
      for (auto r : sorted.order(j))
        if (w_[static_cast<std::size_t>(r)] > 0) seg_[j * m_ + k++] = r;
    }
  }

  Tree grow(double offset) {
    Tree tree;
    tree.offset = offset;
    nodes_ = &tree.nodes;
    if (m_ == 0) {
      tree.nodes.push_back(TreeNode{});
      return tree;
    }
    build(0, m_, 0);
    return tree;
  }

  // Split search on the root node only, over an explicit feature list.
  std::optional<SplitChoice> root_split(std::span<const int> features) {
    if (m_ == 0) return std::nullopt;
    auto stats = node_stats(0, m_);
    if (stats.constant) return std::nullopt;
    std::vector<double> draws;
    auto best = search(0, m_, stats, features, draws);
    if (!best) return std::nullopt;
    best->score /= stats.weight;
    return best;
  }

 private:
  std::span<const std::int32_t> segment(std::size_t feature, std::size_t begin, std::size_t end) const {
    return {seg_.data() + feature * m_ + begin, end - begin};
  }

  double value(std::int32_t row, std::size_t feature) const {
    return x_(static_cast<std::size_t>(row), feature);
  }

  NodeStats node_stats(std::size_t begin, std::size_t end) const {
    NodeStats s;
    double sum = 0;
    auto rows = segment(0, begin, end);
    double first = t_[static_cast<std::size_t>(rows[0])];
    for (auto r : rows) {
      auto i = static_cast<std::size_t>(r);
      s.weight += w_[i];
      sum += w_[i] * t_[i];
      if (t_[i] != first) s.constant = false;
    }
    s.mean = sum / s.weight;
    for (auto r : rows) {
      auto i = static_cast<std::size_t>(r);
      double c = t_[i] - s.mean;
      s.centered_sum += w_[i] * c;
      s.sse += w_[i] * c * c;
    }
    return s;
  }

  // Exhaustive scan of one feature's sorted segment.
  FeatureBest scan_best(std::size_t f, std::size_t begin, std::size_t end, const NodeStats& s,
                        double tol) const {
    FeatureBest best;
    auto rows = segment(f, begin, end);
    const double min_leaf = spec_.min_samples_leaf;
    double wl = 0, sl = 0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      auto i = static_cast<std::size_t>(rows[k]);
      wl += w_[i];
      sl += w_[i] * (t_[i] - s.mean);
      double xv = value(rows[k], f);
      double xn = value(rows[k + 1], f);
      if (!(xv < xn)) continue;
      double wr = s.weight - wl;
      if (wl < min_leaf || wr < min_leaf) continue;
      double sr = s.centered_sum - sl;
      double gain = sl * sl / wl + sr * sr / wr - s.centered_sum * s.centered_sum / s.weight;
      if (gain > best.gain + tol) {
        best = {gain, split_midpoint(xv, xn), true};
      }
    }
    return best;
  }

  // One uniformly drawn threshold between the node's min and max of f.
  FeatureBest scan_random(std::size_t f, std::size_t begin, std::size_t end, const NodeStats& s,
                          double u, double tol) const {
    FeatureBest best;
    auto rows = segment(f, begin, end);
    double lo = value(rows.front(), f);
    double hi = value(rows.back(), f);
    if (!(lo < hi)) return best;
    double thr = lo + u * (hi - lo);
    if (!(thr < hi)) thr = lo;
    double wl = 0, sl = 0;
    for (auto r : rows) {
      if (value(r, f) > thr) break;
      auto i = static_cast<std::size_t>(r);
      wl += w_[i];
      sl += w_[i] * (t_[i] - s.mean);
    }
    double wr = s.weight - wl;
    if (wl < spec_.min_samples_leaf || wr < spec_.min_samples_leaf) return best;
    double sr = s.centered_sum - sl;
    double gain = sl * sl / wl + sr * sr / wr - s.centered_sum * s.centered_sum / s.weight;
    if (gain > tol) best = {gain, thr, true};
    return best;
  }

  std::optional<SplitChoice> search(std::size_t begin, std::size_t end, const NodeStats& s,
                                    std::span<const int> features, std::span<const double> draws) {
    const double tol = 1e-12 * s.sse;
    const auto nf = static_cast<std::ptrdiff_t>(features.size());
    std::vector<FeatureBest> per_feature(features.size());
    const bool go_parallel = parallel_ && (end - begin) * features.size() > 4096;
#pragma omp parallel for schedule(dynamic, 4) if (go_parallel)
    for (std::ptrdiff_t k = 0; k < nf; ++k) {
      auto f = static_cast<std::size_t>(features[static_cast<std::size_t>(k)]);
      per_feature[static_cast<std::size_t>(k)] =
          spec_.rule == ThresholdRule::best
              ? scan_best(f, begin, end, s, tol)
              : scan_random(f, begin, end, s, draws[static_cast<std::size_t>(k)], tol);
    }
    std::optional<SplitChoice> best;
    for (std::size_t k = 0; k < features.size(); ++k) {
      const auto& fb = per_feature[k];
      if (!fb.valid) continue;
      if (!best || fb.gain > best->score + tol) best = SplitChoice{features[k], fb.threshold, fb.gain};
    }
    return best;
  }

  std::vector<int> pick_features() {
    const int d = static_cast<int>(x_.cols);
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    const int k = spec_.features_per_split;
    if (k <= 0 || k >= d) return all;
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(*rng_))]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
  }

  void partition(std::size_t begin, std::size_t end, std::size_t left_count) {
    const auto cols = static_cast<std::ptrdiff_t>(x_.cols);
    const bool go_parallel = parallel_ && (end - begin) * x_.cols > 8192;
#pragma omp parallel for schedule(static) if (go_parallel)
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      std::int32_t* base = seg_.data() + static_cast<std::size_t>(j) * m_;
      thread_local std::vector<std::int32_t> right;
      right.clear();
      std::size_t l = begin;
      for (std::size_t k = begin; k < end; ++k) {
        if (goes_left_[static_cast<std::size_t>(base[k])])
          base[l++] = base[k];
        else
          right.push_back(base[k]);
      }
      std::copy(right.begin(), right.end(), base + left_count);
    }
  }

  std::int32_t build(std::size_t begin, std::size_t end, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_->size());
    nodes_->push_back(TreeNode{});
    auto stats = node_stats(begin, end);
    (*nodes_)[static_cast<std::size_t>(id)].value = stats.mean;

    bool can_split = !stats.constant && (spec_.max_depth < 0 || depth < spec_.max_depth) &&
                     stats.weight >= 2.0 * spec_.min_samples_leaf;
    if (!can_split) return id;

    auto features = pick_features();
    std::vector<double> draws;
    if (spec_.rule == ThresholdRule::random) {
      draws.reserve(features.size());
      for (std::size_t k = 0; k < features.size(); ++k) draws.push_back(uniform01(*rng_));
    }
    auto split = search(begin, end, stats, features, draws);
    if (!split) return id;

    const auto f = static_cast<std::size_t>(split->feature);
    std::size_t left_count = begin;
    for (auto r : segment(f, begin, end)) {
      bool left = value(r, f) <= split->threshold;
      goes_left_[static_cast<std::size_t>(r)] = left;
      if (left) ++left_count;
    }
    partition(begin, end, left_count);

    std::int32_t l = build(begin, left_count, depth + 1);
    std::int32_t r = build(left_count, end, depth + 1);
    auto& node = (*nodes_)[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    node.value = 0;
    return id;
  }

  MatrixView x_;
  std::span<const double> t_;
  std::span<const int> w_;
  GrowSpec spec_;
  Rng* rng_;
  bool parallel_;
  std::size_t m_ = 0;
  std::vector<std::int32_t> seg_;
  std::vector<char> goes_left_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

bool inside_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return true;
#endif
}

std::optional<SplitChoice> best_split_impl(MatrixView x, std::span<const double> y,
                                           std::span<const std::size_t> rows,
                                           std::span<const int> features, int min_samples_leaf,
                                           bool parallel) {
  std::vector<int> weights(x.rows, 0);
  for (auto r : rows) ++weights[r];
  SortedColumns sorted(x);
  GrowSpec spec;
  spec.min_samples_leaf = min_samples_leaf;
  std::vector<int> feats(features.begin(), features.end());
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
  Grower g(x, sorted, y, weights, spec, nullptr, parallel);
  return g.root_split(feats);
}

}  // namespace

std::optional<SplitChoice> best_split(MatrixView x, std::span<const double> y,
                                      std::span<const std::size_t> rows,
                                      std::span<const int> features, int min_samples_leaf) {
  return best_split_impl(x, y, rows, features, min_samples_leaf, !inside_parallel_region());
}

std::optional<SplitChoice> best_split_serial(MatrixView x, std::span<const double> y,
                                             std::span<const std::size_t> rows,
                                             std::span<const int> features, int min_samples_leaf) {
  return best_split_impl(x, y, rows, features, min_samples_leaf, false);
}

Tree grow_tree(MatrixView x, const SortedColumns& sorted, std::span<const double> targets,
               std::span<const int> weights, double offset, const GrowSpec& spec, Rng* rng) {
  Grower g(x, sorted, targets, weights, spec, rng, !inside_parallel_region());
  return g.grow(offset);
}

}  // namespace cropyield::learn
