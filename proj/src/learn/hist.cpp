#include "cropyield/learn/hist.hpp"

#include <algorithm>
#include <limits>

#include "cropyield/learn/params.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cropyield::learn {

BinMapper BinMapper::fit(MatrixView x, int n_bins) {
  BinMapper m;
  m.cuts_.resize(x.cols);
  m.lo_.resize(x.cols);
  m.hi_.resize(x.cols);
  const auto cols = static_cast<std::ptrdiff_t>(x.cols);
#pragma omp parallel for schedule(static) if (x.rows * x.cols > 20000)
  for (std::ptrdiff_t jj = 0; jj < cols; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    std::vector<double> v(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) v[i] = x(i, j);
    std::sort(v.begin(), v.end());
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    for (double d : v) {
      if (distinct.empty() || distinct.back() < d) {
        distinct.push_back(d);
        counts.push_back(1);
      } else {
        ++counts.back();
      }
    }
    auto& cuts = m.cuts_[j];
    auto& lo = m.lo_[j];
    auto& hi = m.hi_[j];
    if (distinct.empty()) {
      lo.push_back(0);
      hi.push_back(0);
      continue;
    }
    const auto target = static_cast<double>(x.rows) / n_bins;
    const bool every_value = distinct.size() <= static_cast<std::size_t>(n_bins);
    std::size_t cumulative = 0;
    lo.push_back(distinct[0]);
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      cumulative += counts[k];
      bool cut = every_value ||
                 (cuts.size() + 1 < static_cast<std::size_t>(n_bins) &&
                  static_cast<double>(cumulative) >= target * static_cast<double>(cuts.size() + 1));
      if (!cut) continue;
      cuts.push_back(split_midpoint(distinct[k], distinct[k + 1]));
      hi.push_back(distinct[k]);
      lo.push_back(distinct[k + 1]);
    }
    hi.push_back(distinct.back());
  }
  return m;
}

std::uint16_t BinMapper::bin(std::size_t feature, double v) const {
  const auto& c = cuts_[feature];
  return static_cast<std::uint16_t>(std::lower_bound(c.begin(), c.end(), v) - c.begin());
}

BinnedMatrix BinnedMatrix::build(const BinMapper& mapper, MatrixView x) {
  BinnedMatrix b;
  b.rows = x.rows;
  b.cols = x.cols;
  b.bins.resize(x.rows * x.cols);
  for (std::size_t j = 0; j < x.cols; ++j)
    for (std::size_t i = 0; i < x.rows; ++i) b.bins[j * x.rows + i] = mapper.bin(j, x(i, j));
  return b;
}

namespace {

void histogram_one(const BinnedMatrix& binned, std::size_t f, std::span<const std::int32_t> rows,
                   std::span<const double> targets, double center, HistBin* out) {
  auto col = binned.column(f);
  for (auto r : rows) {
    auto i = static_cast<std::size_t>(r);
    auto& h = out[col[i]];
    h.sum += targets[i] - center;
    ++h.count;
  }
}

void clear(std::span<const std::size_t> offsets, std::span<HistBin> out) {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(offsets.back()), HistBin{});
}

bool inside_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return true;
#endif
}

}  // namespace

void build_histograms(const BinnedMatrix& binned, std::span<const std::int32_t> rows,
                      std::span<const double> targets, double center,
                      std::span<const std::size_t> offsets, std::span<HistBin> out) {
  clear(offsets, out);
  const auto cols = static_cast<std::ptrdiff_t>(binned.cols);
  const bool go_parallel = !inside_parallel_region() && rows.size() * binned.cols > 8192;
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t f = 0; f < cols; ++f)
    histogram_one(binned, static_cast<std::size_t>(f), rows, targets, center,
                  out.data() + offsets[static_cast<std::size_t>(f)]);
}

void build_histograms_serial(const BinnedMatrix& binned, std::span<const std::int32_t> rows,
                             std::span<const double> targets, double center,
                             std::span<const std::size_t> offsets, std::span<HistBin> out) {
  clear(offsets, out);
  for (std::size_t f = 0; f < binned.cols; ++f)
    histogram_one(binned, f, rows, targets, center, out.data() + offsets[f]);
}

namespace {

struct LeafSplit {
  bool valid = false;
  int feature = -1;
  std::size_t bin = 0;  // rows with bin <= this go left
  double threshold = 0;
  double gain = 0;
};

struct Leaf {
  std::int32_t node = 0;
  int depth = 0;
  std::vector<std::int32_t> rows;
  LeafSplit split;
};

class LeafwiseGrower {
 public:
  LeafwiseGrower(const BinnedMatrix& binned, const BinMapper& mapper, std::span<const double> targets,
                 const LeafwiseSpec& spec)
      : binned_(binned), mapper_(mapper), t_(targets), spec_(spec) {
    offsets_.push_back(0);
    for (std::size_t f = 0; f < binned.cols; ++f) offsets_.push_back(offsets_.back() + mapper.bin_count(f));
    hist_.resize(offsets_.back());
  }

  Tree grow(std::span<const std::int32_t> rows) {
    Tree tree;
    tree.nodes.push_back(TreeNode{});
    std::vector<Leaf> leaves;
    leaves.push_back(Leaf{0, 0, std::vector<std::int32_t>(rows.begin(), rows.end()), {}});
    evaluate(leaves.back());

    while (static_cast<int>(leaves.size()) < spec_.max_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        const auto& s = leaves[k].split;
        if (!s.valid) continue;
        if (pick == leaves.size() || s.gain > leaves[pick].split.gain ||
            (s.gain == leaves[pick].split.gain && leaves[k].node < leaves[pick].node))
          pick = k;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
      const auto f = static_cast<std::size_t>(parent.split.feature);
      auto col = binned_.column(f);
      Leaf left{static_cast<std::int32_t>(tree.nodes.size()), parent.depth + 1, {}, {}};
      Leaf right{left.node + 1, parent.depth + 1, {}, {}};
      for (auto r : parent.rows)
        (col[static_cast<std::size_t>(r)] <= parent.split.bin ? left.rows : right.rows).push_back(r);

      auto& node = tree.nodes[static_cast<std::size_t>(parent.node)];
      node.feature = parent.split.feature;
      node.threshold = parent.split.threshold;
      node.left = left.node;
      node.right = right.node;
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});

      evaluate(left);
      evaluate(right);
      leaves.push_back(std::move(left));
      leaves.push_back(std::move(right));
    }

    for (const auto& leaf : leaves) tree.nodes[static_cast<std::size_t>(leaf.node)].value = mean(leaf.rows);
    return tree;
  }

 private:
  double mean(std::span<const std::int32_t> rows) const {
    double s = 0;
    for (auto r : rows) s += t_[static_cast<std::size_t>(r)];
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
  }

  void evaluate(Leaf& leaf) {
    leaf.split = {};
    const double n = static_cast<double>(leaf.rows.size());
    if (spec_.max_depth >= 0 && leaf.depth >= spec_.max_depth) return;
    if (n < 2.0 * spec_.min_samples_leaf) return;

    const double center = mean(leaf.rows);
    double total = 0, sse = 0;
    bool constant = true;
    const double first = t_[static_cast<std::size_t>(leaf.rows[0])];
    for (auto r : leaf.rows) {
      double v = t_[static_cast<std::size_t>(r)];
      double c = v - center;
      total += c;
      sse += c * c;
      if (v != first) constant = false;
    }
    if (constant) return;
    const double tol = 1e-12 * sse;

    build_histograms(binned_, leaf.rows, t_, center, offsets_, hist_);

    for (std::size_t f = 0; f < binned_.cols; ++f) {
      const HistBin* h = hist_.data() + offsets_[f];
      const std::size_t nb = offsets_[f + 1] - offsets_[f];
      double sl = 0, nl = 0;
      std::size_t last = nb;  // last non-empty bin already added to the left side
      LeafSplit best_f;
      for (std::size_t b = 0; b < nb; ++b) {
        if (h[b].count == 0) continue;
        if (last != nb) {
          double nr = n - nl;
          if (nl >= spec_.min_samples_leaf && nr >= spec_.min_samples_leaf) {
            double sr = total - sl;
            double gain = sl * sl / nl + sr * sr / nr - total * total / n;
            if (gain > best_f.gain + tol) {
              best_f = {true, static_cast<int>(f), last,
                        split_midpoint(mapper_.bin_max(f, last), mapper_.bin_min(f, b)), gain};
            }
          }
        }
        sl += h[b].sum;
        nl += h[b].count;
        last = b;
      }
      if (best_f.valid && (!leaf.split.valid || best_f.gain > leaf.split.gain + tol)) leaf.split = best_f;
    }
  }

  const BinnedMatrix& binned_;
  const BinMapper& mapper_;
  std::span<const double> t_;
  LeafwiseSpec spec_;
  std::vector<std::size_t> offsets_;
  std::vector<HistBin> hist_;
};

}  // namespace

Tree grow_leafwise(const BinnedMatrix& binned, const BinMapper& mapper, std::span<const double> targets,
                   std::span<const std::int32_t> rows, const LeafwiseSpec& spec) {
  LeafwiseGrower g(binned, mapper, targets, spec);
  return g.grow(rows);
}

}  // namespace cropyield::learn
