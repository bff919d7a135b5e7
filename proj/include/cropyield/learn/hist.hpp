#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cropyield/features.hpp"
#include "cropyield/learn/params.hpp"
#include "cropyield/learn/tree.hpp"

namespace cropyield::learn {

/// Equal-frequency bins per feature. When a feature has at most `n_bins`
/// distinct values every value gets its own bin.
class BinMapper {
 public:
  static BinMapper fit(MatrixView x, int n_bins);

  std::uint16_t bin(std::size_t feature, double v) const;
  std::size_t bin_count(std::size_t feature) const { return cuts_[feature].size() + 1; }
  std::size_t features() const { return cuts_.size(); }
  /// Smallest / largest training value that fell in a bin.
  double bin_min(std::size_t feature, std::size_t b) const { return lo_[feature][b]; }
  double bin_max(std::size_t feature, std::size_t b) const { return hi_[feature][b]; }

 private:
  std::vector<std::vector<double>> cuts_;
  std::vector<std::vector<double>> lo_;
  std::vector<std::vector<double>> hi_;
};

/// Column-major bin indices.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> bins;

  static BinnedMatrix build(const BinMapper& mapper, MatrixView x);
  std::span<const std::uint16_t> column(std::size_t f) const { return {bins.data() + f * rows, rows}; }
};

struct HistBin {
  double sum = 0;  // sum of centered targets
  std::int32_t count = 0;
};

/// Histograms of (targets - center) over `rows` for every feature. Feature f
/// occupies out[offsets[f] .. offsets[f+1]).
void build_histograms(const BinnedMatrix& binned, std::span<const std::int32_t> rows,
                      std::span<const double> targets, double center,
                      std::span<const std::size_t> offsets, std::span<HistBin> out);
/// Single-threaded reference for build_histograms; results are identical.
void build_histograms_serial(const BinnedMatrix& binned, std::span<const std::int32_t> rows,
                             std::span<const double> targets, double center,
                             std::span<const std::size_t> offsets, std::span<HistBin> out);

struct LeafwiseSpec {
  int max_leaves = 31;
  int max_depth = kUnlimitedDepth;
  int min_samples_leaf = 5;
};

/// Best-first (leaf-wise) growth: repeatedly splits the leaf with the largest
/// variance reduction until `max_leaves` leaves exist or no leaf can split.
/// `rows` must be ascending.
Tree grow_leafwise(const BinnedMatrix& binned, const BinMapper& mapper,
                   std::span<const double> targets, std::span<const std::int32_t> rows,
                   const LeafwiseSpec& spec);

}  // namespace cropyield::learn
