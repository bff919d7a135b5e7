#pragma once

#include <span>
#include <vector>

#include "cropyield/features.hpp"
#include "cropyield/learn/params.hpp"

namespace cropyield::learn {

/// Linear model on standardized inputs: bias + sum_j w_j (x_j - mean_j) / scale_j.
/// Constant columns have scale 0 and contribute nothing.
struct LinearModel {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0;

  double predict(std::span<const double> row) const;
  bool operator==(const LinearModel&) const = default;
};

/// Sums over rows of the epsilon-insensitive loss and of its subgradient
/// with respect to (w, b), excluding the regularizer and the factor c.
struct SvrSums {
  std::vector<double> grad_w;
  double grad_b = 0;
  double loss = 0;
};

/// `z` must already be standardized. Rows are reduced in fixed-size chunks
/// combined in chunk order, so the result does not depend on thread count.
void svr_subgradient(MatrixView z, std::span<const double> y, std::span<const double> w, double b,
                     double epsilon, SvrSums& out);
/// Plain row loop; agrees with svr_subgradient up to summation rounding.
void svr_subgradient_serial(MatrixView z, std::span<const double> y, std::span<const double> w,
                            double b, double epsilon, SvrSums& out);

/// Minimizes 0.5 |w|^2 + c * sum max(0, |w.z + b - y| - epsilon) by
/// subgradient descent with step step_size / ((1 + c n) sqrt(t)), starting
/// from w = 0, b = mean(y), and returns the best iterate seen. Throws Error
/// on non-finite input. `objective_history`, when given, receives the
/// objective at every iterate.
LinearModel fit_linear_svr(MatrixView x, std::span<const double> y, const SvrParams& params,
                           std::vector<double>* objective_history = nullptr);

}  // namespace cropyield::learn
