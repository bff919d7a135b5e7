#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cropyield {

/// Standard normal CDF and upper tail via erfc (full double accuracy).
double normal_cdf(double z);
double normal_upper_tail(double z);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Student-t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);
double student_t_upper_tail(double t, double df);

/// Mean absolute error; throws Error on length mismatch or empty input.
double mae(std::span<const double> y_true, std::span<const double> y_pred);
std::vector<double> abs_errors(std::span<const double> y_true, std::span<const double> y_pred);

struct ZScore {
  double z = 0;
  double p = 0.5;  // upper tail 1 - Phi(z)
};

/// z_m = (mae_m - mean) / population std over all models; p_m = 1 - Phi(z_m).
/// If all values are equal every model gets z = 0, p = 0.5. Requires at
/// least two values.
std::vector<ZScore> zscore_panel(std::span<const double> maes);

enum class Alternative {
  b_less_than_a,     // small p supports "b has smaller errors"
  b_greater_than_a,
};

struct PairedTest {
  double t = 0;
  double p = 0.5;
  std::size_t n = 0;
};

/// One-tailed paired t-test on d = a - b with n - 1 degrees of freedom.
/// Zero-variance differences: mean 0 gives t = 0, p = 0.5; otherwise t is
/// +-inf and p is 0 or 1 according to the direction.
PairedTest paired_t_one_tailed(std::span<const double> a, std::span<const double> b,
                               Alternative alternative = Alternative::b_less_than_a);

}  // namespace cropyield
