#include "cropyield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cropyield/domain.hpp"

namespace cropyield {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Continued fraction for I_x(a,b), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

// I_x(a,b) given both x and y = 1 - x, so callers can pass an accurate
// complement.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0) return 0.0;
  if (y <= 0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw Error("incomplete beta needs a, b > 0");
  if (std::isnan(x) || x < 0 || x > 1) throw Error("incomplete beta needs x in [0, 1]");
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0)) throw Error("student t needs df > 0");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x, y);  // P(T > |t|)
  return t >= 0 ? tail : 1.0 - tail;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (t <= 0) return student_t_upper_tail(-t, df);
  return 1.0 - student_t_upper_tail(t, df);
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(fmt::format("mae: length mismatch {} vs {}", y_true.size(), y_pred.size()));
  if (y_true.empty()) throw Error("mae: empty input");
  double s = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += std::abs(y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

std::vector<double> abs_errors(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(fmt::format("abs_errors: length mismatch {} vs {}", y_true.size(), y_pred.size()));
  std::vector<double> out(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) out[i] = std::abs(y_true[i] - y_pred[i]);
  return out;
}

std::vector<ZScore> zscore_panel(std::span<const double> maes) {
  if (maes.size() < 2) throw Error("zscore_panel needs at least two models");
  const double n = static_cast<double>(maes.size());
  const double mean = std::accumulate(maes.begin(), maes.end(), 0.0) / n;
  double ss = 0;
  for (double m : maes) ss += (m - mean) * (m - mean);
  const double sd = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(maes.begin(), maes.end());
  const bool degenerate = *lo == *hi || !(sd > 1e-12 * std::max(1.0, std::abs(mean)));

  std::vector<ZScore> out;
  out.reserve(maes.size());
  for (double m : maes) {
    if (degenerate) {
      out.push_back({0.0, 0.5});
      continue;
    }
    const double z = (m - mean) / sd;
    out.push_back({z, normal_upper_tail(z)});
  }
  return out;
}

PairedTest paired_t_one_tailed(std::span<const double> a, std::span<const double> b,
                               Alternative alternative) {
  if (a.size() != b.size())
    throw Error(fmt::format("paired test: length mismatch {} vs {}", a.size(), b.size()));
  if (a.size() < 2) throw Error("paired test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const bool all_equal = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });

  PairedTest r;
  r.n = n;
  if (all_equal || sd == 0) {
    if (d[0] == 0 || mean == 0) {
      r.t = 0;
      r.p = 0.5;
      return r;
    }
    r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  } else {
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  }
  const double df = static_cast<double>(n - 1);
  r.p = alternative == Alternative::b_less_than_a ? student_t_upper_tail(r.t, df)
                                                  : student_t_cdf(r.t, df);
  return r;
}

}  // namespace cropyield
