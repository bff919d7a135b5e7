#include "cropyield/learn/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cropyield::learn {

double LinearModel::predict(std::span<const double> row) const {
  double s = bias;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (scale[j] > 0) s += weights[j] * (row[j] - mean[j]) / scale[j];
  return s;
}

namespace {

constexpr std::size_t kChunkRows = 256;

void accumulate_rows(MatrixView z, std::span<const double> y, std::span<const double> w, double b,
                     double epsilon, std::size_t begin, std::size_t end, double* grad_w,
                     double& grad_b, double& loss) {
  for (std::size_t i = begin; i < end; ++i) {
    auto row = z.row(i);
    double r = b - y[i];
    for (std::size_t j = 0; j < z.cols; ++j) r += w[j] * row[j];
    double excess = std::abs(r) - epsilon;
    if (excess <= 0) continue;
    loss += excess;
    double sign = r > 0 ? 1.0 : -1.0;
    grad_b += sign;
    for (std::size_t j = 0; j < z.cols; ++j) grad_w[j] += sign * row[j];
  }
}

bool inside_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return true;
#endif
}

}  // namespace

void svr_subgradient(MatrixView z, std::span<const double> y, std::span<const double> w, double b,
                     double epsilon, SvrSums& out) {
  const std::size_t d = z.cols;
  const std::size_t chunks = (z.rows + kChunkRows - 1) / kChunkRows;
  const std::size_t stride = d + 2;
  std::vector<double> partial(chunks * stride, 0.0);
  const auto nchunks = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static) if (!inside_parallel_region() && chunks > 1)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    double* p = partial.data() + static_cast<std::size_t>(c) * stride;
    const std::size_t begin = static_cast<std::size_t>(c) * kChunkRows;
    accumulate_rows(z, y, w, b, epsilon, begin, std::min(z.rows, begin + kChunkRows), p, p[d], p[d + 1]);
  }
  out.grad_w.assign(d, 0.0);
  out.grad_b = 0;
  out.loss = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const double* p = partial.data() + c * stride;
    for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += p[j];
    out.grad_b += p[d];
    out.loss += p[d + 1];
  }
}

void svr_subgradient_serial(MatrixView z, std::span<const double> y, std::span<const double> w,
                            double b, double epsilon, SvrSums& out) {
  out.grad_w.assign(z.cols, 0.0);
  out.grad_b = 0;
  out.loss = 0;
  accumulate_rows(z, y, w, b, epsilon, 0, z.rows, out.grad_w.data(), out.grad_b, out.loss);
}

LinearModel fit_linear_svr(MatrixView x, std::span<const double> y, const SvrParams& params,
                           std::vector<double>* objective_history) {
  const std::size_t n = x.rows, d = x.cols;
  if (n == 0) throw Error("cannot fit linear SVR on an empty matrix");
  for (double v : x.data)
    if (!std::isfinite(v)) throw Error("non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw Error("non-finite target value");

  LinearModel model;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x(i, j);
    double mean = s / static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    double sd = std::sqrt(ss / static_cast<double>(n));
    model.mean[j] = mean;
    model.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 0.0;
  }
  std::vector<double> z(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (model.scale[j] > 0) z[i * d + j] = (x(i, j) - model.mean[j]) / model.scale[j];
  MatrixView zv{z, n, d};

  std::vector<double> w(d, 0.0);
  double b = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> best_w = w;
  double best_b = b;
  double best_obj = std::numeric_limits<double>::infinity();
  const double c = params.c;
  const double norm = 1.0 + c * static_cast<double>(n);
  SvrSums sums;

  auto objective = [&](double loss) {
    double ww = 0;
    for (double v : w) ww += v * v;
    return 0.5 * ww + c * loss;
  };

  for (int t = 1; t <= params.iterations + 1; ++t) {
    svr_subgradient(zv, y, w, b, params.epsilon, sums);
    double obj = objective(sums.loss);
    if (objective_history) objective_history->push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
    if (t > params.iterations) break;
    const double eta = params.step_size / (norm * std::sqrt(static_cast<double>(t)));
    for (std::size_t j = 0; j < d; ++j) w[j] -= eta * (w[j] + c * sums.grad_w[j]);
    b -= eta * c * sums.grad_b;
  }
  model.weights = std::move(best_w);
  model.bias = best_b;
  return model;
}

}  // namespace cropyield::learn
