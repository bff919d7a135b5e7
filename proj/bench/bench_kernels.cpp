// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS; on one core the pairs should run at about the same speed.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "cropyield/features.hpp"
#include "cropyield/learn/hist.hpp"
#include "cropyield/learn/model.hpp"
#include "cropyield/learn/svr.hpp"
#include "cropyield/learn/tree.hpp"
#include "cropyield/parallel.hpp"
#include "cropyield/synth.hpp"

using namespace cropyield;
using namespace cropyield::learn;

namespace {

struct Data {
  std::size_t n, d;
  std::vector<double> x, y;
  MatrixView view() const { return {x, n, d}; }
};

const Data& data() {
  static const Data d = [] {
    Data r{1600, 152, {}, {}};
    std::mt19937_64 g(1);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < r.n * r.d; ++i) r.x.push_back(nd(g));
    for (std::size_t i = 0; i < r.n; ++i) r.y.push_back(r.x[i * r.d] + 0.5 * r.x[i * r.d + 7] * r.x[i * r.d + 9] + nd(g));
    return r;
  }();
  return d;
}

const Dataset& dataset() {
  static const Dataset d = synth::gen_dataset(synth::GenConfig{}, 42);
  return d;
}

DesignMatrix matrix() {
  const Data& d = data();
  DesignMatrix m;
  for (std::size_t j = 0; j < d.d; ++j) m.column_names.push_back("f" + std::to_string(j));
  m.rows = d.n;
  m.values = d.x;
  m.target = d.y;
  m.meta.assign(d.n, {"Z", 2013});
  return m;
}

template <bool Parallel>
void BM_BestSplit(benchmark::State& st) {
  const Data& d = data();
  std::vector<std::size_t> rows(d.n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<int> features(d.d);
  std::iota(features.begin(), features.end(), 0);
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? best_split(d.view(), d.y, rows, features, 5)
                                      : best_split_serial(d.view(), d.y, rows, features, 5));
}

template <bool Parallel>
void BM_Histograms(benchmark::State& st) {
  const Data& d = data();
  static const BinMapper mapper = BinMapper::fit(d.view(), 64);
  static const BinnedMatrix binned = BinnedMatrix::build(mapper, d.view());
  std::vector<std::size_t> offsets{0};
  for (std::size_t f = 0; f < d.d; ++f) offsets.push_back(offsets.back() + mapper.bin_count(f));
  std::vector<std::int32_t> rows(d.n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<HistBin> out(offsets.back());
  for (auto _ : st) {
    if (Parallel)
      build_histograms(binned, rows, d.y, 0.0, offsets, out);
    else
      build_histograms_serial(binned, rows, d.y, 0.0, offsets, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_SvrGradient(benchmark::State& st) {
  const Data& d = data();
  std::vector<double> w(d.d, 0.01);
  SvrSums sums;
  for (auto _ : st) {
    if (Parallel)
      svr_subgradient(d.view(), d.y, w, 0.0, 0.1, sums);
    else
      svr_subgradient_serial(d.view(), d.y, w, 0.0, 0.1, sums);
    benchmark::DoNotOptimize(sums.loss);
  }
}

template <bool Parallel>
void BM_Assembly(benchmark::State& st) {
  const Dataset& ds = dataset();
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? assemble_instances(ds, FeatureMode::soil_weather)
                                      : assemble_instances_serial(ds, FeatureMode::soil_weather));
}

// Forest training: trees are built in parallel; one thread is the serial reference.
template <bool Parallel>
void BM_RandomForest(benchmark::State& st) {
  const DesignMatrix m = matrix();
  ModelParams p = ModelParams::defaults(ModelKind::random_forest);
  p.n_estimators = 20;
  set_thread_count(Parallel ? 0 : 1);
  for (auto _ : st) benchmark::DoNotOptimize(train(m, p));
  set_thread_count(0);
}

}  // namespace

BENCHMARK(BM_BestSplit<false>)->Name("best_split/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BestSplit<true>)->Name("best_split/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histograms<false>)->Name("histograms/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Histograms<true>)->Name("histograms/parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SvrGradient<false>)->Name("svr_gradient/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SvrGradient<true>)->Name("svr_gradient/parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Assembly<false>)->Name("assembly/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assembly<true>)->Name("assembly/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomForest<false>)->Name("random_forest/1_thread")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomForest<true>)->Name("random_forest/default_threads")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
