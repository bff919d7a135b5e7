#include "cropyield/learn/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "cropyield/learn/hist.hpp"
#include "cropyield/learn/rng.hpp"

namespace cropyield::learn {

double TreeEnsemble::predict(std::span<const double> row) const {
  if (average) {
    double s = 0;
    for (const auto& t : trees) s += t.predict(row);
    return trees.empty() ? base : base + scale * (s / static_cast<double>(trees.size()));
  }
  double s = base;
  for (const auto& t : trees) s += scale * t.predict(row);
  return s;
}

namespace {

void check_training_input(const DesignMatrix& m, ModelParams& params, ModelKind kind) {
  params.kind = kind;
  params.validate();
  if (m.rows == 0) throw Error("cannot train on an empty matrix");
  if (m.values.size() != m.rows * m.cols() || m.target.size() != m.rows)
    throw Error("design matrix shape mismatch");
  for (double v : m.values)
    if (!std::isfinite(v)) throw Error("non-finite feature value");
  for (double v : m.target)
    if (!std::isfinite(v)) throw Error("non-finite target value");
}

GrowSpec cart_spec(const ModelParams& p, int n_features) {
  GrowSpec spec;
  spec.max_depth = p.max_depth;
  spec.min_samples_leaf = p.min_samples_leaf;
  spec.features_per_split = p.features_per_split(n_features);
  return spec;
}

TrainedModel wrap(const DesignMatrix& m, ModelKind kind, TreeEnsemble e) {
  return TrainedModel{kind, m.column_names, std::move(e)};
}

TreeEnsemble fit_forest(const DesignMatrix& m, const ModelParams& params, ThresholdRule rule,
                        bool bootstrap) {
  const auto x = m.view();
  const std::size_t n = m.rows;
  SortedColumns sorted(x);
  GrowSpec spec = cart_spec(params, static_cast<int>(m.cols()));
  spec.rule = rule;

  TreeEnsemble e;
  e.average = true;
  e.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const auto count = static_cast<std::ptrdiff_t>(params.n_estimators);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> weights(n, bootstrap ? 0 : 1);
    if (bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) ++weights[pick(rng)];
    }
    const double offset = weighted_mean(m.target, weights);
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = m.target[i] - offset;
    e.trees[static_cast<std::size_t>(t)] = grow_tree(x, sorted, targets, weights, offset, spec, &rng);
  }
  return e;
}

// Rows used by boosting round `round`; all rows unless subsampling.
std::vector<std::int32_t> round_rows(std::size_t n, const ModelParams& p, int round) {
  std::vector<std::int32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (p.subsample >= 1.0) return rows;
  Rng rng(derive_seed(p.seed, static_cast<std::uint64_t>(round)));
  auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.subsample * static_cast<double>(n))));
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(k);
  std::sort(rows.begin(), rows.end());
  return rows;
}

double mse(std::span<const double> y, std::span<const double> f) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
  return s / static_cast<double>(y.size());
}

// Shared boosting loop; `fit_round` grows one tree on the residuals.
template <typename FitRound>
TreeEnsemble boost(const DesignMatrix& m, const ModelParams& params, std::vector<double>* train_mse,
                   FitRound&& fit_round) {
  const auto x = m.view();
  const std::size_t n = m.rows;
  std::vector<int> ones(n, 1);
  TreeEnsemble e;
  e.base = weighted_mean(m.target, ones);
  e.scale = params.learning_rate;
  std::vector<double> f(n, e.base);
  std::vector<double> residual(n);
  if (train_mse) train_mse->push_back(mse(m.target, f));
  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = m.target[i] - f[i];
    Tree tree = fit_round(residual, round_rows(n, params, round), round);
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
      f[static_cast<std::size_t>(i)] += e.scale * tree.predict(x.row(static_cast<std::size_t>(i)));
    e.trees.push_back(std::move(tree));
    if (train_mse) train_mse->push_back(mse(m.target, f));
  }
  return e;
}

}  // namespace

TrainedModel train_decision_tree(const DesignMatrix& m, ModelParams params) {
  check_training_input(m, params, ModelKind::decision_tree);
  const auto x = m.view();
  std::vector<int> weights(m.rows, 1);
  const double offset = weighted_mean(m.target, weights);
  std::vector<double> targets(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) targets[i] = m.target[i] - offset;
  SortedColumns sorted(x);
  Rng rng(params.seed);
  TreeEnsemble e;
  e.trees.push_back(grow_tree(x, sorted, targets, weights, offset, cart_spec(params, static_cast<int>(m.cols())), &rng));
  return wrap(m, ModelKind::decision_tree, std::move(e));
}

TrainedModel train_random_forest(const DesignMatrix& m, ModelParams params) {
  check_training_input(m, params, ModelKind::random_forest);
  return wrap(m, ModelKind::random_forest, fit_forest(m, params, ThresholdRule::best, params.bootstrap));
}

TrainedModel train_extra_trees(const DesignMatrix& m, ModelParams params) {
  check_training_input(m, params, ModelKind::extra_trees);
  return wrap(m, ModelKind::extra_trees, fit_forest(m, params, ThresholdRule::random, false));
}

TrainedModel train_gradient_boosting(const DesignMatrix& m, ModelParams params,
                                     std::vector<double>* train_mse) {
  check_training_input(m, params, ModelKind::gradient_boosting);
  const auto x = m.view();
  SortedColumns sorted(x);
  const GrowSpec spec = cart_spec(params, static_cast<int>(m.cols()));
  auto e = boost(m, params, train_mse, [&](const std::vector<double>& residual,
                                           const std::vector<std::int32_t>& rows, int round) {
    std::vector<int> weights(m.rows, 0);
    for (auto r : rows) weights[static_cast<std::size_t>(r)] = 1;
    // feature subsampling stream, separate from the row subsampling stream
    Rng rng(derive_seed(~params.seed, static_cast<std::uint64_t>(round)));
    return grow_tree(x, sorted, residual, weights, 0.0, spec, &rng);
  });
  return wrap(m, ModelKind::gradient_boosting, std::move(e));
}

TrainedModel train_hist_gradient_boosting(const DesignMatrix& m, ModelParams params,
                                          std::vector<double>* train_mse) {
  check_training_input(m, params, ModelKind::hist_gradient_boosting);
  const auto mapper = BinMapper::fit(m.view(), params.n_bins);
  const auto binned = BinnedMatrix::build(mapper, m.view());
  LeafwiseSpec spec{params.max_leaves, params.max_depth, params.min_samples_leaf};
  auto e = boost(m, params, train_mse, [&](const std::vector<double>& residual,
                                           const std::vector<std::int32_t>& rows, int) {
    return grow_leafwise(binned, mapper, residual, rows, spec);
  });
  return wrap(m, ModelKind::hist_gradient_boosting, std::move(e));
}

TrainedModel train_linear_svr(const DesignMatrix& m, ModelParams params) {
  check_training_input(m, params, ModelKind::linear_svr);
  return TrainedModel{ModelKind::linear_svr, m.column_names, fit_linear_svr(m.view(), m.target, params.svr)};
}

TrainedModel train(const DesignMatrix& m, const ModelParams& params) {
  switch (params.kind) {
    case ModelKind::decision_tree: return train_decision_tree(m, params);
    case ModelKind::linear_svr: return train_linear_svr(m, params);
    case ModelKind::random_forest: return train_random_forest(m, params);
    case ModelKind::extra_trees: return train_extra_trees(m, params);
    case ModelKind::gradient_boosting: return train_gradient_boosting(m, params);
    case ModelKind::hist_gradient_boosting: return train_hist_gradient_boosting(m, params);
  }
  throw Error("unknown model kind");
}

std::vector<double> predict(const TrainedModel& model, MatrixView x) {
  std::vector<double> out(x.rows);
  const auto rows = static_cast<std::ptrdiff_t>(x.rows);
  std::visit(
      [&](const auto& body) {
#pragma omp parallel for schedule(static) if (x.rows > 256)
        for (std::ptrdiff_t i = 0; i < rows; ++i)
          out[static_cast<std::size_t>(i)] = body.predict(x.row(static_cast<std::size_t>(i)));
      },
      model.body);
  return out;
}

std::vector<double> predict(const TrainedModel& model, const DesignMatrix& m) {
  if (m.column_names != model.column_names) {
    std::vector<std::string> diffs;
    const auto n = std::max(m.column_names.size(), model.column_names.size());
    for (std::size_t j = 0; j < n && diffs.size() < 8; ++j) {
      std::string_view got = j < m.column_names.size() ? std::string_view(m.column_names[j]) : "<none>";
      std::string_view want = j < model.column_names.size() ? std::string_view(model.column_names[j]) : "<none>";
      if (got != want) diffs.push_back(fmt::format("#{}: {} (trained {})", j, got, want));
    }
    throw Error(fmt::format("column mismatch: {} columns vs {} trained; {}", m.column_names.size(),
                            model.column_names.size(), fmt::join(diffs, "; ")));
  }
  return predict(model, m.view());
}

// ---- serialization ----

namespace {

constexpr std::string_view kMagic = "cropyield-model";
constexpr int kFormatVersion = 1;

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) throw Error("model file truncated");
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  std::vector<std::string> tokens(std::string_view expect_tag, std::size_t count) {
    std::istringstream ss(line());
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) out.push_back(t);
    if (out.empty() || (!expect_tag.empty() && out[0] != expect_tag) || out.size() != count)
      throw Error(fmt::format("malformed model line (expected '{}' with {} fields)", expect_tag, count));
    return out;
  }

  static double number(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("bad number in model: " + s);
    return v;
  }

  static long long integer(const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("bad integer in model: " + s);
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "kind " << kind_name(model.kind) << '\n';
  out << "columns " << model.column_names.size() << '\n';
  for (const auto& c : model.column_names) out << c << '\n';
  if (const auto* e = std::get_if<TreeEnsemble>(&model.body)) {
    out << "ensemble " << format_number(e->base) << ' ' << format_number(e->scale) << ' '
        << (e->average ? 1 : 0) << ' ' << e->trees.size() << '\n';
    for (const auto& t : e->trees) {
      out << "tree " << format_number(t.offset) << ' ' << t.nodes.size() << '\n';
      for (const auto& n : t.nodes)
        out << n.feature << ' ' << format_number(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
            << format_number(n.value) << '\n';
    }
  } else {
    const auto& l = std::get<LinearModel>(model.body);
    out << "linear " << l.weights.size() << ' ' << format_number(l.bias) << '\n';
    for (std::size_t j = 0; j < l.weights.size(); ++j)
      out << format_number(l.mean[j]) << ' ' << format_number(l.scale[j]) << ' '
          << format_number(l.weights[j]) << '\n';
  }
  out << "end\n";
}

TrainedModel load_model(std::istream& in) {
  Reader r(in);
  auto head = r.tokens(kMagic, 2);
  if (Reader::integer(head[1]) != kFormatVersion)
    throw Error("unsupported model format version " + head[1]);
  TrainedModel m;
  m.kind = parse_kind(r.tokens("kind", 2)[1]);
  auto ncols = Reader::integer(r.tokens("columns", 2)[1]);
  for (long long j = 0; j < ncols; ++j) m.column_names.push_back(r.line());

  if (m.kind == ModelKind::linear_svr) {
    auto h = r.tokens("linear", 3);
    LinearModel l;
    l.bias = Reader::number(h[2]);
    auto d = Reader::integer(h[1]);
    for (long long j = 0; j < d; ++j) {
      auto t = r.tokens("", 3);
      l.mean.push_back(Reader::number(t[0]));
      l.scale.push_back(Reader::number(t[1]));
      l.weights.push_back(Reader::number(t[2]));
    }
    m.body = std::move(l);
  } else {
    auto h = r.tokens("ensemble", 5);
    TreeEnsemble e;
    e.base = Reader::number(h[1]);
    e.scale = Reader::number(h[2]);
    e.average = Reader::integer(h[3]) != 0;
    auto ntrees = Reader::integer(h[4]);
    for (long long k = 0; k < ntrees; ++k) {
      auto th = r.tokens("tree", 3);
      Tree t;
      t.offset = Reader::number(th[1]);
      auto nn = Reader::integer(th[2]);
      for (long long i = 0; i < nn; ++i) {
        auto f = r.tokens("", 5);
        TreeNode node;
        node.feature = static_cast<std::int32_t>(Reader::integer(f[0]));
        node.threshold = Reader::number(f[1]);
        node.left = static_cast<std::int32_t>(Reader::integer(f[2]));
        node.right = static_cast<std::int32_t>(Reader::integer(f[3]));
        node.value = Reader::number(f[4]);
        if (node.feature >= ncols || (!node.is_leaf() && (node.left <= i || node.right <= i || node.left >= nn || node.right >= nn)))
          throw Error("corrupt tree node in model");
        t.nodes.push_back(node);
      }
      if (t.nodes.empty()) throw Error("empty tree in model");
      e.trees.push_back(std::move(t));
    }
    m.body = std::move(e);
  }
  if (r.line() != "end") throw Error("model file missing end marker");
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save_model(out, model);
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_model(in);
}

}  // namespace cropyield::learn
