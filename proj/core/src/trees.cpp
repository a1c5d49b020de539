#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synthrel/error.hpp"
#include "synthrel/learners.hpp"

namespace synthrel {

double RegressionTree::predict(std::span<const double> row) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    n = row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(n)].value;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_loss(TaskKind loss, std::span<const double> f, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (loss == TaskKind::Classification) {
      const double z = f[i];
      const double sp = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      total += sp - y[i] * z;
    } else {
      const double d = f[i] - y[i];
      total += 0.5 * d * d;
    }
  }
  return f.empty() ? 0.0 : total / static_cast<double>(f.size());
}

struct NodeStats {
  double G = 0.0;
  double H = 0.0;
  std::size_t n = 0;
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -std::numeric_limits<double>::infinity();

  void add(double g, double h) {
    G += g;
    H += h;
    ++n;
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
};

struct Grown {
  RegressionTree tree;
  std::vector<int> leaf_of;  // node index per training row
};

// Column-major feature store with per-feature presorted row order.
struct SortedColumns {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;               // p * n
  std::vector<std::vector<std::uint32_t>> order;

  explicit SortedColumns(const FeatureMatrix& X) : n(X.rows), p(X.cols()), values(n * p), order(p) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) values[j * n + i] = X.at(i, j);
    for (std::size_t j = 0; j < p; ++j) {
      auto& o = order[j];
      o.resize(n);
      std::iota(o.begin(), o.end(), std::uint32_t{0});
      const double* col = values.data() + j * n;
      std::stable_sort(o.begin(), o.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
  }
  double at(std::size_t row, std::size_t feature) const { return values[feature * n + row]; }
};

// Level-wise exact greedy growth on presorted columns. A node splits when the
// best split has non-negative gain and its gradients are not all equal, so
// pure interactions such as XOR (zero gain at the root) can still be learned.
Grown grow_tree(const SortedColumns& cols, std::span<const double> g, std::span<const double> h, int max_depth,
                std::size_t min_leaf, double l2, double shrinkage, std::vector<double>& gain_per_feature) {
  const std::size_t n = cols.n;
  Grown out;
  out.leaf_of.assign(n, 0);
  auto& nodes = out.tree.nodes;
  std::vector<NodeStats> stats(1);
  nodes.emplace_back();
  for (std::size_t i = 0; i < n; ++i) stats[0].add(g[i], h[i]);

  auto score = [l2](double G, double H) { return H + l2 > 0.0 ? G * G / (H + l2) : 0.0; };

  std::vector<int> frontier{0};
  std::vector<int> slot_of;
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<int> candidates;
    for (int node : frontier) {
      const auto& s = stats[static_cast<std::size_t>(node)];
      if (s.n >= 2 * min_leaf && s.gmax > s.gmin) candidates.push_back(node);
    }
    if (candidates.empty()) break;

    slot_of.assign(nodes.size(), -1);
    for (std::size_t s = 0; s < candidates.size(); ++s) slot_of[static_cast<std::size_t>(candidates[s])] = static_cast<int>(s);

    const std::size_t m = candidates.size();
    std::vector<double> best_gain(m, -std::numeric_limits<double>::infinity());
    std::vector<int> best_feature(m, -1);
    std::vector<double> best_threshold(m, 0.0);
    std::vector<double> GL(m), HL(m), last(m);
    std::vector<std::size_t> nL(m);

    for (std::size_t j = 0; j < cols.p; ++j) {
      std::fill(GL.begin(), GL.end(), 0.0);
      std::fill(HL.begin(), HL.end(), 0.0);
      std::fill(nL.begin(), nL.end(), std::size_t{0});
      const double* col = cols.values.data() + j * n;
      for (std::uint32_t i : cols.order[j]) {
        const int s = slot_of[static_cast<std::size_t>(out.leaf_of[i])];
        if (s < 0) continue;
        const auto su = static_cast<std::size_t>(s);
        const double x = col[i];
        const auto& st = stats[static_cast<std::size_t>(candidates[su])];
        if (nL[su] >= min_leaf && st.n - nL[su] >= min_leaf && x > last[su]) {
          const double gain =
              0.5 * (score(GL[su], HL[su]) + score(st.G - GL[su], st.H - HL[su]) - score(st.G, st.H));
          if (gain > best_gain[su]) {
            best_gain[su] = gain;
            best_feature[su] = static_cast<int>(j);
            double thr = last[su] + 0.5 * (x - last[su]);
            if (!(thr > last[su])) thr = x;
            best_threshold[su] = thr;
          }
        }
        GL[su] += g[i];
        HL[su] += h[i];
        ++nL[su];
        last[su] = x;
      }
    }

    std::vector<int> next;
    std::vector<int> split_left(nodes.size(), -1);
    for (std::size_t s = 0; s < m; ++s) {
      if (best_feature[s] < 0 || best_gain[s] < -1e-12) continue;
      const int node = candidates[s];
      const int left = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      stats.emplace_back();
      stats.emplace_back();
      auto& nd = nodes[static_cast<std::size_t>(node)];
      nd.feature = best_feature[s];
      nd.threshold = best_threshold[s];
      nd.left = left;
      nd.right = left + 1;
      gain_per_feature[static_cast<std::size_t>(best_feature[s])] += std::max(best_gain[s], 0.0);
      split_left.resize(nodes.size(), -1);
      split_left[static_cast<std::size_t>(node)] = left;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;

    for (std::size_t i = 0; i < n; ++i) {
      const auto node = static_cast<std::size_t>(out.leaf_of[i]);
      if (node >= split_left.size() || split_left[node] < 0) continue;
      const auto& nd = nodes[node];
      const int child = cols.at(i, static_cast<std::size_t>(nd.feature)) < nd.threshold ? nd.left : nd.right;
      out.leaf_of[i] = child;
      stats[static_cast<std::size_t>(child)].add(g[i], h[i]);
    }
    frontier = std::move(next);
  }

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature >= 0) continue;
    const auto& s = stats[k];
    nodes[k].value = s.H + l2 > 0.0 ? -shrinkage * s.G / (s.H + l2) : 0.0;
  }
  return out;
}

}  // namespace

std::shared_ptr<const GbtModel> GbtModel::train(const Options& o, const FeatureMatrix& X, std::span<const double> y) {
  if (X.rows == 0) throw InvalidArgument("cannot train on zero rows");
  if (y.size() != X.rows) throw InvalidArgument("label count does not match feature rows");
  if (o.rounds < 1 || o.max_depth < 1 || o.min_samples_leaf < 1 || o.learning_rate <= 0.0 || o.l2 < 0.0)
    throw InvalidArgument("gradient boosting hyperparameters out of range");

  auto model = std::shared_ptr<GbtModel>(new GbtModel(o, X.names, X.provenance));
  const std::size_t n = X.rows;
  const bool logistic = o.task == TaskKind::Classification;

  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  if (logistic) {
    const double p = std::clamp(ybar, 1e-6, 1.0 - 1e-6);
    model->base_ = std::log(p / (1.0 - p));
  } else {
    model->base_ = ybar;
  }
  model->gain_.assign(X.cols(), 0.0);

  SortedColumns cols(X);
  std::vector<double> f(n, model->base_), g(n), h(n), trial(n);
  double loss = mean_loss(o.task, f, y);
  model->loss_history_.push_back(loss);

  for (int round = 0; round < o.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (logistic) {
        const double p = sigmoid(f[i]);
        g[i] = p - y[i];
        h[i] = std::max(p * (1.0 - p), 1e-16);
      } else {
        g[i] = f[i] - y[i];
        h[i] = 1.0;
      }
    }
    std::vector<double> round_gain(X.cols(), 0.0);
    auto grown = grow_tree(cols, g, h, o.max_depth, static_cast<std::size_t>(o.min_samples_leaf), o.l2,
                           o.learning_rate, round_gain);

    // Halve the step until the training loss does not increase.
    bool kept = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = f[i] + grown.tree.nodes[static_cast<std::size_t>(grown.leaf_of[i])].value;
      const double trial_loss = mean_loss(o.task, trial, y);
      if (trial_loss <= loss) {
        loss = trial_loss;
        kept = true;
        break;
      }
      for (auto& node : grown.tree.nodes) node.value *= 0.5;
    }
    if (!kept) break;
    f.swap(trial);
    for (std::size_t j = 0; j < X.cols(); ++j) model->gain_[j] += round_gain[j];
    model->trees_.push_back(std::move(grown.tree));
    model->loss_history_.push_back(loss);
  }
  return model;
}

double GbtModel::predict(std::span<const double> row) const {
  double f = base_;
  for (const auto& t : trees_) f += t.predict(row);
  if (options_.task == TaskKind::Classification) return sigmoid(f);
  if (task() == TaskKind::Classification) return std::clamp(f, 0.0, 1.0);
  return f;
}

}  // namespace synthrel
