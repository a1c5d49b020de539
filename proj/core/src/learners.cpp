#include "synthrel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "synthrel/error.hpp"

namespace synthrel {

std::string_view to_string(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::Logistic: return "logistic";
    case LearnerKind::Gbt: return "gbt";
    case LearnerKind::Linear: return "linear";
    case LearnerKind::Tree: return "tree";
    case LearnerKind::Knn: return "knn";
  }
  return "unknown";
}

std::string_view to_string(TaskKind kind) noexcept {
  return kind == TaskKind::Classification ? "classification" : "regression";
}

LearnerKind parse_learner_kind(std::string_view text) {
  for (auto k : {LearnerKind::Logistic, LearnerKind::Gbt, LearnerKind::Linear, LearnerKind::Tree, LearnerKind::Knn})
    if (to_string(k) == text) return k;
  throw InvalidArgument("unknown learner '" + std::string(text) + "'");
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "classification") return TaskKind::Classification;
  if (text == "regression") return TaskKind::Regression;
  throw InvalidArgument("unknown task kind '" + std::string(text) + "'");
}

LearnerSpec LearnerSpec::logistic_default() {
  LearnerSpec s;
  s.kind = LearnerKind::Logistic;
  return s;
}

LearnerSpec LearnerSpec::gbt_default(TaskKind task) {
  LearnerSpec s;
  s.kind = LearnerKind::Gbt;
  s.task = task;
  return s;
}

LearnerSpec LearnerSpec::of(LearnerKind kind, TaskKind task) {
  LearnerSpec s;
  s.kind = kind;
  s.task = task;
  return s;
}

void LearnerSpec::check() const {
  if (kind == LearnerKind::Logistic && task != TaskKind::Classification)
    throw InvalidArgument("logistic regression is a classification learner");
  if (logistic.l2 < 0.0 || logistic.tolerance <= 0.0 || logistic.max_iterations < 1)
    throw InvalidArgument("logistic hyperparameters out of range");
  if (gbt.rounds < 1 || gbt.max_depth < 1 || gbt.max_depth > 32 || gbt.learning_rate <= 0.0 ||
      gbt.learning_rate > 1.0 || gbt.min_samples_leaf < 1 || gbt.l2 < 0.0)
    throw InvalidArgument("gbt hyperparameters out of range");
  if (tree.max_depth < 1 || tree.max_depth > 32 || tree.min_samples_leaf < 1 || tree.l2 < 0.0)
    throw InvalidArgument("tree hyperparameters out of range");
  if (knn_k < 1) throw InvalidArgument("knn needs k >= 1");
  if (linear_ridge < 0.0) throw InvalidArgument("linear ridge must be non-negative");
}

nlohmann::ordered_json LearnerSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(kind));
  j["task"] = std::string(to_string(task));
  switch (kind) {
    case LearnerKind::Logistic:
      j["l2"] = logistic.l2;
      j["tolerance"] = logistic.tolerance;
      j["max_iterations"] = logistic.max_iterations;
      break;
    case LearnerKind::Gbt:
      j["rounds"] = gbt.rounds;
      j["max_depth"] = gbt.max_depth;
      j["learning_rate"] = gbt.learning_rate;
      j["min_samples_leaf"] = gbt.min_samples_leaf;
      j["l2"] = gbt.l2;
      break;
    case LearnerKind::Tree:
      j["max_depth"] = tree.max_depth;
      j["min_samples_leaf"] = tree.min_samples_leaf;
      break;
    case LearnerKind::Knn: j["k"] = knn_k; break;
    case LearnerKind::Linear: j["ridge"] = linear_ridge; break;
  }
  j["seed"] = seed;
  return j;
}

std::vector<double> Model::predict(const FeatureMatrix& X) const {
  if (X.cols() != names_.size()) throw InvalidArgument("feature count differs from the fitted model");
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
  return out;
}

std::vector<double> Model::predict_labels(const FeatureMatrix& X) const {
  auto p = predict(X);
  for (auto& v : p) v = v > 0.5 ? 1.0 : 0.0;
  return p;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

class LogisticModel final : public Model {
 public:
  LogisticModel(const FeatureMatrix& X, std::vector<double> params)
      : Model(LearnerKind::Logistic, TaskKind::Classification, X.names, X.provenance), params_(std::move(params)) {}

  double predict(std::span<const double> row) const override {
    double z = params_.back();
    for (std::size_t j = 0; j < row.size(); ++j) z += params_[j] * row[j];
    return sigmoid(z);
  }

  std::optional<std::vector<double>> raw_importances() const override {
    std::vector<double> w(params_.begin(), params_.end() - 1);
    for (auto& v : w) v = std::abs(v);
    return w;
  }

 private:
  std::vector<double> params_;
};

// Least squares with an unpenalized intercept; classification thresholds the
// fitted 0/1 score.
class LinearModel final : public Model {
 public:
  LinearModel(const FeatureMatrix& X, std::span<const double> y, double ridge, TaskKind task)
      : Model(LearnerKind::Linear, task, X.names, X.provenance) {
    const auto n = static_cast<Eigen::Index>(X.rows);
    const auto p = static_cast<Eigen::Index>(X.cols());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(X.values.data(), n, p);
    Eigen::Map<const Eigen::VectorXd> b(y.data(), n);
    const Eigen::RowVectorXd mean = A.colwise().mean();
    const double ymean = b.mean();
    const Eigen::MatrixXd centered = A.rowwise() - mean;
    Eigen::MatrixXd gram = centered.transpose() * centered;
    gram.diagonal().array() += ridge * std::max<double>(1.0, static_cast<double>(n));
    const Eigen::VectorXd rhs = centered.transpose() * (b.array() - ymean).matrix();
    const Eigen::VectorXd w = gram.ldlt().solve(rhs);
    weights_.assign(w.data(), w.data() + w.size());
    intercept_ = ymean - mean.dot(w);
  }

  double predict(std::span<const double> row) const override {
    double v = intercept_;
    for (std::size_t j = 0; j < row.size(); ++j) v += weights_[j] * row[j];
    return task() == TaskKind::Classification ? std::clamp(v, 0.0, 1.0) : v;
  }

 private:
  std::vector<double> weights_;
  double intercept_ = 0.0;
};

class KnnModel final : public Model {
 public:
  KnnModel(const FeatureMatrix& X, std::span<const double> y, int k, TaskKind task)
      : Model(LearnerKind::Knn, task, X.names, X.provenance),
        train_(X.values),
        y_(y.begin(), y.end()),
        rows_(X.rows),
        cols_(X.cols()),
        k_(static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(k), X.rows))) {}

  double predict(std::span<const double> row) const override {
    std::vector<std::pair<double, std::size_t>> dist(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      double d = 0.0;
      const double* t = train_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) d += (t[j] - row[j]) * (t[j] - row[j]);
      dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k_; ++i) sum += y_[dist[i].second];
    return sum / static_cast<double>(k_);
  }

 private:
  std::vector<double> train_;
  std::vector<double> y_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t k_;
};

}  // namespace

FitModel fit(const LearnerSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  spec.check();
  if (y.size() != X.rows) throw InvalidArgument("label count does not match feature rows");
  if (X.rows < 2) throw InvalidArgument("fit needs at least 2 rows");
  for (double v : X.values)
    if (!std::isfinite(v)) throw InvalidArgument("feature matrix contains non-finite values");

  if (spec.task == TaskKind::Classification) {
    std::size_t ones = 0;
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw InvalidArgument("classification labels must be 0 or 1");
      ones += v == 1.0;
    }
    if (ones == 0 || ones == y.size()) throw InvalidArgument("single-class classification input");
  }

  switch (spec.kind) {
    case LearnerKind::Logistic: {
      auto sol = logistic::solve(X, y, spec.logistic);
      return std::make_shared<LogisticModel>(X, std::move(sol.params));
    }
    case LearnerKind::Gbt: {
      GbtModel::Options o;
      o.task = spec.task;
      o.rounds = spec.gbt.rounds;
      o.max_depth = spec.gbt.max_depth;
      o.learning_rate = spec.gbt.learning_rate;
      o.min_samples_leaf = spec.gbt.min_samples_leaf;
      o.l2 = spec.gbt.l2;
      return GbtModel::train(o, X, y);
    }
    case LearnerKind::Tree: {
      GbtModel::Options o;
      o.task = TaskKind::Regression;
      o.reported_task = spec.task;
      o.reported_kind = LearnerKind::Tree;
      o.rounds = 1;
      o.learning_rate = 1.0;
      o.max_depth = spec.tree.max_depth;
      o.min_samples_leaf = spec.tree.min_samples_leaf;
      o.l2 = spec.tree.l2;
      return GbtModel::train(o, X, y);
    }
    case LearnerKind::Linear: return std::make_shared<LinearModel>(X, y, spec.linear_ridge, spec.task);
    case LearnerKind::Knn: return std::make_shared<KnnModel>(X, y, spec.knn_k, spec.task);
  }
  throw InvalidArgument("unsupported learner");
}

std::vector<FeatureWeight> feature_importance(const Model& model) {
  auto raw = model.raw_importances();
  if (!raw) throw InvalidArgument("learner '" + std::string(to_string(model.kind())) + "' has no feature importances");
  const auto& names = model.feature_names();
  const auto& prov = model.feature_provenance();
  const bool list_all = model.kind() == LearnerKind::Logistic;

  std::vector<FeatureWeight> out;
  double total = 0.0;
  for (std::size_t j = 0; j < raw->size(); ++j) {
    const double w = (*raw)[j];
    if (!list_all && !(w > 0.0)) continue;
    out.push_back({names[j], w, j < prov.size() ? prov[j] : Provenance::Original});
    total += w;
  }
  if (total > 0.0)
    for (auto& fw : out) fw.weight /= total;
  std::sort(out.begin(), out.end(), [](const FeatureWeight& a, const FeatureWeight& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.feature < b.feature;
  });
  return out;
}

std::vector<std::pair<double, double>> partial_dependence(const Model& model, const FeatureMatrix& X,
                                                          std::string_view feature, std::span<const double> grid) {
  auto idx = X.feature_index(feature);
  if (!idx) throw InvalidArgument("unknown feature '" + std::string(feature) + "'");
  std::vector<std::pair<double, double>> out;
  std::vector<double> row(X.cols());
  for (double g : grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
      auto src = X.row(i);
      std::copy(src.begin(), src.end(), row.begin());
      row[*idx] = g;
      sum += model.predict(std::span<const double>(row));
    }
    out.emplace_back(g, X.rows > 0 ? sum / static_cast<double>(X.rows) : 0.0);
  }
  return out;
}

}  // namespace synthrel
