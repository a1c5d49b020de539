#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthrel/features.hpp"

namespace synthrel {

enum class LearnerKind { Logistic, Gbt, Linear, Tree, Knn };
enum class TaskKind { Classification, Regression };

std::string_view to_string(LearnerKind kind) noexcept;
std::string_view to_string(TaskKind kind) noexcept;
LearnerKind parse_learner_kind(std::string_view text);
TaskKind parse_task_kind(std::string_view text);

struct LogisticParams {
  double l2 = 1.0;           // penalty 0.5 * l2 * |w|^2 on the summed log-loss; bias unpenalized
  double tolerance = 1e-6;   // stop when the per-example gradient infinity norm falls below this
  int max_iterations = 1000;
};

struct TreeParams {
  int max_depth = 6;
  int min_samples_leaf = 5;
  double l2 = 1.0;  // leaf-weight regularization in the second-order gain
};

struct GbtParams {
  int rounds = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double l2 = 1.0;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Gbt;
  TaskKind task = TaskKind::Classification;
  LogisticParams logistic;
  GbtParams gbt;
  TreeParams tree{8, 5, 0.0};
  int knn_k = 5;
  double linear_ridge = 1e-8;
  std::uint64_t seed = 0;

  static LearnerSpec logistic_default();
  static LearnerSpec gbt_default(TaskKind task = TaskKind::Classification);
  static LearnerSpec of(LearnerKind kind, TaskKind task);

  /// Throws InvalidArgument when a hyperparameter is out of range.
  void check() const;
  std::string name() const { return std::string(to_string(kind)); }
  nlohmann::ordered_json to_json() const;
};

struct FeatureWeight {
  std::string feature;
  double weight = 0.0;
  Provenance provenance = Provenance::Original;
};

/// Immutable fitted model. predict() returns P(y = 1) for classification and
/// the predicted value for regression.
class Model {
 public:
  Model(LearnerKind kind, TaskKind task, std::vector<std::string> names, std::vector<Provenance> provenance)
      : kind_(kind), task_(task), names_(std::move(names)), provenance_(std::move(provenance)) {}
  virtual ~Model() = default;

  virtual double predict(std::span<const double> row) const = 0;
  /// Unnormalized per-feature importances, or nullopt when the kind has none.
  virtual std::optional<std::vector<double>> raw_importances() const { return std::nullopt; }

  LearnerKind kind() const noexcept { return kind_; }
  TaskKind task() const noexcept { return task_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<Provenance>& feature_provenance() const noexcept { return provenance_; }

  std::vector<double> predict(const FeatureMatrix& X) const;
  /// Hard labels: 1 when P(y = 1) > 0.5.
  std::vector<double> predict_labels(const FeatureMatrix& X) const;

 private:
  LearnerKind kind_;
  TaskKind task_;
  std::vector<std::string> names_;
  std::vector<Provenance> provenance_;
};

using FitModel = std::shared_ptr<const Model>;

/// Deterministic given (spec, X, y). Classification requires 0/1 labels with
/// both classes present.
FitModel fit(const LearnerSpec& spec, const FeatureMatrix& X, std::span<const double> y);

/// Weights normalized to sum to 1 (when any is nonzero), descending, ties by
/// name. Logistic: |coefficient| on standardized features, every feature listed.
/// GBT and tree: total gain per feature, only features that were split on.
/// Throws InvalidArgument for kinds without importances.
std::vector<FeatureWeight> feature_importance(const Model& model);

/// Mean prediction over X with `feature` overwritten by each grid value.
std::vector<std::pair<double, double>> partial_dependence(const Model& model, const FeatureMatrix& X,
                                                          std::string_view feature, std::span<const double> grid);

// ---------------------------------------------------------------------------
// Logistic regression internals, exposed for gradient checks.

namespace logistic {

/// Parameters: one weight per feature followed by the bias.
/// Objective: sum_i log(1 + exp(z_i)) - y_i z_i + 0.5 * l2 * |w|^2.
double objective(std::span<const double> params, const FeatureMatrix& X, std::span<const double> y, double l2);
std::vector<double> gradient(std::span<const double> params, const FeatureMatrix& X, std::span<const double> y,
                             double l2);

struct Solution {
  std::vector<double> params;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton iterations with Armijo backtracking.
Solution solve(const FeatureMatrix& X, std::span<const double> y, const LogisticParams& params);

}  // namespace logistic

// ---------------------------------------------------------------------------
// Tree ensembles.

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  bool is_stump() const noexcept { return nodes.size() <= 1; }
};

/// Second-order boosted trees (logistic loss for classification, squared
/// loss for regression). A single unshrunk tree with l2 = 0 is a CART
/// regression tree, which is how the `tree` learner is built.
class GbtModel final : public Model {
 public:
  struct Options {
    TaskKind task = TaskKind::Classification;
    int rounds = 100;
    int max_depth = 6;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    double l2 = 1.0;
    LearnerKind reported_kind = LearnerKind::Gbt;
    /// Task reported by the model when it differs from the loss, e.g. a
    /// squared-loss tree fitted to 0/1 labels.
    std::optional<TaskKind> reported_task;
  };

  static std::shared_ptr<const GbtModel> train(const Options& options, const FeatureMatrix& X,
                                               std::span<const double> y);

  double predict(std::span<const double> row) const override;
  std::optional<std::vector<double>> raw_importances() const override { return gain_; }

  /// Mean training loss before any tree and after each kept round.
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  double base_score() const noexcept { return base_; }

 private:
  GbtModel(const Options& o, std::vector<std::string> names, std::vector<Provenance> prov)
      : Model(o.reported_kind, o.reported_task.value_or(o.task), std::move(names), std::move(prov)), options_(o) {}

  Options options_;
  double base_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> gain_;
  std::vector<double> loss_history_;
};

// ---------------------------------------------------------------------------
// Cross-validation.

/// Fold index per row. Within each class rows are ordered by a content hash
/// of their features, shuffled with `seed`, and dealt round-robin, so every
/// fold holds floor or ceil of each class's share. Throws when a class has
/// fewer than k rows.
std::vector<int> stratified_folds(const FeatureMatrix& X, std::span<const double> y, int k, std::uint64_t seed);

struct CrossValidation {
  std::vector<std::uint8_t> losses;   // out-of-fold 0-1 loss per row
  std::vector<double> probabilities;  // out-of-fold P(y = 1) per row
  std::vector<int> folds;
};

CrossValidation cross_validate(const LearnerSpec& spec, const FeatureMatrix& X, std::span<const double> y, int k,
                               std::uint64_t seed);

std::vector<std::uint8_t> stratified_kfold_losses(const LearnerSpec& spec, const FeatureMatrix& X,
                                                  std::span<const double> y, int k, std::uint64_t seed);

}  // namespace synthrel
