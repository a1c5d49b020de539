#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthrel/features.hpp"
#include "synthrel/learners.hpp"
#include "synthrel/relational.hpp"

namespace synthrel {

enum class RankKind { Spearman, Kendall, WeightedKendall };

std::string_view to_string(RankKind kind) noexcept;
RankKind parse_rank_kind(std::string_view text);

/// Rank correlation between two score vectors. Spearman is Pearson on average
/// ranks, Kendall is tau-b, and weighted Kendall weights pair (i, j) by
/// 1/(1 + r_i) + 1/(1 + r_j) where r is the zero-based rank in `a`, highest
/// score first. nullopt when either vector is constant.
std::optional<double> rank_correlation(RankKind kind, std::span<const double> a, std::span<const double> b);

/// Average ranks, 1-based, ascending.
std::vector<double> average_ranks(std::span<const double> values);

struct UtilityTask {
  std::string name;
  std::string table;
  std::string target;
  TaskKind kind = TaskKind::Regression;
  std::string positive_class;  // categorical classification targets
  double test_fraction = 0.25;
  std::uint64_t split_seed = 0;

  static UtilityTask from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

/// Target-table rows with child aggregates and parent attributes joined in,
/// and the target split off. Rows with a null target are dropped.
struct SupervisedTable {
  Table features;
  std::vector<Provenance> provenance;
  std::vector<double> y;
};

SupervisedTable assemble_table(const Database& db, const UtilityTask& task);

struct SupervisedData {
  FeatureMatrix X;
  std::vector<double> y;
};

/// assemble_table encoded with a Preprocessor fitted on the same rows.
SupervisedData assemble_supervised(const Database& db, const UtilityTask& task);

struct DatabaseSplit {
  Database train;
  Database test;
};

/// Splits the task table's rows into train and test, carrying descendant rows
/// along with their parents. Other tables are kept whole on both sides.
DatabaseSplit split_database(const Database& db, const UtilityTask& task);

struct LearnerScore {
  std::string learner;
  std::optional<double> real_trained;
  std::optional<double> syn_trained;
  std::optional<std::string> error;
};

struct RankCorrelations {
  std::optional<double> spearman;
  std::optional<double> kendall;
  std::optional<double> weighted_kendall;
};

struct UtilityResult {
  std::string task;
  TaskKind kind = TaskKind::Regression;
  std::string score_name;  // "accuracy" or "rmse"
  std::vector<LearnerScore> scores;
  double naive_baseline = 0.0;
  RankCorrelations model_rank;
  RankCorrelations feature_rank;
  std::vector<std::string> notes;
};

/// The default panel: linear, tree, gbt, knn, and logistic for classification.
std::vector<LearnerSpec> default_learner_panel(TaskKind kind, std::uint64_t seed = 0);

/// Train-on-synthetic, evaluate-on-real. Each learner is fitted on the real
/// training data and on the synthetic data and scored on the real test set
/// (accuracy or RMSE). Model ranks compare goodness, so RMSE is negated.
/// A learner that throws is recorded and skipped.
UtilityResult tstr(const Database& real_train, const Database& real_test, const Database& syn, const UtilityTask& task,
                   std::span<const LearnerSpec> learners);

}  // namespace synthrel
