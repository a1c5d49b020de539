#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthrel/learners.hpp"
#include "synthrel/relational.hpp"

namespace synthrel {

struct BinomialTail {
  double upper = 1.0;  // P[Bin(N, p0) >= s]
  double lower = 1.0;  // P[Bin(N, p0) <= s]
};

/// Exact one-sided binomial tails for s = number of correct predictions
/// (losses equal to 0) out of N, summed in log space.
BinomialTail binomial_detection_test(std::span<const std::uint8_t> losses, double p0);

/// Same, from the success count directly.
BinomialTail binomial_tails(std::size_t successes, std::size_t trials, double p0);

/// Area under the ROC curve of `scores` for labels 1 vs 0 (Mann-Whitney,
/// ties averaged). Empty classes give 0.5.
double auc(std::span<const double> scores, std::span<const double> labels);

enum class CopyingFlag { None, SuspectedCopying };

std::string_view to_string(CopyingFlag flag) noexcept;

struct DetectionOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  bool importances = true;
  std::size_t row_cap = 50000;
  double alpha = 0.05;
};

struct DetectionResult {
  std::string method;  // "dd", "dda", "ld" or "pc"
  std::string table;
  double accuracy = 0.0;
  std::vector<std::uint8_t> losses;
  double p0 = 0.5;
  double p_value = 1.0;
  double p_value_lower = 1.0;
  LearnerSpec learner;
  int folds = 10;
  std::optional<std::vector<FeatureWeight>> importances;
  double auc = 0.5;
  double legacy_ld_score = 0.0;
  CopyingFlag copying_flag = CopyingFlag::None;
  std::size_t n_real = 0;
  std::size_t n_syn = 0;
  bool rows_capped = false;
  std::optional<std::string> caveat;
  std::vector<std::string> warnings;

  bool separable(double alpha) const noexcept { return p_value < alpha; }
};

/// Detection on already-aligned tables: preprocess, stack with labels, pooled
/// stratified out-of-fold losses, binomial test against max(n, m) / (n + m).
DetectionResult detect_tables(const Table& real, const Table& syn, std::span<const Provenance> provenance,
                              const LearnerSpec& learner, const DetectionOptions& options);

/// Discriminative detection on one table restricted to `columns` (all shared
/// non-key columns when empty).
DetectionResult discriminative_detection(const Database& real, const Database& syn, std::string_view table,
                                         std::span<const std::string> columns, const LearnerSpec& learner,
                                         const DetectionOptions& options = {});

/// Discriminative detection on the table augmented with child aggregates.
/// Throws InvalidArgument when the table has no children.
DetectionResult discriminative_detection_with_aggregation(const Database& real, const Database& syn,
                                                          std::string_view table, const LearnerSpec& learner,
                                                          const DetectionOptions& options = {});

/// Discriminative detection with the default logistic learner.
DetectionResult logistic_detection(const Database& real, const Database& syn, std::string_view table,
                                   std::span<const std::string> columns, const DetectionOptions& options = {});

inline constexpr std::string_view kParentChildCaveat =
    "legacy parent-child detection: denormalized rows repeat parent attributes, so rows are not i.i.d.";

/// Detection on the denormalized parent-child join. Always carries the
/// parent-child caveat.
DetectionResult parent_child_detection(const Database& real, const Database& syn, const Relationship& relationship,
                                       const LearnerSpec& learner, const DetectionOptions& options = {});

/// Suspected copying when accuracy sits significantly below the baseline.
CopyingFlag data_copying_diagnostic(const DetectionResult& result, double alpha = 0.05);

}  // namespace synthrel
