#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthrel/features.hpp"
#include "synthrel/relational.hpp"

namespace synthrel {

enum class Granularity { SingleColumn, SingleTable, MultiTable };
enum class Goal { Minimize, Maximize };

std::string_view to_string(Granularity g) noexcept;
std::string_view to_string(Goal g) noexcept;

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool contains(double v) const noexcept { return v >= low && v <= high; }
};

/// A metric value with its separability decision. Exactly one of p_value
/// and ci is set: separable is p_value < alpha, or value outside ci.
struct MetricResult {
  std::string metric;
  Granularity granularity = Granularity::SingleColumn;
  std::string table;
  std::optional<std::string> column;
  double value = 0.0;
  std::optional<double> p_value;
  std::optional<Interval> ci;
  bool separable = false;
  double alpha = 0.05;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  static MetricResult with_p_value(std::string metric, Granularity g, double value, double p_value, double alpha);
  static MetricResult with_ci(std::string metric, Granularity g, double value, Interval ci, double alpha);
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// ---------------------------------------------------------------------------
// Statistical tests

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test. D = sup |ECDF_a - ECDF_b|; the p-value
/// uses the asymptotic distribution at lambda = D * sqrt(nm / (n + m)).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Upper tail of the chi-square distribution.
double chi2_upper_tail(double statistic, double df);

/// Chi-square test of homogeneity on the 2 x k table of category counts.
/// Categories absent from both samples never enter; df = k - 1.
TestResult chi2_two_sample(std::span<const std::string> a, std::span<const std::string> b);

// ---------------------------------------------------------------------------
// Distances

enum class DistanceKind { TotalVariation, Hellinger, JensenShannon };

std::string_view to_string(DistanceKind kind) noexcept;

/// Distance between the empirical category frequencies of two samples.
double categorical_distance(DistanceKind kind, std::span<const std::string> a, std::span<const std::string> b);

/// Category labels for a pair of columns: discrete columns use their labels,
/// continuous columns are cut into `bins` equal-width bins over the combined
/// range. Nulls map to the missing category.
std::pair<std::vector<std::string>, std::vector<std::string>> comparable_labels(const Column& a, const Column& b,
                                                                                 int bins = 50);

/// categorical_distance on comparable_labels.
double column_distance(DistanceKind kind, const Column& a, const Column& b, int bins = 50);

/// One-dimensional earth mover's distance, the integral of |ECDF_a - ECDF_b|.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// sqrt(max(MMD^2, 0)) with the biased V-statistic and an RBF kernel whose
/// bandwidth is the median pairwise distance of the pooled sample.
double mmd(const FeatureMatrix& a, const FeatureMatrix& b);
/// Encodes both tables with one shared Preprocessor first.
double mmd(const Table& a, const Table& b);

struct PcdResult {
  double value = 0.0;
  std::vector<std::string> columns;
  std::vector<std::string> degenerate_columns;  // zero variance in either table
};

/// Frobenius norm of the difference of Pearson correlation matrices over the
/// shared continuous columns. Nulls are dropped pairwise; a constant column
/// correlates 0 with everything.
PcdResult pcd(const Table& a, const Table& b);

// ---------------------------------------------------------------------------
// Bootstrap separability

struct BootstrapSpec {
  int replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  Interval support{0.0, std::numeric_limits<double>::infinity()};
  Goal goal = Goal::Minimize;
  unsigned workers = 1;

  void check() const;
};

using TableMetric = std::function<double(const Table&, const Table&)>;

/// Real-vs-real null distribution of a metric: each replicate draws two
/// independent with-replacement resamples of `real` (seeded per replicate)
/// and evaluates the metric between them. The [alpha/2, 1 - alpha/2]
/// percentile interval, clipped to the support, is the acceptance region for
/// `observed`.
MetricResult bootstrap_separability(const TableMetric& metric, const Table& real, double observed,
                                    const BootstrapSpec& spec, std::string metric_name = "bootstrap",
                                    Granularity granularity = Granularity::SingleColumn);

/// Replicate values only, in replicate order.
std::vector<double> bootstrap_replicates(const TableMetric& metric, const Table& real, const BootstrapSpec& spec);

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

// ---------------------------------------------------------------------------
// Multi-table

/// KS test between real and synthetic child-row counts per parent row.
MetricResult cardinality_shape_similarity(const Database& real, const Database& syn, const Relationship& relationship,
                                          double alpha = 0.05);

}  // namespace synthrel
