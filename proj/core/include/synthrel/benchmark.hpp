#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthrel/detection.hpp"
#include "synthrel/fidelity.hpp"
#include "synthrel/relational.hpp"
#include "synthrel/utility.hpp"

namespace synthrel {

inline constexpr std::string_view kReportVersion = "1.0";

enum class Suite { SingleColumn, SingleTable, MultiTable, Utility };

std::string_view to_string(Suite suite) noexcept;
/// "single-column", "single-table", "multi-table", "utility"; "all" expands
/// to every suite.
std::set<Suite> parse_suites(const std::vector<std::string>& names);

struct MethodEntry {
  std::string name;
  std::vector<std::filesystem::path> replications;  // one data directory each
};

struct DatasetEntry {
  std::string name;
  std::filesystem::path metadata;
  std::filesystem::path data;
  std::vector<MethodEntry> methods;
  std::vector<UtilityTask> utility_tasks;
};

struct BenchmarkOptions {
  std::set<Suite> suites{Suite::SingleColumn, Suite::SingleTable, Suite::MultiTable, Suite::Utility};
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t row_cap = 50000;
  int folds = 10;
  int bootstrap_replications = 1000;
  std::size_t mmd_max_rows = 500;
  bool include_legacy_pc = false;
  unsigned workers = 1;
  std::vector<LearnerKind> detectors{LearnerKind::Logistic, LearnerKind::Gbt};

  void check() const;
  nlohmann::ordered_json to_json() const;
};

struct BenchmarkConfig {
  std::vector<DatasetEntry> datasets;
  BenchmarkOptions options;

  /// Relative paths resolve against `base_dir`.
  static BenchmarkConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static BenchmarkConfig read(const std::filesystem::path& path);
};

/// One result row: a metric on one target for one (dataset, method,
/// replication) cell. Rows that could not be computed carry `skipped`.
using ResultRow = nlohmann::ordered_json;

struct Report {
  std::string version{kReportVersion};
  nlohmann::ordered_json environment = nlohmann::ordered_json::object();
  std::vector<ResultRow> results;

  nlohmann::ordered_json to_json() const;
  std::string dump() const;  // two-space indented, trailing newline
  static Report from_json(const nlohmann::ordered_json& j);
  static Report read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

/// Every eligible metric of the selected suites between one real and one
/// synthetic database, as report rows.
std::vector<ResultRow> evaluate_pair(const Database& real, const Database& syn, const std::string& dataset,
                                     const std::string& method, int replication, const BenchmarkOptions& options,
                                     std::span<const UtilityTask> tasks = {});

/// Environment block for a run with these options.
nlohmann::ordered_json environment_block(const BenchmarkOptions& options);

/// Runs every (dataset, method, replication) cell. Synthetic databases that
/// fail to load or validate become skip rows; the real database of a dataset
/// failing does the same for all of its cells.
Report run_benchmark(const BenchmarkConfig& config);

/// In-memory variant: `synthetic[method][replication]`.
Report run_benchmark(const Database& real, const std::map<std::string, std::vector<Database>>& synthetic,
                     const std::string& dataset, const BenchmarkOptions& options,
                     std::span<const UtilityTask> tasks = {});

struct FailureCount {
  std::string dataset;
  std::string method;
  std::string metric;
  std::vector<std::pair<int, int>> per_replication;  // (failed, total), replication order
};

/// Separable targets out of eligible targets per replication. Rows without a
/// separability decision (utility rows) are not counted.
std::vector<FailureCount> failure_counts(const Report& report);

struct CorrelationEstimate {
  std::optional<double> rho;
  std::optional<Interval> ci;
};

/// Pearson correlation of (detection accuracy, utility score) pairs with a
/// bootstrap percentile interval. Degenerate inputs give no estimate.
CorrelationEstimate fidelity_utility_correlation(std::span<const std::pair<double, double>> pairs,
                                                 int replications = 10000, std::uint64_t seed = 0,
                                                 double alpha = 0.05);

struct Summary {
  std::string text;
  std::map<std::string, std::string> plot_files;  // file name -> contents
};

/// Failure-count tables in the "a, b, c (total)" layout, one per dataset,
/// plus tab-separated value files per (dataset, metric) for plotting.
Summary render_summary(const Report& report);

struct Comparison {
  std::string text;
  bool identical = true;
};

/// Differences in failure counts between two reports.
Comparison compare_reports(const Report& a, const Report& b);

}  // namespace synthrel
