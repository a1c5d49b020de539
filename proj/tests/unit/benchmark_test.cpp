#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "synthrel/benchmark.hpp"
#include "synthrel/error.hpp"
#include "synthrel/fixtures.hpp"
#include "synthrel/io.hpp"
#include "test_support.hpp"

using namespace synthrel;

namespace {

const std::filesystem::path kData = SYNTHREL_TEST_DATA;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Report small_report() { return Report::read(kData / "report" / "small.json"); }

const FailureCount& find(const std::vector<FailureCount>& v, const std::string& method, const std::string& metric) {
  for (const auto& fc : v)
    if (fc.method == method && fc.metric == metric) return fc;
  throw std::runtime_error("no count for " + method + "/" + metric);
}

BenchmarkOptions quick_options() {
  BenchmarkOptions o;
  o.bootstrap_replications = 100;
  o.folds = 5;
  o.detectors = {LearnerKind::Logistic};
  return o;
}

}  // namespace

TEST(Suites, ParseAndExpandAll) {
  EXPECT_EQ(parse_suites({"all"}).size(), 4u);
  EXPECT_EQ(parse_suites({"single-column", "utility"}), (std::set<Suite>{Suite::SingleColumn, Suite::Utility}));
  EXPECT_THROW(parse_suites({"nope"}), InvalidArgument);
}

TEST(Options, RangeChecks) {
  BenchmarkOptions o;
  o.alpha = 1.5;
  EXPECT_THROW(o.check(), InvalidArgument);
  o = {};
  o.bootstrap_replications = 10;
  EXPECT_THROW(o.check(), InvalidArgument);
  o = {};
  EXPECT_NO_THROW(o.check());
}

TEST(Config, ResolvesRelativePaths) {
  auto j = nlohmann::json::parse(R"({
    "options": {"alpha": 0.01, "seed": 9},
    "datasets": [{"name": "shop", "metadata": "shop/metadata.json", "data": "shop",
                  "methods": [{"name": "copy", "replications": ["shop", "shop"]}],
                  "utility_tasks": [{"table": "store", "target": "size", "task": "regression"}]}]})");
  auto c = BenchmarkConfig::from_json(j, kData);
  ASSERT_EQ(c.datasets.size(), 1u);
  EXPECT_EQ(c.options.alpha, 0.01);
  EXPECT_EQ(c.options.seed, 9u);
  EXPECT_EQ(c.datasets[0].metadata, kData / "shop/metadata.json");
  EXPECT_EQ(c.datasets[0].methods[0].replications.size(), 2u);
  EXPECT_EQ(c.datasets[0].utility_tasks[0].target, "size");
}

TEST(FailureCounts, HandCountedReport) {
  auto counts = failure_counts(small_report());
  EXPECT_EQ(find(counts, "alpha", "ks").per_replication, (std::vector<std::pair<int, int>>{{1, 2}, {0, 2}}));
  EXPECT_EQ(find(counts, "beta", "ks").per_replication, (std::vector<std::pair<int, int>>{{2, 2}, {1, 2}}));
  EXPECT_EQ(find(counts, "beta", "mmd").per_replication, (std::vector<std::pair<int, int>>{{1, 1}, {1, 1}}));
  EXPECT_EQ(find(counts, "alpha", "mmd").per_replication, (std::vector<std::pair<int, int>>{{0, 1}, {0, 1}}));
  EXPECT_EQ(find(counts, "beta", "pcd").per_replication, (std::vector<std::pair<int, int>>{{0, 0}, {0, 1}}));
  for (const auto& fc : counts) EXPECT_NE(fc.metric, "utility");
}

TEST(FailureCounts, AllOrNothing) {
  auto report = small_report();
  for (auto& r : report.results)
    if (r.contains("separable")) r["separable"] = false;
  auto none = failure_counts(report);
  for (const auto& [f, t] : find(none, "beta", "ks").per_replication) {
    EXPECT_EQ(f, 0);
    EXPECT_EQ(t, 2);
  }
  for (auto& r : report.results)
    if (r.contains("separable")) r["separable"] = true;
  auto every = failure_counts(report);
  for (const auto& [f, t] : find(every, "alpha", "ks").per_replication) EXPECT_EQ(f, t);
}

TEST(Summary, GoldenRendering) {
  auto s = render_summary(small_report());
  EXPECT_EQ(s.text, slurp(kData / "report" / "small_summary.txt"));
  ASSERT_TRUE(s.plot_files.count("toy__ks.tsv"));
  EXPECT_EQ(s.plot_files.at("toy__ks.tsv"), slurp(kData / "report" / "toy__ks.tsv"));
}

TEST(Summary, EmptyReportIsEmpty) {
  auto s = render_summary(Report{});
  EXPECT_TRUE(s.text.empty());
  EXPECT_TRUE(s.plot_files.empty());
}

TEST(Compare, ReportsChangedCounts) {
  auto a = small_report();
  EXPECT_TRUE(compare_reports(a, a).identical);
  EXPECT_EQ(compare_reports(a, a).text, "no differences in failure counts\n");
  auto b = a;
  b.results[1]["separable"] = true;  // alpha / ks / y in replication 1
  auto c = compare_reports(a, b);
  EXPECT_FALSE(c.identical);
  EXPECT_EQ(c.text, "toy / alpha / ks: 1, 0 (2) -> 2, 0 (2)\n");
}

TEST(Report, JsonRoundTripIsByteStable) {
  auto a = small_report();
  auto again = Report::from_json(nlohmann::ordered_json::parse(a.dump()));
  EXPECT_EQ(again.dump(), a.dump());
}

TEST(Correlation, ExamplesAndErrors) {
  std::vector<std::pair<double, double>> anti{{1, 3}, {2, 2}, {3, 1}, {4, 0}};
  auto e = fidelity_utility_correlation(anti, 500);
  ASSERT_TRUE(e.rho);
  EXPECT_NEAR(*e.rho, -1.0, 1e-12);
  std::vector<std::pair<double, double>> line{{0, 0}, {1, 2}, {2, 4}};
  EXPECT_NEAR(*fidelity_utility_correlation(line, 200).rho, 1.0, 1e-12);
  std::vector<std::pair<double, double>> flat{{1, 1}, {2, 1}, {3, 1}};
  EXPECT_FALSE(fidelity_utility_correlation(flat, 200).rho);
  std::vector<std::pair<double, double>> two{{1, 1}, {2, 2}};
  EXPECT_THROW(fidelity_utility_correlation(two), InvalidArgument);
}

TEST(Correlation, NoiseIntervalCoversZero) {
  int covered = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(500 + s);
    std::vector<std::pair<double, double>> pairs(40);
    for (auto& p : pairs) p = {rng.normal(), rng.normal()};
    auto e = fidelity_utility_correlation(pairs, 500, s);
    covered += e.ci && e.ci->contains(0.0);
  }
  EXPECT_GE(covered, 27);
}

TEST(RunBenchmark, CellCountsAndAlphaPropagation) {
  auto real = fixtures::store_sales_database(60, 1);
  std::map<std::string, std::vector<Database>> syn{
      {"marginal", {fixtures::marginal_sampler(real, 1), fixtures::marginal_sampler(real, 2)}}};
  auto o = quick_options();
  o.alpha = 0.1;
  o.suites = {Suite::SingleColumn, Suite::SingleTable, Suite::MultiTable};
  auto report = run_benchmark(real, syn, "stores", o);

  std::map<std::string, int> per_metric;
  for (const auto& r : report.results) {
    ++per_metric[r["metric"].get<std::string>()];
    if (r.contains("alpha")) EXPECT_EQ(r["alpha"].get<double>(), 0.1);
  }
  // store: size, revenue continuous, region categorical; sale: amount continuous, promo boolean.
  EXPECT_EQ(per_metric["ks"], 3 * 2);
  EXPECT_EQ(per_metric["wasserstein"], 3 * 2);
  EXPECT_EQ(per_metric["chi2"], 2 * 2);
  EXPECT_EQ(per_metric["total_variation"], 5 * 2);
  EXPECT_EQ(per_metric["dd_logistic"], (5 + 2) * 2);
  EXPECT_EQ(per_metric["mmd"], 2 * 2);
  EXPECT_EQ(per_metric["pcd"], 1 * 2);  // sale has one continuous column
  EXPECT_EQ(per_metric["cardinality_shape_similarity"], 2);
  EXPECT_EQ(per_metric["dda_logistic"], 2);
  EXPECT_EQ(per_metric.count("pc_logistic"), 0u);
  EXPECT_EQ(report.version, kReportVersion);
  EXPECT_TRUE(report.environment.contains("caps_triggered"));
}

TEST(RunBenchmark, SameSeedSameBytesAndWorkerIndependent) {
  auto real = fixtures::store_sales_database(40, 2);
  std::map<std::string, std::vector<Database>> syn{{"marginal", {fixtures::marginal_sampler(real, 3)}}};
  auto o = quick_options();
  o.suites = {Suite::SingleColumn, Suite::SingleTable};
  const auto first = run_benchmark(real, syn, "stores", o).dump();
  EXPECT_EQ(first, run_benchmark(real, syn, "stores", o).dump());
  o.workers = 3;
  EXPECT_EQ(first, run_benchmark(real, syn, "stores", o).dump());
}

TEST(RunBenchmark, InvalidSyntheticBecomesSkipRow) {
  auto root = testkit::scratch_dir("bench_skip");
  auto j = nlohmann::json::parse(R"({"options": {"bootstrap_replications": 100, "suites": ["single-column"]},
    "datasets": [{"name": "shop", "metadata": ")" + (kData / "shop" / "metadata.json").string() + R"(",
      "data": ")" + (kData / "shop").string() + R"(",
      "methods": [{"name": "dangling", "replications": [")" + (kData / "shop_dangling").string() + R"("]},
                  {"name": "missing", "replications": [")" + (kData / "shop_missing").string() + R"("]}]}]})");
  auto report = run_benchmark(BenchmarkConfig::from_json(j));
  int skips = 0;
  for (const auto& r : report.results) {
    if (r["metric"] == "*") {
      ++skips;
      EXPECT_TRUE(r.contains("skipped"));
    }
  }
  EXPECT_EQ(skips, 2);
  std::filesystem::remove_all(root);
}
