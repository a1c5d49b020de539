#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "synthrel/error.hpp"
#include "synthrel/fidelity.hpp"
#include "synthrel/fixtures.hpp"
#include "synthrel/random.hpp"
#include "test_support.hpp"

using namespace synthrel;
using synthrel::testkit::numeric_table;

namespace {

double ecdf(const std::vector<double>& s, double x) {
  return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= x; })) /
         static_cast<double>(s.size());
}

double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (const auto* s : {&a, &b})
    for (double x : *s) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  return d;
}

std::vector<std::string> labels(std::map<std::string, int> counts) {
  std::vector<std::string> out;
  for (auto& [k, n] : counts) out.insert(out.end(), n, k);
  return out;
}

// Explicit kernel sums with the median pooled distance as bandwidth.
double mmd_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> d;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j) d.push_back(std::abs(pooled[i] - pooled[j]));
  std::sort(d.begin(), d.end());
  const double s = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  auto k = [&](double x, double y) { return std::exp(-(x - y) * (x - y) / (2 * s * s)); };
  auto mean_k = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double t = 0.0;
    for (double x : u)
      for (double y : v) t += k(x, y);
    return t / static_cast<double>(u.size() * v.size());
  };
  return std::sqrt(std::max(0.0, mean_k(a, a) + mean_k(b, b) - 2 * mean_k(a, b)));
}

FeatureMatrix column(const std::vector<double>& v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  return FeatureMatrix::from_rows({"x"}, rows);
}

}  // namespace

TEST(Ks, SmallExample) {
  std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b).statistic, 1.0 / 3.0);
}

TEST(Ks, MatchesExhaustiveEcdfOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng.index(12)), b(1 + rng.index(12));
    for (auto& v : a) v = static_cast<double>(rng.index(6));
    for (auto& v : b) v = static_cast<double>(rng.index(6)) + (rng.bernoulli(0.3) ? 0.5 : 0.0);
    EXPECT_EQ(ks_two_sample(a, b).statistic, ks_oracle(a, b)) << "trial " << trial;
  }
}

TEST(Ks, IdenticalSamplesHavePValueOne) {
  std::vector<double> a{1, 2, 3, 4};
  auto r = ks_two_sample(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Ks, KolmogorovSurvivalKnownValuesAndContinuity) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 1e-3);
  EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-9), kolmogorov_survival(1.18 + 1e-9), 1e-8);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Ks, DetectsThreeVersusTwoLevelUniform) {
  Rng rng(2);
  std::vector<double> a(500), b(500);
  for (auto& v : a) v = 1.0 + static_cast<double>(rng.index(3));
  for (auto& v : b) v = 1.0 + static_cast<double>(rng.index(2));
  EXPECT_LT(ks_two_sample(a, b).p_value, 0.05);
}

TEST(Chi2, DisjointSingleCategoryTable) {
  auto a = labels({{"A", 10}});
  auto b = labels({{"B", 10}});
  auto r = chi2_two_sample(a, b);
  EXPECT_NEAR(r.statistic, 20.0, 1e-9);
  EXPECT_NEAR(r.p_value, 7.744216e-6, 1e-10);
}

TEST(Chi2, MatchesHandContingencyComputation) {
  auto a = labels({{"x", 30}, {"y", 10}, {"z", 10}});
  auto b = labels({{"x", 10}, {"y", 20}, {"z", 20}});
  // Column totals 40, 30, 30; each row holds 50 of 100.
  const double expected[3] = {20, 15, 15};
  const double obs_a[3] = {30, 10, 10}, obs_b[3] = {10, 20, 20};
  double stat = 0.0;
  for (int j = 0; j < 3; ++j)
    stat += std::pow(obs_a[j] - expected[j], 2) / expected[j] + std::pow(obs_b[j] - expected[j], 2) / expected[j];
  EXPECT_NEAR(chi2_two_sample(a, b).statistic, stat, 1e-9);
  EXPECT_NEAR(chi2_upper_tail(stat, 2), std::exp(-stat / 2), 1e-12);
}

TEST(Chi2, SingleCategoryThrows) {
  auto a = labels({{"A", 3}});
  EXPECT_THROW(chi2_two_sample(a, a), InvalidArgument);
}

TEST(CategoricalDistance, KnownValues) {
  auto p = labels({{"a", 2}, {"b", 2}});
  auto q = labels({{"a", 3}, {"b", 1}});
  EXPECT_NEAR(categorical_distance(DistanceKind::TotalVariation, p, q), 0.25, 1e-12);
  const double h = std::sqrt(0.5 * (std::pow(std::sqrt(0.5) - std::sqrt(0.75), 2) +
                                    std::pow(std::sqrt(0.5) - std::sqrt(0.25), 2)));
  EXPECT_NEAR(categorical_distance(DistanceKind::Hellinger, p, q), h, 1e-12);
  auto kl = [](double x, double m) { return x * std::log2(x / m); };
  const double js = std::sqrt(0.5 * (kl(0.5, 0.625) + kl(0.5, 0.375)) + 0.5 * (kl(0.75, 0.625) + kl(0.25, 0.375)));
  EXPECT_NEAR(categorical_distance(DistanceKind::JensenShannon, p, q), js, 1e-12);
}

TEST(CategoricalDistance, BoundsIdentityAndDisjointSupport) {
  Rng rng(9);
  for (auto kind : {DistanceKind::TotalVariation, DistanceKind::Hellinger, DistanceKind::JensenShannon}) {
    auto a = labels({{"a", 4}, {"b", 1}});
    auto b = labels({{"c", 2}});
    EXPECT_NEAR(categorical_distance(kind, a, a), 0.0, 1e-12);
    EXPECT_NEAR(categorical_distance(kind, a, b), 1.0, 1e-12);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::string> u(1 + rng.index(20)), v(1 + rng.index(20));
      for (auto& s : u) s = std::string(1, static_cast<char>('a' + rng.index(4)));
      for (auto& s : v) s = std::string(1, static_cast<char>('a' + rng.index(4)));
      const double d = categorical_distance(kind, u, v);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
    }
  }
}

TEST(CategoricalDistance, NullRateDifferenceIsVisible) {
  auto a = Column::numeric(SemType::Numerical, std::vector<std::optional<double>>{1, 2, 3, 4});
  auto b = Column::numeric(SemType::Numerical, std::vector<std::optional<double>>{1, 2, std::nullopt, std::nullopt});
  EXPECT_GT(column_distance(DistanceKind::TotalVariation, a, b), 0.0);
  EXPECT_EQ(column_distance(DistanceKind::TotalVariation, a, a), 0.0);
}

TEST(Wasserstein, ExampleAndSortedPairingOracle) {
  std::vector<double> a{0, 1}, b{1, 3};
  EXPECT_NEAR(wasserstein1(a, b), 1.5, 1e-12);
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(30);
    std::vector<double> u(n), v(n);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = 2.0 * rng.normal() + 1.0;
    auto su = u, sv = v;
    std::sort(su.begin(), su.end());
    std::sort(sv.begin(), sv.end());
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i) oracle += std::abs(su[i] - sv[i]);
    oracle /= static_cast<double>(n);
    EXPECT_NEAR(wasserstein1(u, v), oracle, 1e-9);
  }
}

TEST(Mmd, ZeroOnIdenticalInputs) {
  auto t = numeric_table("t", {{"x", {1, 2, 3, 4}}, {"y", {0, 1, 0, 1}}});
  EXPECT_NEAR(mmd(t, t), 0.0, 1e-12);
}

TEST(Mmd, MatchesExplicitKernelSums) {
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{
      {{0, 0, 0}, {10, 10, 10}}, {{0, 1, 2}, {10, 11, 12}}, {{0, 1, 5}, {0.5, 2, 9}}, {{-1, 0, 1}, {-1, 0, 2}}};
  for (const auto& [a, b] : cases) EXPECT_NEAR(mmd(column(a), column(b)), mmd_oracle(a, b), 1e-9);
}

TEST(Mmd, AllPointsEqualIsZero) {
  std::vector<double> a{3, 3}, b{3};
  EXPECT_EQ(mmd(column(a), column(b)), 0.0);
}

TEST(Pcd, OppositeCorrelationsGiveRootEight) {
  auto a = numeric_table("t", {{"x", {1, 2, 3, 4}}, {"y", {2, 4, 6, 8}}});
  auto b = numeric_table("t", {{"x", {1, 2, 3, 4}}, {"y", {8, 6, 4, 2}}});
  auto r = pcd(a, b);
  EXPECT_NEAR(r.value, std::sqrt(8.0), 1e-9);
  EXPECT_TRUE(r.degenerate_columns.empty());
}

TEST(Pcd, ConstantColumnIsReported) {
  auto a = numeric_table("t", {{"x", {1, 2, 3}}, {"y", {5, 5, 5}}});
  auto b = numeric_table("t", {{"x", {1, 2, 3}}, {"y", {1, 2, 3}}});
  auto r = pcd(a, b);
  EXPECT_EQ(r.degenerate_columns, std::vector<std::string>{"y"});
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-12);
  auto one = numeric_table("t", {{"x", {1, 2, 3}}});
  EXPECT_THROW(pcd(one, one), InvalidArgument);
}

TEST(Percentile, LinearInterpolation) {
  std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 4.0);
}

namespace {

TableMetric wasserstein_metric() {
  return [](const Table& a, const Table& b) {
    return wasserstein1(a.column("x").non_null_numbers(), b.column("x").non_null_numbers());
  };
}

Table normal_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return numeric_table("t", {{"x", x}});
}

}  // namespace

TEST(Bootstrap, DeterministicAndWorkerIndependent) {
  auto real = normal_table(150, 1);
  BootstrapSpec spec;
  spec.replications = 200;
  spec.seed = 77;
  auto one = bootstrap_replicates(wasserstein_metric(), real, spec);
  spec.workers = 4;
  auto four = bootstrap_replicates(wasserstein_metric(), real, spec);
  EXPECT_EQ(one, four);
  spec.seed = 78;
  EXPECT_NE(one, bootstrap_replicates(wasserstein_metric(), real, spec));
}

TEST(Bootstrap, RejectsTooFewReplications) {
  BootstrapSpec spec;
  spec.replications = 50;
  EXPECT_THROW(spec.check(), InvalidArgument);
}

TEST(Bootstrap, ShiftedSampleIsSeparable) {
  auto real = normal_table(300, 5);
  auto syn = normal_table(300, 6);
  std::vector<double> shifted;
  for (double v : syn.column("x").non_null_numbers()) shifted.push_back(v + 1.0);
  auto moved = numeric_table("t", {{"x", shifted}});
  BootstrapSpec spec;
  spec.replications = 200;
  const double observed = wasserstein_metric()(real, moved);
  auto r = bootstrap_separability(wasserstein_metric(), real, observed, spec, "wasserstein");
  EXPECT_TRUE(r.separable);
  ASSERT_TRUE(r.ci);
  EXPECT_GE(r.ci->low, 0.0);
}

TEST(Bootstrap, GenuineResampleCoverage) {
  // A fresh real-vs-resample draw should land inside the null interval.
  auto real = normal_table(200, 12);
  BootstrapSpec spec;
  spec.replications = 200;
  spec.seed = 3;
  int inside = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    Rng rng(1000 + t);
    auto a = real.take(rng.resample_indices(real.row_count()));
    auto b = real.take(rng.resample_indices(real.row_count()));
    auto r = bootstrap_separability(wasserstein_metric(), real, wasserstein_metric()(a, b), spec);
    inside += !r.separable;
  }
  EXPECT_GE(inside, static_cast<int>(0.9 * trials));
}

TEST(MetricResult, SeparabilityRules) {
  auto p = MetricResult::with_p_value("ks", Granularity::SingleColumn, 0.3, 0.01, 0.05);
  EXPECT_TRUE(p.separable);
  EXPECT_EQ(p.alpha, 0.05);
  auto c = MetricResult::with_ci("tv", Granularity::SingleColumn, 0.2, {0.0, 0.1}, 0.05);
  EXPECT_TRUE(c.separable);
  auto inside = MetricResult::with_ci("tv", Granularity::SingleColumn, 0.05, {0.0, 0.1}, 0.05);
  EXPECT_FALSE(inside.separable);
}

TEST(CardinalityShape, IdenticalAndDoubledCounts) {
  auto db = fixtures::parent_child_database(200, 4);
  Relationship rel{"parent", "child", "parent_id"};
  auto same = cardinality_shape_similarity(db, db, rel);
  EXPECT_EQ(same.value, 0.0);
  EXPECT_FALSE(same.separable);
  EXPECT_EQ(same.granularity, Granularity::MultiTable);

  // Every child of a different database keyed to half the parents.
  const auto& child = db.table("child");
  std::vector<std::optional<std::string>> refs;
  const auto& parents = db.table("parent").column("id");
  for (std::size_t i = 0; i < child.row_count(); ++i) refs.emplace_back(parents.text(i % 20));
  std::vector<Column> cols(child.columns().begin(), child.columns().end());
  cols[*child.meta().column_index("parent_id")] = Column::text(SemType::Id, refs);
  auto skewed = db.with_table(Table(child.meta(), cols));
  EXPECT_TRUE(cardinality_shape_similarity(db, skewed, rel).separable);
}
