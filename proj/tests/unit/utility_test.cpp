#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "synthrel/error.hpp"
#include "synthrel/fixtures.hpp"
#include "synthrel/io.hpp"
#include "synthrel/utility.hpp"
#include "test_support.hpp"

using namespace synthrel;

namespace {

const std::filesystem::path kData = SYNTHREL_TEST_DATA;

int sgn(double v) { return (v > 0) - (v < 0); }

double pair_sum(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
  double num = 0.0, total = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wij = w.empty() ? 1.0 : w[i] + w[j];
      num += wij * sgn(a[i] - a[j]) * sgn(b[i] - b[j]);
      total += wij;
    }
  return num / total;
}

double spearman_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  // Values are permutations of 1..n, so they are their own ranks.
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Weight 1/(1 + r) with r the zero-based position from the top of a.
std::vector<double> top_weights(const std::vector<double>& a) {
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = 1.0 / (1.0 + static_cast<double>(a.size()) - a[i]);
  return w;
}

UtilityTask revenue_task() {
  UtilityTask t;
  t.name = "revenue";
  t.table = "store";
  t.target = "revenue";
  t.kind = TaskKind::Regression;
  t.split_seed = 4;
  return t;
}

}  // namespace

TEST(RankCorrelation, MatchesPairEnumerationOnAllPermutations) {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<double> base(n);
    std::iota(base.begin(), base.end(), 1.0);
    auto a = base;
    do {
      auto b = base;
      do {
        EXPECT_NEAR(*rank_correlation(RankKind::Kendall, a, b), pair_sum(a, b, {}), 1e-12);
        EXPECT_NEAR(*rank_correlation(RankKind::Spearman, a, b), spearman_oracle(a, b), 1e-12);
        EXPECT_NEAR(*rank_correlation(RankKind::WeightedKendall, a, b), pair_sum(a, b, top_weights(a)), 1e-12);
      } while (std::next_permutation(b.begin(), b.end()));
    } while (n <= 5 && std::next_permutation(a.begin(), a.end()));
  }
}

TEST(RankCorrelation, WeightedPenalizesTopSwapMore) {
  for (std::size_t n : {4u, 10u}) {
    std::vector<double> a(n);
    std::iota(a.begin(), a.end(), 1.0);
    auto top = a, bottom = a;
    std::swap(top[n - 1], top[n - 2]);  // highest scores swapped
    std::swap(bottom[0], bottom[1]);
    const double wt = *rank_correlation(RankKind::WeightedKendall, a, top);
    const double wb = *rank_correlation(RankKind::WeightedKendall, a, bottom);
    EXPECT_LT(wt, wb);
    EXPECT_NEAR(wt, pair_sum(a, top, top_weights(a)), 1e-12);
    EXPECT_NEAR(wb, pair_sum(a, bottom, top_weights(a)), 1e-12);
    // Unweighted Kendall cannot tell them apart.
    EXPECT_DOUBLE_EQ(*rank_correlation(RankKind::Kendall, a, top), *rank_correlation(RankKind::Kendall, a, bottom));
  }
}

TEST(RankCorrelation, ConstantInputAndErrors) {
  std::vector<double> a{1, 2, 3}, c{5, 5, 5}, shorter{1, 2};
  EXPECT_FALSE(rank_correlation(RankKind::Spearman, a, c));
  EXPECT_THROW(rank_correlation(RankKind::Kendall, a, shorter), InvalidArgument);
  std::vector<double> rev{3, 2, 1};
  for (auto k : {RankKind::Spearman, RankKind::Kendall, RankKind::WeightedKendall})
    EXPECT_DOUBLE_EQ(*rank_correlation(k, a, rev), -1.0);
}

TEST(RankCorrelation, AverageRanksWithTies) {
  std::vector<double> v{10, 20, 10, 30};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Assemble, StoreTaskCarriesChildAggregates) {
  auto db = load_database(kData / "shop" / "metadata.json", kData / "shop");
  UtilityTask task;
  task.table = "store";
  task.target = "size";
  auto st = assemble_table(db, task);
  EXPECT_TRUE(st.features.has_column("sales__count"));
  EXPECT_TRUE(st.features.has_column("sales__amount__mean"));
  EXPECT_FALSE(st.features.has_column("size"));
  // s3 has an unparseable size and is dropped.
  EXPECT_EQ(st.y, (std::vector<double>{120.5, 80.0}));
  EXPECT_EQ(st.features.column("sales__count").number(0), 3.0);
}

TEST(Assemble, ChildTaskJoinsParentAttributes) {
  auto db = load_database(kData / "shop" / "metadata.json", kData / "shop");
  UtilityTask task;
  task.table = "sales";
  task.target = "channel";
  task.kind = TaskKind::Classification;
  task.positive_class = "web";
  auto st = assemble_table(db, task);
  EXPECT_TRUE(st.features.has_column("store__region"));
  EXPECT_EQ(st.y, (std::vector<double>{1, 0, 1, 0, 1}));
  task.positive_class.clear();
  EXPECT_THROW(assemble_table(db, task), InvalidArgument);
}

TEST(Split, PartitionsTargetRowsAndCarriesChildren) {
  auto db = fixtures::store_sales_database(200, 1);
  auto split = split_database(db, revenue_task());
  const auto& train = split.train.table("store");
  const auto& test = split.test.table("store");
  EXPECT_EQ(train.row_count() + test.row_count(), 200u);
  EXPECT_EQ(test.row_count(), 50u);
  EXPECT_EQ(split.train.table("sale").row_count() + split.test.table("sale").row_count(),
            db.table("sale").row_count());
  EXPECT_TRUE(validate(split.train).ok());
  EXPECT_TRUE(validate(split.test).ok());
  std::set<std::string> train_ids(train.column("id").texts().begin(), train.column("id").texts().end());
  for (const auto& id : test.column("id").texts()) EXPECT_FALSE(train_ids.count(id));
}

TEST(Tstr, ResampledTrainKeepsScoresClose) {
  auto db = fixtures::store_sales_database(400, 2);
  auto task = revenue_task();
  auto split = split_database(db, task);
  auto syn = testkit::resample_database(split.train, "store", 5);
  auto panel = default_learner_panel(TaskKind::Regression);
  auto r = tstr(split.train, split.test, syn, task, panel);
  EXPECT_EQ(r.score_name, "rmse");
  ASSERT_EQ(r.scores.size(), 4u);
  for (const auto& s : r.scores) {
    ASSERT_TRUE(s.real_trained && s.syn_trained) << s.learner;
    EXPECT_LT(std::abs(*s.syn_trained - *s.real_trained), 0.5 * *s.real_trained) << s.learner;
    EXPECT_LT(*s.real_trained, r.naive_baseline) << s.learner;
  }
  ASSERT_TRUE(r.model_rank.spearman);
}

TEST(Tstr, PermutedTargetHurtsGbt) {
  auto db = fixtures::store_sales_database(400, 3);
  auto task = revenue_task();
  auto split = split_database(db, task);
  const auto& store = split.train.table("store");
  auto perm = Rng(9).permutation(store.row_count());
  auto shuffled = store.column("revenue").take(perm);
  std::vector<Column> cols(store.columns().begin(), store.columns().end());
  cols[*store.meta().column_index("revenue")] = shuffled;
  auto syn = split.train.with_table(Table(store.meta(), cols));
  std::vector<LearnerSpec> gbt{LearnerSpec::gbt_default(TaskKind::Regression)};
  auto r = tstr(split.train, split.test, syn, task, gbt);
  ASSERT_EQ(r.scores.size(), 1u);
  EXPECT_GE(*r.scores[0].syn_trained, *r.scores[0].real_trained);
}

TEST(UtilityTask, JsonRoundTrip) {
  auto t = revenue_task();
  auto again = UtilityTask::from_json(nlohmann::json::parse(t.to_json().dump()));
  EXPECT_EQ(again.table, t.table);
  EXPECT_EQ(again.target, t.target);
  EXPECT_EQ(again.kind, t.kind);
  EXPECT_EQ(again.split_seed, t.split_seed);
}
