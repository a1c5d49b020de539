#include <cmath>

#include <gtest/gtest.h>

#include "synthrel/aggregation.hpp"
#include "synthrel/error.hpp"
#include "synthrel/io.hpp"

using namespace synthrel;

namespace {

const std::filesystem::path kData = SYNTHREL_TEST_DATA;

Database shop() { return load_database(kData / "shop" / "metadata.json", kData / "shop"); }

// parent <- child <- grandchild
Database three_level() {
  TableMeta a{"a", "id", {}, {{"id", SemType::Id, {}}, {"x", SemType::Numerical, {}}}};
  TableMeta b{"b", "id", {{"a_id", "a", "id"}},
              {{"id", SemType::Id, {}}, {"a_id", SemType::Id, {}}, {"k", SemType::Categorical, {}}}};
  TableMeta c{"c", "id", {{"b_id", "b", "id"}}, {{"id", SemType::Id, {}}, {"b_id", SemType::Id, {}}}};
  auto ids = [](std::vector<std::string> v) {
    std::vector<std::uint8_t> ok(v.size(), 1);
    return Column::text(SemType::Id, std::move(v), std::move(ok));
  };
  Table ta(a, {ids({"a1", "a2", "a3"}), Column::numeric(SemType::Numerical, {1.0, 2.0, 3.0}, {1, 1, 1})});
  Table tb(b, {ids({"b1", "b2", "b3"}), ids({"a1", "a1", "a2"}),
               Column::text(SemType::Categorical, {"p", "q", "p"}, {1, 1, 1})});
  Table tc(c, {ids({"c1", "c2", "c3"}), ids({"b1", "b1", "b2"})});
  return Database(Schema{{a, b, c}}, {ta, tb, tc});
}

}  // namespace

TEST(ChildRowCounts, CountsPerParentIncludingZero) {
  auto db = three_level();
  auto counts = child_row_counts(db, {"a", "b", "a_id"});
  EXPECT_EQ(counts, (std::vector<double>{2, 1, 0}));
  EXPECT_THROW(child_row_counts(db, {"a", "c", "a_id"}), InvalidArgument);
}

TEST(RelationalAggregation, StoreSalesMatchesManualJoin) {
  auto agg = relational_aggregation(shop(), "store");
  const auto& t = agg.table;
  ASSERT_TRUE(t.has_column("sales__count"));
  ASSERT_TRUE(t.has_column("sales__amount__mean"));
  ASSERT_TRUE(t.has_column("sales__channel__nunique"));
  const auto& count = t.column("sales__count");
  const auto& mean = t.column("sales__amount__mean");
  const auto& nunique = t.column("sales__channel__nunique");
  // s1: 10, 20, 30 over web/shop/web; s2: 5.5 and a null amount; s3: no sales.
  EXPECT_EQ(count.number(0), 3.0);
  EXPECT_EQ(count.number(1), 2.0);
  EXPECT_EQ(count.number(2), 0.0);
  EXPECT_DOUBLE_EQ(mean.number(0), 20.0);
  EXPECT_DOUBLE_EQ(mean.number(1), 5.5);
  EXPECT_TRUE(mean.is_null(2));
  EXPECT_EQ(nunique.number(0), 2.0);
  EXPECT_EQ(nunique.number(1), 2.0);
  EXPECT_EQ(nunique.number(2), 0.0);

  ASSERT_EQ(agg.provenance.size(), t.column_count());
  EXPECT_EQ(agg.provenance[*t.meta().column_index("size")], Provenance::Original);
  EXPECT_EQ(agg.provenance[*t.meta().column_index("sales__count")], Provenance::Aggregate);
}

TEST(RelationalAggregation, GrandchildCountMean) {
  auto agg = relational_aggregation(three_level(), "a");
  const auto& cm = agg.table.column("b__c__count_mean");
  // a1 has b1 (2 c rows) and b2 (1 c row); a2 has b3 (0); a3 has no b rows.
  EXPECT_DOUBLE_EQ(cm.number(0), 1.5);
  EXPECT_DOUBLE_EQ(cm.number(1), 0.0);
  EXPECT_TRUE(cm.is_null(2));
}

TEST(RelationalAggregation, ChildlessTableIsUnchanged) {
  auto db = shop();
  auto agg = relational_aggregation(db, "sales");
  EXPECT_TRUE(agg.table == db.table("sales"));
}

TEST(RelationalAggregation, MultipleForeignKeysToOneParentArePrefixed) {
  TableMeta p{"person", "id", {}, {{"id", SemType::Id, {}}}};
  TableMeta m{"message",
              "id",
              {{"sender", "person", "id"}, {"receiver", "person", "id"}},
              {{"id", SemType::Id, {}}, {"sender", SemType::Id, {}}, {"receiver", SemType::Id, {}}}};
  auto ids = [](std::vector<std::string> v) {
    std::vector<std::uint8_t> ok(v.size(), 1);
    return Column::text(SemType::Id, std::move(v), std::move(ok));
  };
  Database db(Schema{{p, m}}, {Table(p, {ids({"u", "v"})}), Table(m, {ids({"m1", "m2"}), ids({"u", "u"}), ids({"v", "u"})})});
  auto agg = relational_aggregation(db, "person");
  ASSERT_TRUE(agg.table.has_column("message[sender]__count"));
  ASSERT_TRUE(agg.table.has_column("message[receiver]__count"));
  EXPECT_EQ(agg.table.column("message[sender]__count").number(0), 2.0);
  EXPECT_EQ(agg.table.column("message[receiver]__count").number(0), 1.0);
}

TEST(RelationalAggregation, UnknownTargetThrows) {
  EXPECT_THROW(relational_aggregation(shop(), "nope"), InvalidArgument);
}
