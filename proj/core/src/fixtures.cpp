#include "synthrel/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "synthrel/aggregation.hpp"
#include "synthrel/error.hpp"
#include "synthrel/random.hpp"

namespace synthrel::fixtures {

Halves split_half(const Table& table, std::uint64_t seed) {
  const std::size_t n = table.row_count();
  if (n < 4) throw InvalidArgument("split_half needs at least 4 rows, got " + std::to_string(n));
  auto perm = Rng(seed).permutation(n);
  const std::size_t first = (n + 1) / 2;
  std::vector<std::size_t> a(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(first));
  std::vector<std::size_t> b(perm.begin() + static_cast<std::ptrdiff_t>(first), perm.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {table.take(a), table.take(b)};
}

Table shuffle_columns(const Table& table, std::uint64_t seed) {
  std::vector<Column> columns;
  const auto& meta = table.meta();
  for (std::size_t j = 0; j < table.column_count(); ++j) {
    if (meta.is_key_column(meta.columns[j].name)) {
      columns.push_back(table.column(j));
      continue;
    }
    Rng rng(derive_seed(seed, j));
    columns.push_back(table.column(j).take(rng.permutation(table.row_count())));
  }
  return Table(meta, std::move(columns));
}

Table copy_fraction(const Table& real_half, const Table& perfect_half, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("copy fraction must lie in [0, 1]");
  if (real_half.meta().columns != perfect_half.meta().columns)
    throw InvalidArgument("copy_fraction needs tables with the same columns");
  const std::size_t n = real_half.row_count();
  const auto copied = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  const std::size_t rest = n - std::min(copied, n);
  if (rest > 0 && perfect_half.row_count() == 0) throw InvalidArgument("copy_fraction has no rows to sample from");

  Rng rng(seed);
  auto real_perm = rng.permutation(n);
  real_perm.resize(std::min(copied, n));
  std::sort(real_perm.begin(), real_perm.end());

  std::vector<std::size_t> fresh;
  if (rest <= perfect_half.row_count()) {
    fresh = rng.permutation(perfect_half.row_count());
    fresh.resize(rest);
  } else {
    for (std::size_t i = 0; i < rest; ++i) fresh.push_back(rng.index(perfect_half.row_count()));
  }
  std::sort(fresh.begin(), fresh.end());

  Table out = real_half.take(real_perm).concat(perfect_half.take(fresh).renamed(real_half.name()));
  return out.take(rng.permutation(out.row_count()));
}

namespace {

Column id_column(SemType type, const std::vector<std::optional<std::string>>& values) {
  return Column::text(type, values);
}

}  // namespace

Database marginal_sampler(const Database& db, std::uint64_t seed) {
  const auto& schema = db.schema();
  std::map<std::string, std::vector<std::string>> new_keys;
  std::map<std::string, Table> built;

  std::uint64_t stream = 0;
  for (const auto& name : schema.topological_order()) {
    const auto& original = db.table(name);
    const auto& meta = original.meta();
    Rng rng(derive_seed(seed, stream++));

    // Row count and first-parent assignment from the empirical child counts.
    std::size_t rows = original.row_count();
    std::map<std::string, std::vector<std::optional<std::string>>> fk_values;
    if (!meta.foreign_keys.empty()) {
      const auto& fk = meta.foreign_keys.front();
      auto counts = child_row_counts(db, Relationship{fk.parent_table, name, fk.column});
      const auto& parent_keys = new_keys.at(fk.parent_table);
      std::vector<std::optional<std::string>> assigned;
      if (!counts.empty()) {
        for (const auto& key : parent_keys) {
          const auto c = static_cast<std::size_t>(counts[rng.index(counts.size())]);
          for (std::size_t k = 0; k < c; ++k) assigned.emplace_back(key);
        }
      }
      rows = assigned.size();
      fk_values[fk.column] = std::move(assigned);
      for (std::size_t f = 1; f < meta.foreign_keys.size(); ++f) {
        const auto& other = meta.foreign_keys[f];
        if (fk_values.count(other.column)) continue;
        const auto& keys = new_keys.at(other.parent_table);
        std::vector<std::optional<std::string>> v(rows);
        if (!keys.empty())
          for (auto& cell : v) cell = keys[rng.index(keys.size())];
        fk_values[other.column] = std::move(v);
      }
    }

    std::vector<std::string> pk(rows);
    for (std::size_t i = 0; i < rows; ++i) pk[i] = name + "_" + std::to_string(i);

    std::vector<Column> columns;
    for (const auto& c : meta.columns) {
      if (c.name == meta.primary_key) {
        columns.push_back(id_column(c.sem_type, {pk.begin(), pk.end()}));
      } else if (auto it = fk_values.find(c.name); it != fk_values.end()) {
        columns.push_back(id_column(c.sem_type, it->second));
      } else {
        std::vector<std::size_t> draw(rows);
        if (original.row_count() > 0)
          for (auto& d : draw) d = rng.index(original.row_count());
        columns.push_back(original.column(c.name).take(draw));
      }
    }
    new_keys[name] = std::move(pk);
    built.emplace(name, Table(meta, std::move(columns)));
  }

  std::vector<Table> tables;
  for (const auto& t : db.tables()) tables.push_back(std::move(built.at(t.name())));
  return Database(schema, std::move(tables));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> sequential_ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = prefix + std::to_string(i);
  return ids;
}

Column ids(const std::vector<std::string>& v) {
  return Column::text(SemType::Id, v, std::vector<std::uint8_t>(v.size(), 1));
}

Column numbers(SemType type, std::vector<double> v) {
  std::vector<std::uint8_t> valid(v.size(), 1);
  return Column::numeric(type, std::move(v), std::move(valid));
}

}  // namespace

Table mixed_table(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::optional<double>> x1(rows), x2(rows), when(rows);
  std::vector<std::optional<std::string>> tier(rows);
  std::vector<double> flag(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = rng.normal();
    const double b = 0.6 * a + 0.8 * rng.normal();
    const double t = a + 0.5 * rng.normal();
    x1[i] = a;
    if (!rng.bernoulli(0.02)) x2[i] = b;
    if (!rng.bernoulli(0.02)) tier[i] = t < -0.7 ? "low" : t < 0.0 ? "mid" : t < 0.7 ? "high" : "top";
    flag[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-b))) ? 1.0 : 0.0;
    when[i] = 1577836800.0 + std::floor(rng.uniform(0.0, 365.0 * 86400.0));
  }
  TableMeta meta{"data",
                 "id",
                 {},
                 {{"id", SemType::Id, std::nullopt},
                  {"x1", SemType::Numerical, std::nullopt},
                  {"x2", SemType::Numerical, std::nullopt},
                  {"tier", SemType::Categorical, std::nullopt},
                  {"flag", SemType::Boolean, std::nullopt},
                  {"when", SemType::Datetime, std::nullopt}}};
  std::vector<Column> cols;
  cols.push_back(ids(sequential_ids("r", rows)));
  cols.push_back(Column::numeric(SemType::Numerical, x1));
  cols.push_back(Column::numeric(SemType::Numerical, x2));
  cols.push_back(Column::text(SemType::Categorical, tier));
  cols.push_back(numbers(SemType::Boolean, flag));
  cols.push_back(Column::numeric(SemType::Datetime, when));
  return Table(std::move(meta), std::move(cols));
}

namespace {

Table three_numeric(std::size_t rows, std::vector<double> x1, std::vector<double> x2, std::vector<double> x3) {
  TableMeta meta{"data",
                 "id",
                 {},
                 {{"id", SemType::Id, std::nullopt},
                  {"x1", SemType::Numerical, std::nullopt},
                  {"x2", SemType::Numerical, std::nullopt},
                  {"x3", SemType::Numerical, std::nullopt}}};
  std::vector<Column> cols;
  cols.push_back(ids(sequential_ids("r", rows)));
  cols.push_back(numbers(SemType::Numerical, std::move(x1)));
  cols.push_back(numbers(SemType::Numerical, std::move(x2)));
  cols.push_back(numbers(SemType::Numerical, std::move(x3)));
  return Table(std::move(meta), std::move(cols));
}

}  // namespace

Table gaussian_table(std::size_t rows, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("gaussian_table needs 0 <= rho < 1");
  Rng rng(seed);
  std::vector<double> x1(rows), x2(rows), x3(rows);
  const double shared = std::sqrt(rho);
  const double own = std::sqrt(1.0 - rho);
  for (std::size_t i = 0; i < rows; ++i) {
    const double z = rng.normal();
    x1[i] = shared * z + own * rng.normal();
    x2[i] = shared * z + own * rng.normal();
    x3[i] = shared * z + own * rng.normal();
  }
  return three_numeric(rows, std::move(x1), std::move(x2), std::move(x3));
}

Table diagonal_mixture_table(std::size_t rows, double diagonal, std::uint64_t seed) {
  if (!(diagonal >= 0.0 && diagonal <= 1.0)) throw InvalidArgument("diagonal share must lie in [0, 1]");
  Rng rng(seed);
  std::vector<double> x1(rows), x2(rows), x3(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (rng.bernoulli(diagonal)) {
      x1[i] = x2[i] = x3[i] = rng.uniform();
    } else {
      x1[i] = rng.uniform();
      x2[i] = rng.uniform();
      x3[i] = rng.uniform();
    }
  }
  return three_numeric(rows, std::move(x1), std::move(x2), std::move(x3));
}

namespace {

Schema parent_child_schema() {
  TableMeta parent{"parent", "id", {}, {{"id", SemType::Id, std::nullopt}, {"x", SemType::Numerical, std::nullopt}}};
  TableMeta child{"child",
                  "id",
                  {{"parent_id", "parent", "id"}},
                  {{"id", SemType::Id, std::nullopt},
                   {"parent_id", SemType::Id, std::nullopt},
                   {"v", SemType::Numerical, std::nullopt}}};
  return Schema{{parent, child}};
}

}  // namespace

Database parent_child_database(std::size_t parents, std::uint64_t seed) {
  Rng rng(seed);
  auto schema = parent_child_schema();
  auto pids = sequential_ids("p", parents);
  std::vector<double> x(parents);
  std::vector<std::string> owner;
  std::vector<double> v;
  for (std::size_t i = 0; i < parents; ++i) {
    x[i] = rng.normal();
    const int count = x[i] < 0.0 ? 1 : 5;
    for (int c = 0; c < count; ++c) {
      owner.push_back(pids[i]);
      v.push_back(x[i] + 0.5 * rng.normal());
    }
  }
  Table parent(schema.tables[0], {ids(pids), numbers(SemType::Numerical, std::move(x))});
  Table child(schema.tables[1],
              {ids(sequential_ids("c", owner.size())), ids(owner), numbers(SemType::Numerical, std::move(v))});
  return Database(schema, {std::move(parent), std::move(child)});
}

Database break_parent_child_link(const Database& db, std::uint64_t seed) {
  const auto& child = db.table("child");
  Rng rng(seed);
  std::vector<Column> cols(child.columns().begin(), child.columns().end());
  const auto j = *child.meta().column_index("v");
  cols[j] = cols[j].take(rng.permutation(child.row_count()));
  return db.with_table(Table(child.meta(), std::move(cols)));
}

Database store_sales_database(std::size_t stores, std::uint64_t seed) {
  static const char* const kRegions[] = {"north", "south", "east", "west"};
  static const double kRegionEffect[] = {0.0, 2.0, -1.0, 1.0};
  Rng rng(seed);

  TableMeta store_meta{"store",
                       "id",
                       {},
                       {{"id", SemType::Id, std::nullopt},
                        {"size", SemType::Numerical, std::nullopt},
                        {"region", SemType::Categorical, std::nullopt},
                        {"revenue", SemType::Numerical, std::nullopt}}};
  TableMeta sale_meta{"sale",
                      "id",
                      {{"store_id", "store", "id"}},
                      {{"id", SemType::Id, std::nullopt},
                       {"store_id", SemType::Id, std::nullopt},
                       {"amount", SemType::Numerical, std::nullopt},
                       {"promo", SemType::Boolean, std::nullopt}}};

  auto sids = sequential_ids("s", stores);
  std::vector<double> size(stores), revenue(stores);
  std::vector<std::string> region(stores);
  std::vector<std::string> owner;
  std::vector<double> amount, promo;
  for (std::size_t i = 0; i < stores; ++i) {
    size[i] = rng.uniform(1.0, 10.0);
    const std::size_t r = rng.index(4);
    region[i] = kRegions[r];
    const std::size_t count = 1 + rng.index(6);
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double a = size[i] + rng.normal();
      const double p = rng.bernoulli(0.3) ? 1.0 : 0.0;
      owner.push_back(sids[i]);
      amount.push_back(a);
      promo.push_back(p);
      total += a * (1.0 + 0.5 * p);
    }
    revenue[i] = 2.0 * size[i] + kRegionEffect[r] + 0.5 * total / static_cast<double>(count) +
                 0.8 * static_cast<double>(count) + rng.normal();
  }
  Table store(store_meta, {ids(sids), numbers(SemType::Numerical, std::move(size)),
                           Column::text(SemType::Categorical, region, std::vector<std::uint8_t>(stores, 1)),
                           numbers(SemType::Numerical, std::move(revenue))});
  Table sale(sale_meta, {ids(sequential_ids("t", owner.size())), ids(owner),
                         numbers(SemType::Numerical, std::move(amount)), numbers(SemType::Boolean, std::move(promo))});
  return Database(Schema{{store_meta, sale_meta}}, {std::move(store), std::move(sale)});
}

}  // namespace synthrel::fixtures
