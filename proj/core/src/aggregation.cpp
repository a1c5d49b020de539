#include "synthrel/aggregation.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "synthrel/error.hpp"

namespace synthrel {

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::Original ? "original" : "aggregate";
}

namespace {

const Relationship& require_relationship(const Schema& schema, const Relationship& rel,
                                         std::vector<Relationship>& storage) {
  storage = schema.children_of(rel.parent);
  auto it = std::find(storage.begin(), storage.end(), rel);
  if (it == storage.end())
    throw InvalidArgument("unknown relationship " + rel.parent + " <- " + rel.child + "." + rel.fk_column);
  return *it;
}

// Parent row index of each child row (nullopt when the key is null or dangling).
std::vector<std::optional<std::size_t>> parent_of_rows(const Database& db, const Relationship& rel) {
  const auto& parent = db.table(rel.parent);
  const auto& child = db.table(rel.child);
  return resolve_keys(child.column(rel.fk_column), parent.column(parent.meta().primary_key));
}

}  // namespace

std::vector<double> child_row_counts(const Database& db, const Relationship& relationship) {
  std::vector<Relationship> storage;
  require_relationship(db.schema(), relationship, storage);
  std::vector<double> counts(db.table(relationship.parent).row_count(), 0.0);
  for (const auto& p : parent_of_rows(db, relationship))
    if (p) counts[*p] += 1.0;
  return counts;
}

std::string relationship_prefix(const Schema& schema, const Relationship& relationship) {
  const auto& child = schema.at(relationship.child);
  auto links = std::count_if(child.foreign_keys.begin(), child.foreign_keys.end(),
                             [&](const ForeignKey& fk) { return fk.parent_table == relationship.parent; });
  if (links > 1) return relationship.child + "[" + relationship.fk_column + "]";
  return relationship.child;
}

AggregatedTable relational_aggregation(const Database& db, std::string_view target, const AggregationSpec& spec) {
  if (!db.has_table(target)) throw InvalidArgument("unknown target table '" + std::string(target) + "'");
  const auto& base = db.table(target);
  const std::size_t n = base.row_count();

  TableMeta meta = base.meta();
  std::vector<Column> columns(base.columns().begin(), base.columns().end());
  std::vector<Provenance> provenance(columns.size(), Provenance::Original);
  std::set<std::string> used;
  for (const auto& c : meta.columns) used.insert(c.name);

  auto append = [&](std::string name, std::vector<std::optional<double>> values) {
    if (!used.insert(name).second) throw InvalidArgument("aggregate column name collision: '" + name + "'");
    meta.columns.push_back({name, SemType::Numerical, std::nullopt});
    columns.push_back(Column::numeric(SemType::Numerical, std::move(values)));
    provenance.push_back(Provenance::Aggregate);
  };

  for (const auto& rel : db.schema().children_of(target)) {
    const auto prefix = relationship_prefix(db.schema(), rel);
    const auto& child = db.table(rel.child);
    const auto& child_meta = child.meta();
    const auto owner = parent_of_rows(db, rel);

    // Row groups per target row, in child row order.
    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t r = 0; r < owner.size(); ++r)
      if (owner[r]) groups[*owner[r]].push_back(r);

    if (spec.counts) {
      std::vector<std::optional<double>> counts(n);
      for (std::size_t i = 0; i < n; ++i) counts[i] = static_cast<double>(groups[i].size());
      append(prefix + "__count", std::move(counts));
    }

    for (std::size_t j = 0; j < child_meta.columns.size(); ++j) {
      const auto& cm = child_meta.columns[j];
      if (child_meta.is_key_column(cm.name)) continue;
      const auto& col = child.column(j);
      if (spec.numeric_means && is_continuous(cm.sem_type)) {
        std::vector<std::optional<double>> means(n);
        for (std::size_t i = 0; i < n; ++i) {
          double sum = 0.0;
          std::size_t k = 0;
          for (auto r : groups[i]) {
            if (col.is_null(r)) continue;
            sum += col.number(r);
            ++k;
          }
          if (k > 0) means[i] = sum / static_cast<double>(k);
        }
        append(prefix + "__" + cm.name + "__mean", std::move(means));
      } else if (spec.categorical_nunique && is_discrete(cm.sem_type)) {
        std::vector<std::optional<double>> distinct(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (col.holds_text()) {
            std::unordered_set<std::string_view> seen;
            for (auto r : groups[i])
              if (!col.is_null(r)) seen.insert(col.text(r));
            distinct[i] = static_cast<double>(seen.size());
          } else {
            std::set<double> seen;
            for (auto r : groups[i])
              if (!col.is_null(r)) seen.insert(col.number(r));
            distinct[i] = static_cast<double>(seen.size());
          }
        }
        append(prefix + "__" + cm.name + "__nunique", std::move(distinct));
      }
    }

    if (spec.grandchild_count_means) {
      for (const auto& grand : db.schema().children_of(rel.child)) {
        const auto per_child = child_row_counts(db, grand);
        std::vector<std::optional<double>> means(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (groups[i].empty()) continue;
          double sum = 0.0;
          for (auto r : groups[i]) sum += per_child[r];
          means[i] = sum / static_cast<double>(groups[i].size());
        }
        append(prefix + "__" + relationship_prefix(db.schema(), grand) + "__count_mean", std::move(means));
      }
    }
  }

  return {Table(std::move(meta), std::move(columns)), std::move(provenance)};
}

}  // namespace synthrel
