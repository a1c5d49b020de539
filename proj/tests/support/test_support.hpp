#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "synthrel/random.hpp"
#include "synthrel/relational.hpp"

namespace synthrel::testkit {

struct NumCol {
  std::string name;
  std::vector<double> values;
  SemType type = SemType::Numerical;
};

/// Table with an "id" key column followed by numeric columns.
inline Table numeric_table(const std::string& name, const std::vector<NumCol>& cols) {
  TableMeta meta{name, "id", {}, {{"id", SemType::Id, std::nullopt}}};
  std::vector<Column> columns;
  const std::size_t n = cols.empty() ? 0 : cols.front().values.size();
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = name + std::to_string(i);
  columns.push_back(Column::text(SemType::Id, ids, std::vector<std::uint8_t>(n, 1)));
  for (const auto& c : cols) {
    meta.columns.push_back({c.name, c.type, std::nullopt});
    columns.push_back(Column::numeric(c.type, c.values, std::vector<std::uint8_t>(c.values.size(), 1)));
  }
  return Table(std::move(meta), std::move(columns));
}

/// Table with an "id" key column and one categorical column "c".
inline Table categorical_table(const std::string& name, const std::vector<std::string>& values) {
  TableMeta meta{name, "id", {}, {{"id", SemType::Id, std::nullopt}, {"c", SemType::Categorical, std::nullopt}}};
  std::vector<std::string> ids(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) ids[i] = name + std::to_string(i);
  std::vector<std::uint8_t> ones(values.size(), 1);
  return Table(std::move(meta), {Column::text(SemType::Id, ids, ones), Column::text(SemType::Categorical, values, ones)});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("synthrel_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Bootstrap resample of `root` rows with replacement. Each drawn row brings
/// its descendants along; every copy gets keys suffixed "#<draw>" so keys stay
/// unique. Tables outside the subtree are kept whole.
inline Database resample_database(const Database& db, const std::string& root, std::uint64_t seed) {
  Rng rng(seed);
  struct Draw {
    std::size_t row;
    std::string suffix;
  };
  std::map<std::string, std::vector<Draw>> draws;
  std::map<std::string, std::string> via_fk;  // table -> fk column to its drawn parent
  const auto& rt = db.table(root);
  auto picks = rng.resample_indices(rt.row_count());
  for (std::size_t k = 0; k < picks.size(); ++k) draws[root].push_back({picks[k], "#" + std::to_string(k)});

  std::deque<std::string> queue{root};
  while (!queue.empty()) {
    auto parent = queue.front();
    queue.pop_front();
    const auto& pt = db.table(parent);
    const auto& pk = pt.column(pt.meta().primary_key);
    for (const auto& rel : db.schema().children_of(parent)) {
      if (draws.count(rel.child)) continue;
      const auto& fk = db.table(rel.child).column(rel.fk_column);
      std::map<std::string, std::vector<std::size_t>> by_parent;
      for (std::size_t r = 0; r < fk.size(); ++r)
        if (!fk.is_null(r)) by_parent[fk.text(r)].push_back(r);
      auto& out = draws[rel.child];
      for (const auto& d : draws[parent]) {
        auto it = by_parent.find(pk.text(d.row));
        if (it == by_parent.end()) continue;
        for (auto r : it->second) out.push_back({r, d.suffix});
      }
      via_fk[rel.child] = rel.fk_column;
      queue.push_back(rel.child);
    }
  }

  std::vector<Table> tables;
  for (const auto& t : db.tables()) {
    auto it = draws.find(t.name());
    if (it == draws.end()) {
      tables.push_back(t);
      continue;
    }
    std::vector<std::size_t> rows;
    for (const auto& d : it->second) rows.push_back(d.row);
    auto taken = t.take(rows);
    std::vector<Column> cols(taken.columns().begin(), taken.columns().end());
    auto rekey = [&](const std::string& name) {
      const auto idx = *t.meta().column_index(name);
      std::vector<std::optional<std::string>> v;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (taken.column(idx).is_null(r)) {
          v.emplace_back(std::nullopt);
        } else {
          v.emplace_back(taken.column(idx).text(r) + it->second[r].suffix);
        }
      }
      cols[idx] = Column::text(SemType::Id, v);
    };
    rekey(t.meta().primary_key);
    if (via_fk.count(t.name())) rekey(via_fk[t.name()]);
    tables.emplace_back(t.meta(), std::move(cols));
  }
  return Database(db.schema(), std::move(tables));
}

}  // namespace synthrel::testkit
