#include "synthrel/relational.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "synthrel/error.hpp"

namespace synthrel {

std::string_view to_string(SemType type) noexcept {
  switch (type) {
    case SemType::Id: return "id";
    case SemType::Categorical: return "categorical";
    case SemType::Numerical: return "numerical";
    case SemType::Boolean: return "boolean";
    case SemType::Datetime: return "datetime";
  }
  return "unknown";
}

SemType parse_sem_type(std::string_view text) {
  if (text == "id") return SemType::Id;
  if (text == "categorical") return SemType::Categorical;
  if (text == "numerical") return SemType::Numerical;
  if (text == "boolean") return SemType::Boolean;
  if (text == "datetime") return SemType::Datetime;
  throw LoadError("unknown sem_type '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Schema

const ColumnMeta* TableMeta::find_column(std::string_view column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

std::optional<std::size_t> TableMeta::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return i;
  return std::nullopt;
}

bool TableMeta::is_key_column(std::string_view column) const {
  if (!primary_key.empty() && column == primary_key) return true;
  for (const auto& fk : foreign_keys)
    if (fk.column == column) return true;
  const auto* meta = find_column(column);
  return meta != nullptr && meta->sem_type == SemType::Id;
}

const TableMeta* Schema::find(std::string_view table) const {
  for (const auto& t : tables)
    if (t.name == table) return &t;
  return nullptr;
}

const TableMeta& Schema::at(std::string_view table) const {
  const auto* t = find(table);
  if (t == nullptr) throw InvalidArgument("unknown table '" + std::string(table) + "'");
  return *t;
}

std::vector<Relationship> Schema::children_of(std::string_view parent) const {
  std::vector<Relationship> out;
  for (const auto& t : tables)
    for (const auto& fk : t.foreign_keys)
      if (fk.parent_table == parent) out.push_back({fk.parent_table, t.name, fk.column});
  return out;
}

std::vector<Relationship> Schema::relationships() const {
  std::vector<Relationship> out;
  for (const auto& t : tables)
    for (const auto& fk : t.foreign_keys) out.push_back({fk.parent_table, t.name, fk.column});
  return out;
}

std::vector<std::string> Schema::topological_order() const {
  std::vector<std::string> order;
  std::set<std::string> placed;
  while (order.size() < tables.size()) {
    bool progressed = false;
    for (const auto& t : tables) {
      if (placed.contains(t.name)) continue;
      bool ready = std::all_of(t.foreign_keys.begin(), t.foreign_keys.end(), [&](const ForeignKey& fk) {
        return fk.parent_table == t.name || placed.contains(fk.parent_table);
      });
      if (ready) {
        order.push_back(t.name);
        placed.insert(t.name);
        progressed = true;
      }
    }
    if (!progressed) throw LoadError("foreign-key graph contains a cycle");
  }
  return order;
}

void Schema::check() const {
  std::set<std::string> names;
  for (const auto& t : tables) {
    if (!names.insert(t.name).second) throw LoadError("duplicate table '" + t.name + "'");
    std::set<std::string> columns;
    for (const auto& c : t.columns)
      if (!columns.insert(c.name).second)
        throw LoadError("duplicate column '" + c.name + "' in table '" + t.name + "'");
    const auto* pk = t.find_column(t.primary_key);
    if (t.primary_key.empty() || pk == nullptr)
      throw LoadError("primary-key column absent in table '" + t.name + "'");
    if (pk->sem_type != SemType::Id)
      throw LoadError("primary key '" + t.primary_key + "' of table '" + t.name + "' is not id-typed");
  }
  for (const auto& t : tables) {
    for (const auto& fk : t.foreign_keys) {
      const auto* parent = find(fk.parent_table);
      if (parent == nullptr)
        throw LoadError("table '" + t.name + "' references unknown table '" + fk.parent_table + "'");
      if (fk.parent_key != parent->primary_key)
        throw LoadError("foreign key " + t.name + "." + fk.column + " must reference the primary key of '" +
                        fk.parent_table + "'");
      const auto* col = t.find_column(fk.column);
      if (col == nullptr)
        throw LoadError("foreign-key column '" + fk.column + "' absent in table '" + t.name + "'");
      if (col->sem_type != SemType::Id)
        throw LoadError("foreign-key column '" + t.name + "." + fk.column + "' is not id-typed");
    }
  }
  (void)topological_order();
}

// ---------------------------------------------------------------------------
// Column

Column Column::numeric(SemType type, std::vector<double> values, std::vector<std::uint8_t> valid) {
  if (type == SemType::Id || type == SemType::Categorical)
    throw InvalidArgument("numeric storage requested for a text column type");
  if (values.size() != valid.size()) throw InvalidArgument("value and mask lengths differ");
  Column c;
  c.type_ = type;
  c.numbers_ = std::move(values);
  c.valid_ = std::move(valid);
  for (std::size_t i = 0; i < c.numbers_.size(); ++i)
    if (c.valid_[i] == 0) c.numbers_[i] = 0.0;
  return c;
}

Column Column::numeric(SemType type, std::vector<std::optional<double>> values) {
  std::vector<double> v(values.size());
  std::vector<std::uint8_t> m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    m[i] = values[i].has_value() && std::isfinite(*values[i]);
    v[i] = m[i] ? *values[i] : 0.0;
  }
  return numeric(type, std::move(v), std::move(m));
}

Column Column::text(SemType type, std::vector<std::string> values, std::vector<std::uint8_t> valid) {
  if (type != SemType::Id && type != SemType::Categorical)
    throw InvalidArgument("text storage requested for a numeric column type");
  if (values.size() != valid.size()) throw InvalidArgument("value and mask lengths differ");
  Column c;
  c.type_ = type;
  c.texts_ = std::move(values);
  c.valid_ = std::move(valid);
  for (std::size_t i = 0; i < c.texts_.size(); ++i)
    if (c.valid_[i] == 0) c.texts_[i].clear();
  return c;
}

Column Column::text(SemType type, std::vector<std::optional<std::string>> values) {
  std::vector<std::string> v(values.size());
  std::vector<std::uint8_t> m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    m[i] = values[i].has_value();
    if (m[i]) v[i] = *values[i];
  }
  return text(type, std::move(v), std::move(m));
}

std::size_t Column::null_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{0}));
}

std::vector<double> Column::non_null_numbers() const {
  std::vector<double> out;
  out.reserve(numbers_.size());
  for (std::size_t i = 0; i < numbers_.size(); ++i)
    if (valid_[i]) out.push_back(numbers_[i]);
  return out;
}

std::vector<std::string> Column::category_labels() const {
  std::vector<std::string> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!valid_[i]) {
      out[i] = std::string(kMissingCategory);
    } else if (holds_text()) {
      out[i] = texts_[i];
    } else if (type_ == SemType::Boolean) {
      out[i] = numbers_[i] != 0.0 ? "true" : "false";
    } else {
      out[i] = std::to_string(numbers_[i]);
    }
  }
  return out;
}

Column Column::take(std::span<const std::size_t> rows) const {
  Column c;
  c.type_ = type_;
  c.valid_.reserve(rows.size());
  if (holds_text()) {
    c.texts_.reserve(rows.size());
    for (auto r : rows) {
      c.texts_.push_back(texts_.at(r));
      c.valid_.push_back(valid_[r]);
    }
  } else {
    c.numbers_.reserve(rows.size());
    for (auto r : rows) {
      c.numbers_.push_back(numbers_.at(r));
      c.valid_.push_back(valid_[r]);
    }
  }
  return c;
}

void Column::append(const Column& other) {
  if (other.type_ != type_) throw InvalidArgument("cannot append columns of different types");
  valid_.insert(valid_.end(), other.valid_.begin(), other.valid_.end());
  numbers_.insert(numbers_.end(), other.numbers_.begin(), other.numbers_.end());
  texts_.insert(texts_.end(), other.texts_.begin(), other.texts_.end());
}

bool Column::operator==(const Column& other) const {
  if (type_ != other.type_ || valid_ != other.valid_) return false;
  for (std::size_t i = 0; i < valid_.size(); ++i) {
    if (!valid_[i]) continue;
    if (holds_text() ? texts_[i] != other.texts_[i] : numbers_[i] != other.numbers_[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(TableMeta meta, std::vector<Column> columns) : meta_(std::move(meta)), columns_(std::move(columns)) {
  if (columns_.size() != meta_.columns.size())
    throw InvalidArgument("table '" + meta_.name + "': column count does not match metadata");
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].type() != meta_.columns[i].sem_type)
      throw InvalidArgument("table '" + meta_.name + "': column '" + meta_.columns[i].name +
                            "' does not match its declared sem_type");
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  check_lengths();
}

void Table::check_lengths() const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].size() != rows_)
      throw InvalidArgument("table '" + meta_.name + "': column '" + meta_.columns[i].name + "' has " +
                            std::to_string(columns_[i].size()) + " rows, expected " + std::to_string(rows_));
}

const Column& Table::column(std::string_view name) const {
  auto idx = meta_.column_index(name);
  if (!idx) throw InvalidArgument("table '" + meta_.name + "' has no column '" + std::string(name) + "'");
  return columns_[*idx];
}

Table Table::take(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.take(rows));
  Table t(meta_, std::move(cols));
  t.rows_ = rows.size();
  return t;
}

Table Table::select(std::span<const std::string> names) const {
  TableMeta meta;
  meta.name = meta_.name;
  std::vector<Column> cols;
  for (const auto& n : names) {
    auto idx = meta_.column_index(n);
    if (!idx) throw InvalidArgument("table '" + meta_.name + "' has no column '" + n + "'");
    meta.columns.push_back(meta_.columns[*idx]);
    cols.push_back(columns_[*idx]);
    if (n == meta_.primary_key) meta.primary_key = n;
    for (const auto& fk : meta_.foreign_keys)
      if (fk.column == n) meta.foreign_keys.push_back(fk);
  }
  Table t(std::move(meta), std::move(cols));
  t.rows_ = rows_;
  return t;
}

Table Table::concat(const Table& other) const {
  if (other.meta_.columns != meta_.columns) throw InvalidArgument("cannot concatenate tables with different columns");
  auto cols = columns_;
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i].append(other.columns_[i]);
  Table t(meta_, std::move(cols));
  t.rows_ = rows_ + other.rows_;
  return t;
}

Table Table::renamed(std::string name) const {
  Table t = *this;
  t.meta_.name = std::move(name);
  return t;
}

bool Table::operator==(const Table& other) const {
  return rows_ == other.rows_ && meta_ == other.meta_ && columns_ == other.columns_;
}

// ---------------------------------------------------------------------------
// Database

Database::Database(Schema schema, std::vector<Table> tables) : schema_(std::move(schema)) {
  tables_.reserve(schema_.tables.size());
  for (const auto& meta : schema_.tables) {
    auto it = std::find_if(tables.begin(), tables.end(), [&](const Table& t) { return t.name() == meta.name; });
    if (it == tables.end()) throw LoadError("missing table '" + meta.name + "'");
    if (!(it->meta() == meta)) throw InvalidArgument("table '" + meta.name + "' does not match its schema entry");
    tables_.push_back(std::move(*it));
  }
}

const Table& Database::table(std::string_view name) const {
  for (const auto& t : tables_)
    if (t.name() == name) return t;
  throw InvalidArgument("unknown table '" + std::string(name) + "'");
}

Database Database::with_table(Table table) const {
  Database db = *this;
  for (auto& t : db.tables_) {
    if (t.name() == table.name()) {
      if (!(t.meta() == table.meta())) throw InvalidArgument("replacement table has different metadata");
      t = std::move(table);
      return db;
    }
  }
  throw InvalidArgument("unknown table '" + table.name() + "'");
}

Database single_table_database(Table table) {
  TableMeta meta = table.meta();
  meta.foreign_keys.clear();
  std::vector<Column> cols(table.columns().begin(), table.columns().end());
  Table t(meta, std::move(cols));
  Schema schema{{meta}};
  return Database(std::move(schema), {std::move(t)});
}

// ---------------------------------------------------------------------------
// Validation and joins

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::DuplicatePrimaryKey: return "duplicate primary key";
    case ViolationKind::NullPrimaryKey: return "null primary key";
    case ViolationKind::DanglingForeignKey: return "dangling foreign key";
  }
  return "unknown";
}

std::vector<std::optional<std::size_t>> resolve_keys(const Column& references, const Column& keys) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (!keys.is_null(i)) index.emplace(keys.text(i), i);
  std::vector<std::optional<std::size_t>> out(references.size());
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references.is_null(i)) continue;
    auto it = index.find(references.text(i));
    if (it != index.end()) out[i] = it->second;
  }
  return out;
}

ValidationReport validate(const Database& db) {
  ValidationReport report;
  for (const auto& table : db.tables()) {
    const auto& meta = table.meta();
    const auto& pk = table.column(meta.primary_key);
    std::map<std::string, std::pair<std::size_t, std::size_t>> seen;  // value -> (first row, count)
    for (std::size_t r = 0; r < pk.size(); ++r) {
      if (pk.is_null(r)) {
        report.violations.push_back({ViolationKind::NullPrimaryKey, meta.name, meta.primary_key, "", r,
                                     "null primary key in row " + std::to_string(r)});
        continue;
      }
      auto [it, inserted] = seen.try_emplace(pk.text(r), r, 0);
      ++it->second.second;
    }
    for (const auto& [value, info] : seen) {
      if (info.second < 2) continue;
      report.violations.push_back({ViolationKind::DuplicatePrimaryKey, meta.name, meta.primary_key, value,
                                   info.first,
                                   "primary key '" + value + "' appears " + std::to_string(info.second) + " times"});
    }
    for (const auto& fk : meta.foreign_keys) {
      const auto& refs = table.column(fk.column);
      const auto& parent = db.table(fk.parent_table);
      auto resolved = resolve_keys(refs, parent.column(fk.parent_key));
      for (std::size_t r = 0; r < refs.size(); ++r) {
        if (refs.is_null(r) || resolved[r]) continue;
        report.violations.push_back({ViolationKind::DanglingForeignKey, meta.name, fk.column, refs.text(r), r,
                                     "value '" + refs.text(r) + "' of " + meta.name + "." + fk.column +
                                         " has no match in " + fk.parent_table + "." + fk.parent_key});
      }
    }
  }
  return report;
}

Table denormalize(const Database& db, std::string_view parent, std::string_view child) {
  const auto& child_meta = db.schema().at(child);
  const auto& parent_meta = db.schema().at(parent);
  std::vector<const ForeignKey*> links;
  for (const auto& fk : child_meta.foreign_keys)
    if (fk.parent_table == parent) links.push_back(&fk);
  if (links.empty())
    throw InvalidArgument("no relationship between '" + std::string(parent) + "' and '" + std::string(child) + "'");
  if (links.size() > 1)
    throw InvalidArgument("ambiguous relationship: '" + std::string(child) + "' has " + std::to_string(links.size()) +
                          " foreign keys to '" + std::string(parent) + "'");

  const auto& child_table = db.table(child);
  const auto& parent_table = db.table(parent);
  auto resolved = resolve_keys(child_table.column(links.front()->column), parent_table.column(parent_meta.primary_key));

  std::vector<std::size_t> child_rows;
  std::vector<std::size_t> parent_rows;
  for (std::size_t r = 0; r < resolved.size(); ++r) {
    if (!resolved[r]) continue;
    child_rows.push_back(r);
    parent_rows.push_back(*resolved[r]);
  }

  TableMeta meta;
  meta.name = std::string(parent) + "__" + std::string(child);
  std::vector<Column> cols;
  for (std::size_t i = 0; i < child_meta.columns.size(); ++i) {
    const auto& cm = child_meta.columns[i];
    if (child_meta.is_key_column(cm.name)) continue;
    meta.columns.push_back(cm);
    cols.push_back(child_table.column(i).take(child_rows));
  }
  for (std::size_t i = 0; i < parent_meta.columns.size(); ++i) {
    auto cm = parent_meta.columns[i];
    if (parent_meta.is_key_column(cm.name)) continue;
    cm.name = std::string(parent) + "__" + cm.name;
    meta.columns.push_back(cm);
    cols.push_back(parent_table.column(i).take(parent_rows));
  }
  if (cols.empty()) {
    // Degenerate join with no attribute columns still carries the row count.
    return Table(std::move(meta), {});
  }
  return Table(std::move(meta), std::move(cols));
}

}  // namespace synthrel
