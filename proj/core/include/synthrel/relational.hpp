#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synthrel {

enum class SemType { Id, Categorical, Numerical, Boolean, Datetime };

std::string_view to_string(SemType type) noexcept;
/// Parses the metadata spelling ("id", "categorical", ...). Throws LoadError.
SemType parse_sem_type(std::string_view text);

/// Numerical and datetime columns share the numeric metric path.
inline bool is_continuous(SemType t) noexcept {
  return t == SemType::Numerical || t == SemType::Datetime;
}
/// Categorical and boolean columns share the frequency-table metric path.
inline bool is_discrete(SemType t) noexcept {
  return t == SemType::Categorical || t == SemType::Boolean;
}

struct ColumnMeta {
  std::string name;
  SemType sem_type = SemType::Numerical;
  std::optional<std::string> datetime_format;

  bool operator==(const ColumnMeta&) const = default;
};

struct ForeignKey {
  std::string column;
  std::string parent_table;
  std::string parent_key;

  bool operator==(const ForeignKey&) const = default;
};

struct TableMeta {
  std::string name;
  std::string primary_key;
  std::vector<ForeignKey> foreign_keys;
  std::vector<ColumnMeta> columns;

  const ColumnMeta* find_column(std::string_view column) const;
  std::optional<std::size_t> column_index(std::string_view column) const;
  /// True for the primary key, any foreign-key column, and any id-typed column.
  bool is_key_column(std::string_view column) const;

  bool operator==(const TableMeta&) const = default;
};

/// One parent/child link through a single foreign-key column.
struct Relationship {
  std::string parent;
  std::string child;
  std::string fk_column;

  bool operator==(const Relationship&) const = default;
};

struct Schema {
  std::vector<TableMeta> tables;

  const TableMeta* find(std::string_view table) const;
  const TableMeta& at(std::string_view table) const;

  /// Relationships whose parent is `parent`, in declaration order of the
  /// child tables and then of their foreign keys.
  std::vector<Relationship> children_of(std::string_view parent) const;
  std::vector<Relationship> relationships() const;
  /// Table names ordered so that every parent precedes its children.
  std::vector<std::string> topological_order() const;

  /// Throws LoadError on duplicate names, unknown parents, missing or
  /// non-id keys.
  void check() const;

  bool operator==(const Schema&) const = default;
};

/// A typed column with a null mask. Id and categorical values are stored as
/// text; numerical, boolean (0/1) and datetime (epoch seconds) as doubles.
class Column {
 public:
  Column() = default;

  static Column numeric(SemType type, std::vector<double> values, std::vector<std::uint8_t> valid);
  static Column numeric(SemType type, std::vector<std::optional<double>> values);
  static Column text(SemType type, std::vector<std::string> values, std::vector<std::uint8_t> valid);
  static Column text(SemType type, std::vector<std::optional<std::string>> values);

  SemType type() const noexcept { return type_; }
  bool holds_text() const noexcept { return type_ == SemType::Id || type_ == SemType::Categorical; }
  std::size_t size() const noexcept { return valid_.size(); }

  bool is_null(std::size_t row) const { return valid_[row] == 0; }
  std::size_t null_count() const;
  double number(std::size_t row) const { return numbers_[row]; }
  const std::string& text(std::size_t row) const { return texts_[row]; }

  std::span<const double> numbers() const noexcept { return numbers_; }
  std::span<const std::string> texts() const noexcept { return texts_; }
  std::span<const std::uint8_t> valid() const noexcept { return valid_; }

  /// Non-null numeric values in row order.
  std::vector<double> non_null_numbers() const;
  /// Category labels for discrete columns (booleans become "false"/"true"),
  /// with nulls mapped to the reserved missing category.
  std::vector<std::string> category_labels() const;

  /// Gathers rows; indices may repeat.
  Column take(std::span<const std::size_t> rows) const;
  /// Appends the rows of `other`, which must have the same type.
  void append(const Column& other);

  /// Null-aware equality: null cells compare equal regardless of payload.
  bool operator==(const Column& other) const;

 private:
  SemType type_ = SemType::Numerical;
  std::vector<double> numbers_;
  std::vector<std::string> texts_;
  std::vector<std::uint8_t> valid_;
};

/// Reserved category label for null categorical cells at metric time.
inline constexpr std::string_view kMissingCategory = "⟂missing";
/// Pooled label for categories beyond the encoding cap.
inline constexpr std::string_view kOtherCategory = "⟂other";

class Table {
 public:
  Table() = default;
  /// Columns must follow meta.columns order and share one length.
  Table(TableMeta meta, std::vector<Column> columns);

  const TableMeta& meta() const noexcept { return meta_; }
  const std::string& name() const noexcept { return meta_.name; }
  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }

  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const;
  bool has_column(std::string_view name) const { return meta_.column_index(name).has_value(); }
  std::span<const Column> columns() const noexcept { return columns_; }

  Table take(std::span<const std::size_t> rows) const;
  /// Keeps the named columns in the given order; key metadata is dropped for
  /// keys that are not selected.
  Table select(std::span<const std::string> names) const;
  /// Stacks rows of `other` below this table; schemas must match.
  Table concat(const Table& other) const;
  /// Same rows under a different table name.
  Table renamed(std::string name) const;

  bool operator==(const Table& other) const;

 private:
  void check_lengths() const;

  TableMeta meta_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Immutable after construction; share by const reference.
class Database {
 public:
  Database() = default;
  /// Tables are matched to schema entries by name; every schema table must be
  /// present and each Table's meta must equal its schema entry.
  Database(Schema schema, std::vector<Table> tables);

  const Schema& schema() const noexcept { return schema_; }
  std::span<const Table> tables() const noexcept { return tables_; }
  const Table& table(std::string_view name) const;
  bool has_table(std::string_view name) const { return schema_.find(name) != nullptr; }

  /// Copy with one table replaced (same meta required).
  Database with_table(Table table) const;

  bool operator==(const Database&) const = default;

 private:
  Schema schema_;
  std::vector<Table> tables_;  // schema order
};

/// Wraps a single table (keys dropped from foreign-key metadata) as a database.
Database single_table_database(Table table);

enum class ViolationKind { DuplicatePrimaryKey, NullPrimaryKey, DanglingForeignKey };

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string table;
  std::string column;
  std::string value;
  std::size_t row = 0;  // first offending row
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Primary keys unique and non-null, every non-null foreign key resolves.
ValidationReport validate(const Database& db);

/// Inner join of `child` with the attribute columns of `parent` through the
/// single foreign key linking them. Key columns are dropped and parent
/// attributes are renamed "<parent>__<column>".
Table denormalize(const Database& db, std::string_view parent, std::string_view child);

/// Index of each text key value in `keys` (first occurrence wins).
std::vector<std::optional<std::size_t>> resolve_keys(const Column& references, const Column& keys);

}  // namespace synthrel
