#include "synthrel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>

#include "synthrel/error.hpp"

namespace synthrel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<double> parse_boolean(std::string_view text) {
  text = trim(text);
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "t" || lower == "yes" || lower == "y" || lower == "1" || lower == "1.0") return 1.0;
  if (lower == "false" || lower == "f" || lower == "no" || lower == "n" || lower == "0" || lower == "0.0") return 0.0;
  return std::nullopt;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::optional<double> parse_with_format(std::string_view text, const char* format) {
  std::string s(text);
  std::tm tm{};
  const char* end = strptime(s.c_str(), format, &tm);
  if (end == nullptr) return std::nullopt;
  while (*end == ' ') ++end;
  if (*end != '\0') return std::nullopt;
  return static_cast<double>(timegm(&tm));
}

}  // namespace

std::optional<double> parse_datetime(std::string_view text, const std::optional<std::string>& format) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (format && !format->empty()) return parse_with_format(text, format->c_str());
  for (const char* f : {"%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d"})
    if (auto v = parse_with_format(text, f)) return v;
  return std::nullopt;
}

std::string format_datetime(double epoch_seconds, const std::optional<std::string>& format) {
  const auto t = static_cast<std::time_t>(std::floor(epoch_seconds));
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::string fmt;
  if (format && !format->empty()) {
    fmt = *format;
  } else {
    fmt = (tm.tm_hour == 0 && tm.tm_min == 0 && tm.tm_sec == 0) ? "%Y-%m-%d" : "%Y-%m-%d %H:%M:%S";
  }
  char buf[128];
  std::size_t n = std::strftime(buf, sizeof buf, fmt.c_str(), &tm);
  return std::string(buf, n);
}

// ---------------------------------------------------------------------------
// Metadata

Schema schema_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_object())
    throw LoadError("metadata must be an object with a 'tables' object");
  Schema schema;
  for (const auto& [name, t] : doc["tables"].items()) {
    TableMeta meta;
    meta.name = name;
    if (!t.contains("primary_key")) throw LoadError("primary-key column absent in table '" + name + "'");
    if (!t["primary_key"].is_string())
      throw LoadError("table '" + name + "': composite keys are not supported");
    meta.primary_key = t["primary_key"].get<std::string>();
    if (!t.contains("columns") || !t["columns"].is_object())
      throw LoadError("table '" + name + "' has no 'columns' object");
    for (const auto& [col, c] : t["columns"].items()) {
      ColumnMeta cm;
      cm.name = col;
      cm.sem_type = parse_sem_type(c.value("sdtype", std::string{}));
      if (c.contains("datetime_format") && c["datetime_format"].is_string())
        cm.datetime_format = c["datetime_format"].get<std::string>();
      meta.columns.push_back(std::move(cm));
    }
    if (t.contains("foreign_keys")) {
      for (const auto& fk : t["foreign_keys"]) {
        if (!fk["column"].is_string() || !fk["parent_key"].is_string())
          throw LoadError("table '" + name + "': composite keys are not supported");
        meta.foreign_keys.push_back(
            {fk["column"].get<std::string>(), fk["parent_table"].get<std::string>(), fk["parent_key"].get<std::string>()});
      }
    }
    schema.tables.push_back(std::move(meta));
  }
  // SDV-style top-level relationships are folded into the child tables.
  if (doc.contains("relationships")) {
    for (const auto& rel : doc["relationships"]) {
      auto child = rel.at("child_table_name").get<std::string>();
      auto it = std::find_if(schema.tables.begin(), schema.tables.end(),
                             [&](const TableMeta& m) { return m.name == child; });
      if (it == schema.tables.end()) throw LoadError("relationship references unknown table '" + child + "'");
      if (!rel.at("child_foreign_key").is_string()) throw LoadError("composite keys are not supported");
      ForeignKey fk{rel.at("child_foreign_key").get<std::string>(), rel.at("parent_table_name").get<std::string>(),
                    rel.at("parent_primary_key").get<std::string>()};
      if (std::find(it->foreign_keys.begin(), it->foreign_keys.end(), fk) == it->foreign_keys.end())
        it->foreign_keys.push_back(std::move(fk));
    }
  }
  schema.check();
  return schema;
}

nlohmann::ordered_json schema_to_json(const Schema& schema) {
  nlohmann::ordered_json tables = nlohmann::ordered_json::object();
  for (const auto& t : schema.tables) {
    nlohmann::ordered_json columns = nlohmann::ordered_json::object();
    for (const auto& c : t.columns) {
      nlohmann::ordered_json cj;
      cj["sdtype"] = std::string(to_string(c.sem_type));
      if (c.datetime_format) cj["datetime_format"] = *c.datetime_format;
      columns[c.name] = std::move(cj);
    }
    nlohmann::ordered_json fks = nlohmann::ordered_json::array();
    for (const auto& fk : t.foreign_keys)
      fks.push_back({{"column", fk.column}, {"parent_table", fk.parent_table}, {"parent_key", fk.parent_key}});
    tables[t.name] = {{"primary_key", t.primary_key}, {"columns", std::move(columns)}, {"foreign_keys", std::move(fks)}};
  }
  return {{"tables", std::move(tables)}};
}

Schema read_schema(const std::filesystem::path& metadata_path) {
  std::ifstream in(metadata_path);
  if (!in) throw LoadError("cannot open metadata '" + metadata_path.string() + "'");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("metadata '" + metadata_path.string() + "' does not parse: " + e.what());
  }
  return schema_from_json(doc);
}

// ---------------------------------------------------------------------------
// Tables

Table table_from_csv(const TableMeta& meta, const CsvDocument& doc) {
  std::vector<Column> columns;
  columns.reserve(meta.columns.size());
  const std::size_t n = doc.rows.size();
  for (const auto& cm : meta.columns) {
    auto it = std::find(doc.header.begin(), doc.header.end(), cm.name);
    if (it == doc.header.end()) throw LoadError("table '" + meta.name + "': column '" + cm.name + "' missing from file");
    const auto idx = static_cast<std::size_t>(it - doc.header.begin());
    std::vector<std::uint8_t> valid(n, 0);
    if (cm.sem_type == SemType::Id || cm.sem_type == SemType::Categorical) {
      std::vector<std::string> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = doc.rows[r][idx];
        if (cell.empty()) continue;
        values[r] = cell;
        valid[r] = 1;
      }
      columns.push_back(Column::text(cm.sem_type, std::move(values), std::move(valid)));
    } else {
      std::vector<double> values(n, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& cell = doc.rows[r][idx];
        std::optional<double> v;
        switch (cm.sem_type) {
          case SemType::Numerical: v = parse_number(cell); break;
          case SemType::Boolean: v = parse_boolean(cell); break;
          case SemType::Datetime: v = parse_datetime(cell, cm.datetime_format); break;
          default: break;
        }
        if (v) {
          values[r] = *v;
          valid[r] = 1;
        }
      }
      columns.push_back(Column::numeric(cm.sem_type, std::move(values), std::move(valid)));
    }
  }
  return Table(meta, std::move(columns));
}

CsvDocument table_to_csv(const Table& table) {
  CsvDocument doc;
  const auto& meta = table.meta();
  for (const auto& c : meta.columns) doc.header.push_back(c.name);
  doc.rows.assign(table.row_count(), std::vector<std::string>(meta.columns.size()));
  for (std::size_t j = 0; j < meta.columns.size(); ++j) {
    const auto& col = table.column(j);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (col.is_null(r)) continue;
      auto& cell = doc.rows[r][j];
      switch (col.type()) {
        case SemType::Id:
        case SemType::Categorical: cell = col.text(r); break;
        case SemType::Numerical: cell = format_number(col.number(r)); break;
        case SemType::Boolean: cell = col.number(r) != 0.0 ? "true" : "false"; break;
        case SemType::Datetime: cell = format_datetime(col.number(r), meta.columns[j].datetime_format); break;
      }
    }
  }
  return doc;
}

Database load_database(const Schema& schema, const std::filesystem::path& data_dir) {
  std::vector<Table> tables;
  for (const auto& meta : schema.tables) {
    auto path = data_dir / (meta.name + ".csv");
    if (!std::filesystem::exists(path))
      throw LoadError("missing table '" + meta.name + "': no file " + path.string());
    tables.push_back(table_from_csv(meta, read_csv(path)));
  }
  return Database(schema, std::move(tables));
}

Database load_database(const std::filesystem::path& metadata_path, const std::filesystem::path& data_dir) {
  return load_database(read_schema(metadata_path), data_dir);
}

void save_database(const Database& db, const std::filesystem::path& metadata_path,
                   const std::filesystem::path& data_dir) {
  std::filesystem::create_directories(data_dir);
  if (!metadata_path.empty()) {
    std::ofstream out(metadata_path);
    if (!out) throw Error("cannot write '" + metadata_path.string() + "'");
    out << schema_to_json(db.schema()).dump(2) << '\n';
  }
  for (const auto& t : db.tables()) write_csv(data_dir / (t.name() + ".csv"), table_to_csv(t));
}

}  // namespace synthrel
