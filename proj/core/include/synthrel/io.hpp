#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthrel/relational.hpp"

namespace synthrel {

/// Minimal RFC-4180 document: header plus rows of raw cells.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvDocument parse_csv(std::string_view text);
CsvDocument read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvDocument& doc);
void write_csv(const std::filesystem::path& path, const CsvDocument& doc);

Schema schema_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json schema_to_json(const Schema& schema);
Schema read_schema(const std::filesystem::path& metadata_path);

/// Parses a datetime cell; returns epoch seconds or nullopt. An empty format
/// tries ISO-8601 date and date-time layouts.
std::optional<double> parse_datetime(std::string_view text, const std::optional<std::string>& format);
std::string format_datetime(double epoch_seconds, const std::optional<std::string>& format);

/// Converts a CSV document into a typed table; uncoercible cells become null.
Table table_from_csv(const TableMeta& meta, const CsvDocument& doc);
CsvDocument table_to_csv(const Table& table);

/// Loads `<data_dir>/<table>.csv` for every table of the metadata document.
Database load_database(const std::filesystem::path& metadata_path, const std::filesystem::path& data_dir);
Database load_database(const Schema& schema, const std::filesystem::path& data_dir);

/// Writes the metadata document (if the path is non-empty) and one CSV per table.
void save_database(const Database& db, const std::filesystem::path& metadata_path,
                   const std::filesystem::path& data_dir);

}  // namespace synthrel
