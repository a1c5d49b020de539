#include <fstream>
#include <sstream>

#include "synthrel/error.hpp"
#include "synthrel/io.hpp"

namespace synthrel {

namespace {

bool needs_quoting(std::string_view cell) {
  return cell.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_cell(std::string& out, std::string_view cell) {
  if (!needs_quoting(cell)) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

CsvDocument parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool any = false;  // current record has content

  auto end_record = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    records.push_back(std::move(record));
    record.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(cell));
        cell.clear();
        any = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        cell += c;
        any = true;
    }
  }
  if (in_quotes) throw LoadError("unterminated quoted field in CSV");
  if (any || !cell.empty() || !record.empty()) end_record();

  CsvDocument doc;
  if (records.empty()) return doc;
  doc.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& row = records[r];
    // A blank line inside the body is a single empty cell; skip it for
    // multi-column files.
    if (row.size() == 1 && row.front().empty() && doc.header.size() > 1) continue;
    if (row.size() != doc.header.size())
      throw LoadError("CSV row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(doc.header.size()));
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string format_csv(const CsvDocument& doc) {
  std::string out;
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_cell(out, row[i]);
    }
    // A single empty cell would read back as a blank line.
    if (row.size() == 1 && row.front().empty()) out += "\"\"";
    out += '\n';
  };
  write_row(doc.header);
  for (const auto& row : doc.rows) write_row(row);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_csv(doc);
}

}  // namespace synthrel
