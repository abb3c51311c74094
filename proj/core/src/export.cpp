#include "ghs/export.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

namespace ghs {

namespace {

using nlohmann::json;

std::string cell(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return {};
        else if constexpr (std::is_same_v<T, Count>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, std::string>) return csv_escape(x);
        else if constexpr (std::is_same_v<T, Instant>) return format_instant(x);
        else return x ? "true" : "false";
      },
      v);
}

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ValidationError("csv", "unterminated quoted field");
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ExportFormat export_format_from(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw ValidationError("format", "expected csv or json");
}

std::string_view content_type(ExportFormat f) {
  return f == ExportFormat::Csv ? "text/csv; charset=utf-8" : "application/json";
}

std::string_view file_name(ExportFormat f) {
  return f == ExportFormat::Csv ? "repositories.csv" : "repositories.json";
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string{field};
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_header() {
  std::string out;
  for (const auto& info : columns()) {
    if (!out.empty()) out += ',';
    out += info.name;
  }
  return out + "\r\n";
}

std::string csv_row(const RepositoryRecord& r) {
  std::string out;
  bool first = true;
  for (const auto& info : columns()) {
    if (!first) out += ',';
    first = false;
    out += cell(get_field(r, info.column));
  }
  return out + "\r\n";
}

std::vector<RepositoryRecord> parse_csv_export(std::string_view text) {
  auto rows = split_csv(text);
  if (rows.empty()) throw ValidationError("csv", "missing header");
  const auto& header = rows.front();
  if (header.size() != kColumnCount) throw ValidationError("csv", "expected 25 columns");
  std::vector<ColumnInfo> layout;
  for (const auto& name : header) {
    auto c = column_by_name(name);
    if (!c) throw ValidationError("csv", "unknown column '" + name + "'");
    layout.push_back(column_info(*c));
  }
  std::vector<RepositoryRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != layout.size()) {
      throw ValidationError("csv", "row " + std::to_string(i) + " has " +
                                       std::to_string(row.size()) + " cells");
    }
    json raw = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string key{layout[c].name};
      const std::string& v = row[c];
      if (v.empty()) {
        raw[key] = nullptr;
        continue;
      }
      switch (layout[c].kind) {
        case ColumnKind::Count: {
          Count n = 0;
          auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
          if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ValidationError(key, "not an integer: '" + v + "'");
          }
          raw[key] = n;
          break;
        }
        case ColumnKind::Flag:
          if (v != "true" && v != "false") throw ValidationError(key, "expected true/false");
          raw[key] = v == "true";
          break;
        case ColumnKind::Text:
        case ColumnKind::Time:
          raw[key] = v;
          break;
      }
    }
    out.push_back(validate_record(raw));
  }
  return out;
}

std::vector<RepositoryRecord> parse_json_export(std::string_view text) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw ValidationError("json", "expected an array");
  std::vector<RepositoryRecord> out;
  for (const auto& item : doc) out.push_back(validate_record(item));
  return out;
}

Count write_export(const RepositoryStore& store, const RepoFilter& filter, SortSpec sort,
                   ExportFormat format, const std::function<void(std::string_view)>& sink,
                   Count ceiling) {
  const Count total = store.count(filter);
  if (total > ceiling) throw ExportTooLarge(total, ceiling);

  constexpr std::size_t kChunk = 64 * 1024;
  std::string buffer;
  buffer.reserve(kChunk + 4096);
  auto flush = [&] {
    if (!buffer.empty()) sink(buffer);
    buffer.clear();
  };

  Count rows = 0;
  buffer += format == ExportFormat::Csv ? csv_header() : "[";
  store.scan(filter, sort, [&](const RepositoryRecord& r) {
    if (format == ExportFormat::Csv) {
      buffer += csv_row(r);
    } else {
      buffer += rows == 0 ? "\n" : ",\n";
      buffer += record_to_json(r).dump();
    }
    ++rows;
    if (buffer.size() >= kChunk) flush();
    return true;
  });
  if (format == ExportFormat::Json) buffer += rows == 0 ? "]\n" : "\n]\n";
  flush();
  return rows;
}

}  // namespace ghs
