#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ghs/domain.hpp"
#include "ghs/error.hpp"
#include "ghs/store.hpp"

namespace ghs {

enum class ExportFormat { Csv, Json };

/// Throws ValidationError("format") for anything but csv/json.
ExportFormat export_format_from(std::string_view name);
std::string_view content_type(ExportFormat f);
std::string_view file_name(ExportFormat f);

inline constexpr Count kExportCeiling = 1'000'000;

/// Quotes fields containing commas, quotes, CR or LF; quotes are doubled.
std::string csv_escape(std::string_view field);

/// The 25 column names, CRLF-terminated.
std::string csv_header();
/// Absent → empty cell; instants as YYYY-MM-DDTHH:MM:SSZ; flags true/false.
std::string csv_row(const RepositoryRecord& r);

/// Parses an export back into records. Throws ValidationError.
std::vector<RepositoryRecord> parse_csv_export(std::string_view text);
std::vector<RepositoryRecord> parse_json_export(std::string_view text);

/// Writes every match of `filter` in `sort` order, chunk by chunk. Throws
/// ExportTooLarge when the match count exceeds `ceiling`. Returns rows written.
Count write_export(const RepositoryStore& store, const RepoFilter& filter, SortSpec sort,
                   ExportFormat format, const std::function<void(std::string_view)>& sink,
                   Count ceiling = kExportCeiling);

class ExportTooLarge : public Error {
 public:
  ExportTooLarge(Count rows, Count ceiling)
      : Error(std::to_string(rows) + " rows exceed the export ceiling of " +
              std::to_string(ceiling)),
        rows_(rows) {}
  Count rows() const noexcept { return rows_; }

 private:
  Count rows_;
};

}  // namespace ghs
