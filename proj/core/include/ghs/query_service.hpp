#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ghs/export.hpp"
#include "ghs/store.hpp"

namespace ghs {

using Params = std::multimap<std::string, std::string>;

// --- parameter grammar -----------------------------------------------------
//
//   nameContains, license, language
//   <field>Min / <field>Max   for commits, contributors, issues, pulls,
//                             branches, releases, stars, watchers, forks
//   createdMin / createdMax, lastCommitMin / lastCommitMax   (ISO-8601; a
//                             date-only max covers the whole day)
//   excludeForks, onlyWithLicense, onlyWithOpenIssues, excludeArchived
//   page (1-based), size, sort (column name), direction (asc|desc)

/// Throws ValidationError naming the offending parameter, RangeError for
/// min > max. Parameters outside the grammar (and `extra`) are rejected.
RepoFilter parse_filter_params(const Params& params, const std::vector<std::string>& extra = {});

/// Inverse of parse_filter_params; unset fields are omitted.
Params filter_to_params(const RepoFilter& filter);
nlohmann::json filter_to_json(const RepoFilter& filter);

struct SearchRequest {
  RepoFilter filter;
  SortSpec sort;
  Count page = 1;
  Count size = 100;
};

SearchRequest parse_search_params(const Params& params, Count max_page_size = 1000);

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct QueryServiceOptions {
  std::string cors_origin = "*";
  Count export_ceiling = kExportCeiling;
  Count max_page_size = 1000;
};

struct ExportPlan {
  RepoFilter filter;
  SortSpec sort;
  ExportFormat format = ExportFormat::Csv;
};

/// Read-only handlers over a store, independent of the HTTP server so they
/// can be exercised directly.
class QueryService {
 public:
  explicit QueryService(const RepositoryStore& store, QueryServiceOptions options = {});

  /// GET /api/repos
  ApiResponse repos(const Params& params) const;
  /// GET /api/stats
  ApiResponse stats() const;

  /// Validates an export request: either an error response or a plan.
  std::variant<ApiResponse, ExportPlan> plan_export(const Params& params) const;
  Count run_export(const ExportPlan& plan,
                   const std::function<void(std::string_view)>& sink) const;
  /// plan_export + run_export buffered into one response.
  ApiResponse export_all(const Params& params) const;

  const QueryServiceOptions& options() const { return options_; }

 private:
  const RepositoryStore& store_;
  QueryServiceOptions options_;
};

/// HTTP front: /api/repos, /api/repos/export (streamed), /api/stats, with
/// CORS headers on every response.
class QueryServer {
 public:
  explicit QueryServer(const QueryService& service);
  ~QueryServer();

  QueryServer(const QueryServer&) = delete;
  QueryServer& operator=(const QueryServer&) = delete;

  /// Port 0 picks a free port. Throws Error when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks until stop(). Throws Error when binding fails.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ghs
