#include "ghs/query_service.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ghs/error.hpp"
#include "http_socket.hpp"

namespace ghs {

namespace {

using nlohmann::json;

const std::set<std::string>& flag_params() {
  static const std::set<std::string> kFlags{"excludeForks", "onlyWithLicense",
                                            "onlyWithOpenIssues", "excludeArchived"};
  return kFlags;
}

bool RepoFilter::*flag_member(const std::string& name) {
  if (name == "excludeForks") return &RepoFilter::exclude_forks;
  if (name == "onlyWithLicense") return &RepoFilter::only_with_license;
  if (name == "onlyWithOpenIssues") return &RepoFilter::only_with_open_issues;
  return &RepoFilter::exclude_archived;
}

Count parse_count_param(const std::string& name, const std::string& v) {
  Count n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError(name, "expected a non-negative integer, got '" + v + "'");
  }
  if (n < 0) throw ValidationError(name, "must not be negative");
  return n;
}

bool parse_flag_param(const std::string& name, const std::string& v) {
  if (v == "true" || v == "1" || v.empty()) return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(name, "expected true or false");
}

Instant parse_instant_param(const std::string& name, const std::string& v, bool upper) {
  bool date_only = false;
  auto t = parse_instant(v, date_only);
  if (!t) throw ValidationError(name, "expected an ISO-8601 date, got '" + v + "'");
  if (upper && date_only) return *t + std::chrono::days{1} - Seconds{1};
  return *t;
}

std::string render_instant_param(Instant t, bool upper) {
  if (!upper && is_midnight(t)) return format_date(t);
  if (upper && is_midnight(t + Seconds{1})) return format_date(t);
  return format_instant(t);
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ApiResponse error_response(const Error& e) {
  int status = 500;
  json errors = json::array();
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    status = dynamic_cast<const RangeError*>(&e) != nullptr ? 422 : 400;
    errors.push_back({{"field", v->field()}, {"message", e.what()}});
  } else if (dynamic_cast<const ExportTooLarge*>(&e) != nullptr) {
    status = 413;
    errors.push_back({{"field", "filter"}, {"message", e.what()}});
  } else {
    errors.push_back({{"field", nullptr}, {"message", e.what()}});
  }
  return json_response(status, {{"errors", errors}});
}

}  // namespace

RepoFilter parse_filter_params(const Params& params, const std::vector<std::string>& extra) {
  RepoFilter f;
  std::set<std::string> seen;
  for (const auto& [name, value] : params) {
    if (!seen.insert(name).second) throw ValidationError(name, "given more than once");
    if (std::find(extra.begin(), extra.end(), name) != extra.end()) continue;

    if (name == "nameContains") {
      if (!value.empty()) f.name_contains = value;
      continue;
    }
    if (name == "license") {
      if (!value.empty()) f.license_equals = value;
      continue;
    }
    if (name == "language") {
      if (!value.empty()) f.language_equals = value;
      continue;
    }
    if (flag_params().contains(name)) {
      f.*flag_member(name) = parse_flag_param(name, value);
      continue;
    }
    bool matched = false;
    for (const auto& field : count_filter_fields()) {
      const std::string base{field.param};
      if (name == base + "Min") {
        (f.*field.range).min = parse_count_param(name, value);
        matched = true;
      } else if (name == base + "Max") {
        (f.*field.range).max = parse_count_param(name, value);
        matched = true;
      }
    }
    for (const auto& field : instant_filter_fields()) {
      const std::string base{field.param};
      if (name == base + "Min") {
        (f.*field.range).min = parse_instant_param(name, value, false);
        matched = true;
      } else if (name == base + "Max") {
        (f.*field.range).max = parse_instant_param(name, value, true);
        matched = true;
      }
    }
    if (!matched) throw ValidationError(name, "unknown parameter");
  }
  check_filter(f);
  return f;
}

Params filter_to_params(const RepoFilter& f) {
  Params p;
  if (f.name_contains) p.emplace("nameContains", *f.name_contains);
  if (f.license_equals) p.emplace("license", *f.license_equals);
  if (f.language_equals) p.emplace("language", *f.language_equals);
  for (const auto& field : count_filter_fields()) {
    const CountRange& r = f.*field.range;
    const std::string base{field.param};
    if (r.min) p.emplace(base + "Min", std::to_string(*r.min));
    if (r.max) p.emplace(base + "Max", std::to_string(*r.max));
  }
  for (const auto& field : instant_filter_fields()) {
    const InstantRange& r = f.*field.range;
    const std::string base{field.param};
    if (r.min) p.emplace(base + "Min", render_instant_param(*r.min, false));
    if (r.max) p.emplace(base + "Max", render_instant_param(*r.max, true));
  }
  for (const auto& name : flag_params()) {
    if (f.*flag_member(name)) p.emplace(name, "true");
  }
  return p;
}

json filter_to_json(const RepoFilter& f) {
  json out = json::object();
  for (const auto& [name, value] : filter_to_params(f)) {
    if (flag_params().contains(name)) {
      out[name] = true;
    } else if (name.size() > 3 && (name.ends_with("Min") || name.ends_with("Max")) &&
               name.rfind("created", 0) != 0 && name.rfind("lastCommit", 0) != 0) {
      out[name] = std::stoll(value);
    } else {
      out[name] = value;
    }
  }
  return out;
}

SearchRequest parse_search_params(const Params& params, Count max_page_size) {
  SearchRequest req;
  req.filter = parse_filter_params(params, {"page", "size", "sort", "direction"});
  auto get = [&](const char* key) -> std::string {
    auto it = params.find(key);
    return it == params.end() ? std::string{} : it->second;
  };
  if (auto v = get("page"); !v.empty()) {
    req.page = parse_count_param("page", v);
    if (req.page < 1) throw ValidationError("page", "pages start at 1");
  }
  if (auto v = get("size"); !v.empty()) {
    req.size = parse_count_param("size", v);
    if (req.size < 1 || req.size > max_page_size) {
      throw ValidationError("size", "must be within [1, " + std::to_string(max_page_size) + "]");
    }
  }
  req.sort = parse_sort(get("sort"), get("direction"));
  return req;
}

QueryService::QueryService(const RepositoryStore& store, QueryServiceOptions options)
    : store_(store), options_(std::move(options)) {}

ApiResponse QueryService::repos(const Params& params) const {
  try {
    SearchRequest req = parse_search_params(params, options_.max_page_size);
    QueryResult result =
        store_.query(req.filter, PageRequest{(req.page - 1) * req.size, req.size}, req.sort);
    json items = json::array();
    for (const auto& r : result.rows) items.push_back(record_to_json(r));
    return json_response(
        200, {{"total", result.total},
              {"page", req.page},
              {"size", req.size},
              {"sort",
               {{"column", std::string{column_info(req.sort.column).name}},
                {"direction", req.sort.descending ? "desc" : "asc"}}},
              {"filter", filter_to_json(req.filter)},
              {"items", std::move(items)}});
  } catch (const ValidationError& e) {
    return error_response(e);
  } catch (const Error& e) {
    spdlog::error("/api/repos: {}", e.what());
    return error_response(e);
  }
}

ApiResponse QueryService::stats() const {
  try {
    StoreStats s = store_.stats();
    json languages = json::array();
    for (const auto& l : s.languages) {
      languages.push_back({{"language", l.language},
                           {"records", l.records},
                           {"lastPass", l.last_pass ? report_to_json(*l.last_pass) : json(nullptr)}});
    }
    return json_response(200, {{"total", s.total}, {"languages", std::move(languages)}});
  } catch (const Error& e) {
    spdlog::error("/api/stats: {}", e.what());
    return error_response(e);
  }
}

std::variant<ApiResponse, ExportPlan> QueryService::plan_export(const Params& params) const {
  try {
    ExportPlan plan;
    plan.filter = parse_filter_params(params, {"format", "sort", "direction"});
    auto format = params.find("format");
    plan.format = export_format_from(format == params.end() ? "csv" : format->second);
    auto get = [&](const char* key) -> std::string {
      auto it = params.find(key);
      return it == params.end() ? std::string{} : it->second;
    };
    plan.sort = parse_sort(get("sort"), get("direction"));
    const Count total = store_.count(plan.filter);
    if (total > options_.export_ceiling) throw ExportTooLarge(total, options_.export_ceiling);
    return plan;
  } catch (const Error& e) {
    return error_response(e);
  }
}

Count QueryService::run_export(const ExportPlan& plan,
                               const std::function<void(std::string_view)>& sink) const {
  return write_export(store_, plan.filter, plan.sort, plan.format, sink, options_.export_ceiling);
}

ApiResponse QueryService::export_all(const Params& params) const {
  auto planned = plan_export(params);
  if (auto* err = std::get_if<ApiResponse>(&planned)) return *err;
  const auto& plan = std::get<ExportPlan>(planned);
  ApiResponse r;
  r.content_type = std::string{content_type(plan.format)};
  r.headers.emplace_back("Content-Disposition",
                         "attachment; filename=\"" + std::string{file_name(plan.format)} + "\"");
  try {
    run_export(plan, [&](std::string_view chunk) { r.body.append(chunk); });
  } catch (const Error& e) {
    return error_response(e);
  }
  return r;
}

// --- HTTP front ------------------------------------------------------------

struct QueryServer::Impl {
  const QueryService& service;
  httplib::Server server;
  std::thread thread;
  explicit Impl(const QueryService& s) : service(s) {}
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  res.set_content(r.body, r.content_type);
}

}  // namespace

QueryServer::QueryServer(const QueryService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  detail::exclusive_listen(svr);
  const std::string origin = service.options().cors_origin;
  svr.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
    }
  });
  svr.Options(R"(/api/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  svr.Get("/api/repos", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, impl_->service.repos(req.params));
  });
  svr.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    send(res, impl_->service.stats());
  });
  svr.Get("/api/repos/export", [this](const httplib::Request& req, httplib::Response& res) {
    auto planned = impl_->service.plan_export(req.params);
    if (auto* err = std::get_if<ApiResponse>(&planned)) {
      send(res, *err);
      return;
    }
    auto plan = std::get<ExportPlan>(planned);
    res.set_header("Content-Disposition",
                   "attachment; filename=\"" + std::string{file_name(plan.format)} + "\"");
    const QueryService& service = impl_->service;
    res.set_chunked_content_provider(
        std::string{content_type(plan.format)},
        [&service, plan](std::size_t, httplib::DataSink& sink) {
          try {
            service.run_export(plan, [&](std::string_view chunk) {
              if (!sink.write(chunk.data(), chunk.size())) throw CancelledError();
            });
          } catch (const CancelledError&) {
            return false;
          } catch (const std::exception& e) {
            spdlog::error("export aborted: {}", e.what());
            return false;
          }
          sink.done();
          return true;
        });
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"errors", {{{"field", nullptr}, {"message", "not found"}}}}}.dump(),
                      "application/json");
    }
  });
}

QueryServer::~QueryServer() { stop(); }

int QueryServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void QueryServer::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->server.listen_after_bind();
}

void QueryServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ghs
