#include "ghs/http_forge.hpp"

#include <cctype>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ghs/error.hpp"
#include "http_socket.hpp"

namespace ghs {

namespace {

using nlohmann::json;

std::string url_param(std::string_view q) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : q) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == ':' || c == '+' || c == '%' || c == '.' || c == '-' || c == '_') {
      out += c;
    } else {
      out += '%';
      out += kHex[u >> 4];
      out += kHex[u & 0xf];
    }
  }
  return out;
}

std::optional<std::int64_t> header_int(const httplib::Headers& headers, const char* name) {
  auto it = headers.find(name);
  if (it == headers.end()) return std::nullopt;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<RateHeaders> read_rate(const httplib::Headers& headers) {
  auto limit = header_int(headers, "X-RateLimit-Limit");
  auto remaining = header_int(headers, "X-RateLimit-Remaining");
  auto reset = header_int(headers, "X-RateLimit-Reset");
  if (!limit || !remaining || !reset) return std::nullopt;
  return RateHeaders{*limit, *remaining, TimePoint{std::chrono::seconds{*reset}}};
}

std::string body_message(const std::string& body) {
  auto doc = json::parse(body, nullptr, false);
  if (doc.is_object() && doc.contains("message") && doc["message"].is_string()) {
    return doc["message"].get<std::string>();
  }
  return body.substr(0, 200);
}

std::string strip_credential(const std::string& header) {
  for (const char* prefix : {"token ", "Bearer ", "bearer "}) {
    std::string p{prefix};
    if (header.rfind(p, 0) == 0) return header.substr(p.size());
  }
  return header;
}

void put_rate(httplib::Response& res, const RateHeaders& h) {
  res.set_header("X-RateLimit-Limit", std::to_string(h.limit));
  res.set_header("X-RateLimit-Remaining", std::to_string(h.remaining));
  auto reset = std::chrono::ceil<std::chrono::seconds>(h.reset.time_since_epoch()).count();
  res.set_header("X-RateLimit-Reset", std::to_string(reset));
  res.set_header("X-RateLimit-Resource", "search");
}

void put_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"message", message}}.dump(), "application/json");
}

}  // namespace

// --- client adapter --------------------------------------------------------

struct HttpForgeBackend::Impl {
  explicit Impl(const std::string& base) : client(base) {}
  httplib::Client client;
  std::mutex mutex;
};

HttpForgeBackend::HttpForgeBackend(std::string base_url, HttpForgeOptions options)
    : impl_(std::make_unique<Impl>(base_url)), options_(std::move(options)) {
  if (!impl_->client.is_valid()) throw UsageError("invalid forge URL '" + base_url + "'");
  impl_->client.set_connection_timeout(options_.timeout);
  impl_->client.set_read_timeout(options_.timeout);
  impl_->client.set_keep_alive(true);
}

HttpForgeBackend::~HttpForgeBackend() = default;

std::string HttpForgeBackend::wire_query(const std::string& query) const {
  return options_.inclusive_upper_bound ? to_inclusive_query(query) : query;
}

SearchPage HttpForgeBackend::get(const std::string& query, int per_page, int index,
                                 const std::string& credential) {
  std::string path = "/search/repositories?q=" + url_param(wire_query(query)) +
                     "&per_page=" + std::to_string(per_page) + "&page=" + std::to_string(index);
  httplib::Headers headers{{"Accept", "application/vnd.github+json"},
                           {"User-Agent", options_.user_agent}};
  if (!credential.empty()) headers.emplace("Authorization", "token " + credential);

  httplib::Result res;
  {
    std::lock_guard lock(impl_->mutex);
    res = impl_->client.Get(path, headers);
  }
  if (!res) throw TransientError("search request failed: " + httplib::to_string(res.error()));

  const int status = res->status;
  auto rate = read_rate(res->headers);
  if (status == 200) {
    auto doc = json::parse(res->body, nullptr, false);
    if (!doc.is_object() || !doc.contains("total_count")) {
      throw TransientError("malformed search response");
    }
    SearchPage out;
    out.total_count = doc["total_count"].get<Count>();
    out.page_index = index;
    out.rate = rate;
    for (const auto& item : doc.value("items", json::array())) {
      out.items.push_back(summary_from_wire(item));
    }
    return out;
  }
  const std::string message = body_message(res->body);
  if (status == 401) throw AuthError(message);
  if (status == 403 || status == 429) {
    bool exhausted = rate && rate->remaining == 0;
    auto retry_after = header_int(res->headers, "Retry-After");
    if (exhausted || retry_after || status == 429) {
      std::optional<TimePoint> at;
      if (rate) at = rate->reset;
      if (retry_after) at = std::chrono::time_point_cast<std::chrono::milliseconds>(
                            std::chrono::system_clock::now()) + std::chrono::seconds{*retry_after};
      throw RateLimitedError(at, message);
    }
    throw AuthError(message);
  }
  if (status == 422) {
    if (message.find("1000") != std::string::npos) throw CapViolation(message);
    throw MalformedQuery(message);
  }
  if (status >= 500) throw TransientError("forge returned " + std::to_string(status));
  throw TransientError("unexpected status " + std::to_string(status) + ": " + message);
}

CountResult HttpForgeBackend::count(const std::string& query, const std::string& credential) {
  SearchPage p = get(query, 1, 1, credential);
  return CountResult{p.total_count, p.rate};
}

SearchPage HttpForgeBackend::page(const std::string& query, int index,
                                  const std::string& credential) {
  return get(query, kPageSize, index, credential);
}

// --- server mount ----------------------------------------------------------

struct ForgeHttpServer::Impl {
  ForgeBackend& backend;
  bool inclusive_ranges;
  httplib::Server server;
  std::thread thread;
  Impl(ForgeBackend& b, bool inclusive) : backend(b), inclusive_ranges(inclusive) {}
};

ForgeHttpServer::ForgeHttpServer(ForgeBackend& backend, bool inclusive_ranges)
    : impl_(std::make_unique<Impl>(backend, inclusive_ranges)) {
  detail::exclusive_listen(impl_->server);
  impl_->server.Get("/search/repositories", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    std::string q = req.get_param_value("q");
    int per_page = kPageSize;
    int index = 1;
    try {
      if (req.has_param("per_page")) per_page = std::stoi(req.get_param_value("per_page"));
      if (req.has_param("page")) index = std::stoi(req.get_param_value("page"));
    } catch (const std::exception&) {
      put_error(res, 422, "per_page and page must be integers");
      return;
    }
    const std::string credential = strip_credential(req.get_header_value("Authorization"));
    try {
      if (impl_->inclusive_ranges) q = from_inclusive_query(q);
      json body;
      RateHeaders rate{};
      bool have_rate = false;
      if (per_page == 1 && index == 1) {
        CountResult c = impl_->backend.count(q, credential);
        body = {{"total_count", c.total_count},
                {"incomplete_results", false},
                {"items", json::array()}};
        if (c.rate) rate = *c.rate, have_rate = true;
      } else {
        SearchPage p = impl_->backend.page(q, index, credential);
        json items = json::array();
        for (const auto& s : p.items) items.push_back(summary_to_wire(s));
        body = {{"total_count", p.total_count},
                {"incomplete_results", false},
                {"items", std::move(items)}};
        if (p.rate) rate = *p.rate, have_rate = true;
      }
      if (have_rate) put_rate(res, rate);
      res.set_content(body.dump(), "application/json");
    } catch (const RateLimitedError& e) {
      RateHeaders h{0, 0, e.retry_at().value_or(TimePoint{})};
      put_rate(res, h);
      put_error(res, 403, e.what());
    } catch (const AuthError& e) {
      put_error(res, 401, e.what());
    } catch (const CapViolation& e) {
      put_error(res, 422, e.what());
    } catch (const MalformedQuery& e) {
      put_error(res, 422, std::string{"Validation Failed: "} + e.what());
    } catch (const TransientError& e) {
      put_error(res, 502, e.what());
    }
  });
}

ForgeHttpServer::~ForgeHttpServer() { stop(); }

int ForgeHttpServer::start(const std::string& host, int port) {
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

void ForgeHttpServer::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->server.listen_after_bind();
}

void ForgeHttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

// --- document fetcher ------------------------------------------------------

std::string HttpDocumentFetcher::fetch(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw FetchError("not an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) throw FetchError("unsupported URL: " + url);
  client.set_follow_location(true);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  httplib::Headers headers{{"User-Agent", options_.user_agent}, {"Accept", "text/html"}};

  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, options_.attempts); ++attempt) {
    auto res = client.Get(path, headers);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_error = "status " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  throw FetchError(url + ": " + last_error);
}

}  // namespace ghs
