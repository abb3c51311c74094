#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "ghs/forge.hpp"
#include "ghs/page_extractor.hpp"

namespace ghs {

struct HttpForgeOptions {
  /// Send ranges in the real forge's inclusive form (see to_inclusive_query).
  bool inclusive_upper_bound = true;
  std::chrono::seconds timeout{30};
  std::string user_agent = "ghs-miner";
};

/// ForgeBackend over the search REST endpoint
/// (`GET <base>/search/repositories?q=...&per_page=..&page=..`).
/// Counting asks for a single-item page and reads total_count.
class HttpForgeBackend final : public ForgeBackend {
 public:
  explicit HttpForgeBackend(std::string base_url, HttpForgeOptions options = {});
  ~HttpForgeBackend() override;

  CountResult count(const std::string& query, const std::string& credential) override;
  SearchPage page(const std::string& query, int index, const std::string& credential) override;

  /// Query string as sent on the wire (after upper-bound rewriting).
  std::string wire_query(const std::string& query) const;

 private:
  struct Impl;
  SearchPage get(const std::string& query, int per_page, int index, const std::string& credential);

  std::unique_ptr<Impl> impl_;
  HttpForgeOptions options_;
};

/// Serves any ForgeBackend over HTTP in the real forge's wire shape:
/// JSON pages, X-RateLimit-* headers, 401/403/422/502 error statuses.
/// With `inclusive_ranges` incoming ranges are read the way the real forge
/// reads them.
class ForgeHttpServer {
 public:
  explicit ForgeHttpServer(ForgeBackend& backend, bool inclusive_ranges = true);
  ~ForgeHttpServer();

  ForgeHttpServer(const ForgeHttpServer&) = delete;
  ForgeHttpServer& operator=(const ForgeHttpServer&) = delete;

  /// Binds (port 0 picks a free one) and serves on a background thread.
  /// Returns the bound port; throws Error when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct HttpFetchOptions {
  std::chrono::seconds timeout{20};
  int attempts = 1;
  std::string user_agent = "ghs-miner";
};

/// Plain GET of absolute http(s) URLs; non-2xx and transport errors
/// become FetchError.
class HttpDocumentFetcher final : public DocumentFetcher {
 public:
  explicit HttpDocumentFetcher(HttpFetchOptions options = {}) : options_(std::move(options)) {}
  std::string fetch(const std::string& url) override;

 private:
  HttpFetchOptions options_;
};

}  // namespace ghs
