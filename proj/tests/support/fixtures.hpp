#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghs/page_extractor.hpp"

namespace ghs::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture_dir(const std::string& sub);
std::string read_file(const std::filesystem::path& path);

struct PageCase {
  std::string name;
  std::filesystem::path dir;
  nlohmann::json expected;
  std::set<std::string> primary_fails;   // landing / issues / pulls
  std::set<std::string> fallback_fails;
};

std::vector<PageCase> load_page_cases();

/// Maps "<case>", "<case>/issues", "<case>/pulls" to the case's HTML files.
/// The fallback flavour prefers `fallback/<page>.html` when present.
class CaseFetcher final : public DocumentFetcher {
 public:
  CaseFetcher(std::filesystem::path root, bool fallback) : root_(std::move(root)), fallback_(fallback) {}
  std::string fetch(const std::string& url) override;

 private:
  std::filesystem::path root_;
  bool fallback_;
};

struct CaseOutcome {
  nlohmann::json actual;
  std::uint64_t fallback_invocations = 0;
  std::uint64_t primary_failures = 0;
};

CaseOutcome run_page_case(const PageCase& c, const SelectorSpec& spec);

SelectorSpec default_selectors();

}  // namespace ghs::testing
