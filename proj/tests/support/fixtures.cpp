#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ghs/error.hpp"

namespace ghs::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return GHS_SOURCE_DIR; }

fs::path fixture_dir(const std::string& sub) { return source_dir() / "tests" / "fixtures" / sub; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<PageCase> load_page_cases() {
  std::vector<PageCase> cases;
  for (const auto& entry : fs::directory_iterator(fixture_dir("pages"))) {
    if (!entry.is_directory()) continue;
    PageCase c;
    c.name = entry.path().filename().string();
    c.dir = entry.path();
    c.expected = nlohmann::json::parse(read_file(c.dir / "expected.json"));
    if (fs::exists(c.dir / "fixture.json")) {
      auto f = nlohmann::json::parse(read_file(c.dir / "fixture.json"));
      for (const auto& p : f.value("primary_fails", nlohmann::json::array())) {
        c.primary_fails.insert(p.get<std::string>());
      }
      for (const auto& p : f.value("fallback_fails", nlohmann::json::array())) {
        c.fallback_fails.insert(p.get<std::string>());
      }
    }
    cases.push_back(std::move(c));
  }
  std::sort(cases.begin(), cases.end(),
            [](const PageCase& a, const PageCase& b) { return a.name < b.name; });
  return cases;
}

std::string CaseFetcher::fetch(const std::string& url) {
  auto slash = url.find('/');
  std::string name = url.substr(0, slash);
  std::string page = slash == std::string::npos ? "landing" : url.substr(slash + 1);
  fs::path dir = root_ / name;
  fs::path file = dir / (page + ".html");
  if (fallback_ && fs::exists(dir / "fallback" / (page + ".html"))) {
    file = dir / "fallback" / (page + ".html");
  }
  if (!fs::exists(file)) throw FetchError("no fixture page " + file.string());
  return read_file(file);
}

namespace {

std::set<std::string> urls_for(const std::string& name, const std::set<std::string>& pages) {
  std::set<std::string> out;
  for (const auto& p : pages) out.insert(p == "landing" ? name : name + "/" + p);
  return out;
}

}  // namespace

CaseOutcome run_page_case(const PageCase& c, const SelectorSpec& spec) {
  const fs::path root = c.dir.parent_path();
  CaseFetcher primary_pages(root, false);
  CaseFetcher fallback_pages(root, true);
  FailingFetcher primary(primary_pages, urls_for(c.name, c.primary_fails));
  FailingFetcher fallback(fallback_pages, urls_for(c.name, c.fallback_fails));
  PageExtractor extractor(spec, primary, &fallback);
  HtmlPageScraper scraper(extractor, "");
  ScrapeResult result = scraper.scrape(c.name);

  CaseOutcome out;
  out.actual = result.metrics.to_json();
  out.actual["page_error"] = result.page_error;
  out.fallback_invocations = extractor.fallback_invocations();
  out.primary_failures = extractor.primary_failures();
  return out;
}

SelectorSpec default_selectors() { return SelectorSpec::load(source_dir() / "config" / "selectors.json"); }

}  // namespace ghs::testing
