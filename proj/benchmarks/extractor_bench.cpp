#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ghs/html.hpp"
#include "ghs/page_extractor.hpp"

using namespace ghs;

namespace {

const std::filesystem::path kSource{GHS_SOURCE_DIR};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string& landing() {
  static const std::string page = slurp(kSource / "tests/fixtures/pages/basic/landing.html");
  return page;
}

const SelectorSpec& selectors() {
  static const SelectorSpec spec = SelectorSpec::load(kSource / "config/selectors.json");
  return spec;
}

void BM_ParseLanding(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(html::Document::parse(landing()));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(landing().size()));
}

void BM_ExtractLanding(benchmark::State& state) {
  auto doc = html::Document::parse(landing());
  for (auto _ : state) benchmark::DoNotOptimize(extract_page(doc, PageKind::Landing, selectors(), Provenance::Primary));
}

}  // namespace

BENCHMARK(BM_ParseLanding);
BENCHMARK(BM_ExtractLanding);

BENCHMARK_MAIN();
