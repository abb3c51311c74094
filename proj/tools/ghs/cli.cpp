#include "cli.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ghs/clock.hpp"
#include "ghs/config.hpp"
#include "ghs/error.hpp"
#include "ghs/export.hpp"
#include "ghs/forge_client.hpp"
#include "ghs/http_forge.hpp"
#include "ghs/orchestrator.hpp"
#include "ghs/query_service.hpp"
#include "ghs/rate_governor.hpp"
#include "ghs/scheduler.hpp"
#include "ghs/store.hpp"
#include "ghs/synthetic_forge.hpp"

namespace ghs {

namespace {

std::atomic<bool> g_shutdown{false};

struct GlobalOptions {
  std::string config_path;
  std::string log_level = "info";
};

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::size_t size = 10000;
  std::string distribution = "uniform";
  std::string languages;
  std::string start = "2012-01-01";
  std::string end = "2024-01-01";
  double qualifying = 0.8;
  double forks = 0.1;
  int bursts = 6;
};

void add_synthetic_options(CLI::App* cmd, SyntheticOptions& o) {
  cmd->add_option("--synthetic-seed", o.seed, "Population seed");
  cmd->add_option("--synthetic-size", o.size, "Number of generated repositories");
  cmd->add_option("--synthetic-distribution", o.distribution, "uniform, bursty or single")
      ->check(CLI::IsMember({"uniform", "bursty", "single"}));
  cmd->add_option("--synthetic-languages", o.languages,
                  "Comma-separated languages, optionally weighted (Java:2,Python:1)");
  cmd->add_option("--synthetic-start", o.start, "Earliest creation date");
  cmd->add_option("--synthetic-end", o.end, "Latest creation date");
  cmd->add_option("--synthetic-qualifying", o.qualifying, "Share of repos with >= 10 stars")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--synthetic-forks", o.forks, "Share of forks")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--synthetic-bursts", o.bursts, "Cluster count for bursty populations")
      ->check(CLI::PositiveNumber);
}

Instant parse_instant_flag(const std::string& flag, const std::string& text) {
  auto t = parse_instant(text);
  if (!t) throw UsageError(flag + ": expected an ISO-8601 date or timestamp, got '" + text + "'");
  return *t;
}

PopulationParams population_params(const SyntheticOptions& o,
                                   const std::vector<std::string>& fallback_languages) {
  PopulationParams p;
  p.size = o.size;
  p.distribution = time_distribution_from(o.distribution);
  p.start = parse_instant_flag("--synthetic-start", o.start);
  p.end = parse_instant_flag("--synthetic-end", o.end);
  p.qualifying_fraction = o.qualifying;
  p.fork_fraction = o.forks;
  p.bursts = o.bursts;
  p.languages.clear();
  if (o.languages.empty()) {
    for (const auto& l : fallback_languages) p.languages.emplace_back(l, 1.0);
  } else {
    std::string item;
    std::istringstream in(o.languages);
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      double weight = 1.0;
      auto colon = item.rfind(':');
      if (colon != std::string::npos) {
        try {
          weight = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
          throw UsageError("--synthetic-languages: bad weight in '" + item + "'");
        }
        item = item.substr(0, colon);
      }
      p.languages.emplace_back(item, weight);
    }
  }
  p.validate();
  return p;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string{v};
}

AppConfig load_config(const GlobalOptions& g) {
  std::string path = g.config_path;
  if (path.empty()) path = env("GHS_CONFIG").value_or("");
  if (path.empty()) return AppConfig{};
  return AppConfig::load(path);
}

std::string resolve_store(const std::string& flag, const AppConfig& config) {
  if (!flag.empty()) return flag;
  if (auto e = env("GHS_STORE")) return *e;
  if (config.store) return *config.store;
  return "ghs.db";
}

LanguageConfig resolve_languages(const AppConfig& config) {
  if (config.languages.empty()) return LanguageConfig::defaults();
  return LanguageConfig(config.languages);
}

std::string owner_id() {
  char host[256] = {0};
  gethostname(host, sizeof(host) - 1);
  return std::string{host} + ":" + std::to_string(getpid());
}

/// Polls the shutdown flag and runs `on_stop` once it is raised.
class ShutdownWatcher {
 public:
  explicit ShutdownWatcher(std::function<void()> on_stop)
      : thread_([this, on_stop = std::move(on_stop)](std::stop_token st) {
          while (!st.stop_requested()) {
            if (g_shutdown.load()) {
              on_stop();
              return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds{100});
          }
        }) {}

 private:
  std::jthread thread_;
};

// --- mine ------------------------------------------------------------------

struct MineOptions {
  std::string language;
  bool once = false;
  bool loop = false;
  std::string backend = "real";
  std::string store;
  std::string now;
  std::string selectors;
  std::string forge_url;
  std::string web_url;
  int workers = 8;
  double period_hours = 6.0;
  int cycles = 0;
  SyntheticOptions synthetic;
};

int cmd_mine(const GlobalOptions& g, const MineOptions& o, std::ostream& out, std::ostream& err) {
  AppConfig config = load_config(g);
  LanguageConfig languages = resolve_languages(config);
  if (o.once && o.loop) throw UsageError("--once and --loop are mutually exclusive");
  const bool loop = o.loop;
  if (!loop && o.language.empty()) throw UsageError("--language is required with --once");
  if (!o.language.empty() && !languages.contains(o.language)) {
    throw UsageError("unknown language '" + o.language + "'");
  }
  if (o.workers < 1) throw UsageError("--workers must be positive");

  std::unique_ptr<Clock> clock;
  std::unique_ptr<ForgeBackend> backend;
  std::unique_ptr<PageScraper> scraper;
  std::vector<std::string> tokens = split_tokens(env("GHS_TOKENS").value_or(""));

  // keep-alive holders for the chosen backend
  std::optional<SyntheticPopulation> population;
  std::optional<SelectorSpec> selectors;
  std::unique_ptr<HttpDocumentFetcher> primary;
  std::unique_ptr<HttpDocumentFetcher> fallback;
  std::unique_ptr<PageExtractor> extractor;

  if (o.backend == "real") {
    if (tokens.empty()) {
      err << "ghs mine: GHS_TOKENS is not set; provide one or more search API tokens "
             "(comma separated) in GHS_TOKENS\n";
      return 2;
    }
    if (!o.now.empty()) throw UsageError("--now only applies to the synthetic backend");
    std::filesystem::path selector_path;
    if (!o.selectors.empty()) selector_path = o.selectors;
    else if (config.selectors) selector_path = *config.selectors;
    else throw UsageError("--selectors (or \"selectors\" in the config file) is required");
    selectors = SelectorSpec::load(selector_path);
    clock = std::make_unique<SystemClock>();
    backend = std::make_unique<HttpForgeBackend>(o.forge_url.empty() ? config.forge_url
                                                                     : o.forge_url);
    primary = std::make_unique<HttpDocumentFetcher>(HttpFetchOptions{std::chrono::seconds{20}, 1});
    fallback = std::make_unique<HttpDocumentFetcher>(HttpFetchOptions{std::chrono::seconds{60}, 3});
    extractor = std::make_unique<PageExtractor>(*selectors, *primary, fallback.get(), 2);
    scraper = std::make_unique<HtmlPageScraper>(*extractor,
                                                o.web_url.empty() ? config.web_url : o.web_url);
  } else {
    const Instant now = o.now.empty()
                            ? std::chrono::floor<Seconds>(std::chrono::system_clock::now())
                            : parse_instant_flag("--now", o.now);
    population = generate(o.synthetic.seed, population_params(o.synthetic, languages.languages()));
    clock = std::make_unique<SimulatedClock>(now, SimulatedClock::Mode::AutoAdvance);
    backend = std::make_unique<SyntheticForge>(*population, *clock);
    scraper = std::make_unique<SyntheticPageScraper>(*population);
    if (tokens.empty()) tokens = {"synthetic-token-1", "synthetic-token-2"};
  }

  auto store = open_store(resolve_store(o.store, config));
  RateGovernor governor(tokens, *clock);
  ForgeClient client(*backend, governor);
  OrchestratorOptions options;
  options.scrape_workers = o.workers;
  MiningOrchestrator orchestrator(client, *scraper, *store, languages, options);

  auto print = [&](const MiningReport& r) {
    out << report_to_json(r).dump() << "\n";
    out.flush();
  };

  if (!loop) {
    print(orchestrator.run_language_pass(o.language, clock->now_instant()));
    return 0;
  }

  g_shutdown = false;
  SchedulerLease lease(*store, *clock, owner_id());
  if (!lease.acquire()) {
    err << "ghs mine: another scheduler holds the mining lease for this store\n";
    return 1;
  }
  ShutdownWatcher watcher([&] {
    lease.revoke();
    governor.shutdown();
  });
  LanguageConfig scheduled = o.language.empty() ? languages : LanguageConfig({o.language});
  ScheduleOptions schedule;
  schedule.period = std::chrono::duration_cast<Seconds>(
      std::chrono::duration<double, std::ratio<3600>>(o.period_hours));
  if (schedule.period <= Seconds{0}) throw UsageError("--period-hours must be positive");
  if (o.cycles > 0) schedule.max_cycles = o.cycles;
  schedule_loop(
      scheduled,
      [&](const std::string& language, Instant now) {
        print(orchestrator.run_language_pass(language, now));
      },
      *clock, lease, schedule);
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string cors_origin = "*";
};

int cmd_serve(const GlobalOptions& g, const ServeOptions& o, std::ostream& out) {
  AppConfig config = load_config(g);
  auto store = open_store(resolve_store(o.store, config));
  QueryServiceOptions options;
  options.cors_origin = o.cors_origin;
  QueryService service(*store, options);
  QueryServer server(service);
  g_shutdown = false;
  const int port = server.start(o.host, o.port);
  out << "serving on http://" << o.host << ":" << port << "\n";
  out.flush();
  while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds{100});
  server.stop();
  return 0;
}

// --- export ----------------------------------------------------------------

struct ExportOptions {
  std::string format = "csv";
  std::string out = "-";
  std::string store;
  std::string sort;
  std::string direction;
  std::map<std::string, std::string> values;  // camelCase param → value
  std::map<std::string, bool> flags;
};

std::string kebab(std::string_view camel) {
  std::string out;
  for (char c : camel) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      out += '-';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<std::string> value_params() {
  std::vector<std::string> names{"nameContains", "license", "language"};
  for (const auto& f : count_filter_fields()) {
    names.push_back(std::string{f.param} + "Min");
    names.push_back(std::string{f.param} + "Max");
  }
  for (const auto& f : instant_filter_fields()) {
    names.push_back(std::string{f.param} + "Min");
    names.push_back(std::string{f.param} + "Max");
  }
  return names;
}

const std::vector<std::string>& flag_params() {
  static const std::vector<std::string> kFlags{"excludeForks", "onlyWithLicense",
                                               "onlyWithOpenIssues", "excludeArchived"};
  return kFlags;
}

int cmd_export(const GlobalOptions& g, const ExportOptions& o, std::ostream& out) {
  AppConfig config = load_config(g);
  Params params;
  for (const auto& [k, v] : o.values) params.emplace(k, v);
  for (const auto& [k, on] : o.flags) {
    if (on) params.emplace(k, "true");
  }
  params.emplace("format", o.format);
  if (!o.sort.empty()) params.emplace("sort", o.sort);
  if (!o.direction.empty()) params.emplace("direction", o.direction);

  auto store = open_store(resolve_store(o.store, config));
  QueryService service(*store);
  auto planned = service.plan_export(params);
  if (auto* error = std::get_if<ApiResponse>(&planned)) {
    auto body = nlohmann::json::parse(error->body, nullptr, false);
    std::string message = error->body;
    if (body.is_object() && body.contains("errors") && !body["errors"].empty()) {
      message = body["errors"][0].value("message", error->body);
    }
    if (error->status == 400 || error->status == 422) throw UsageError(message);
    throw Error(message);
  }
  const auto& plan = std::get<ExportPlan>(planned);

  std::ofstream file;
  std::ostream* sink = &out;
  if (o.out != "-") {
    file.open(o.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + o.out);
    sink = &file;
  }
  Count rows = service.run_export(plan, [&](std::string_view chunk) {
    sink->write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  });
  sink->flush();
  if (!*sink) throw Error("write failed for " + o.out);
  if (o.out != "-") spdlog::info("wrote {} rows to {}", rows, o.out);
  return 0;
}

// --- stats / forge-serve ---------------------------------------------------

int cmd_stats(const GlobalOptions& g, const std::string& store_flag, std::ostream& out) {
  AppConfig config = load_config(g);
  auto store = open_store(resolve_store(store_flag, config));
  QueryService service(*store);
  ApiResponse r = service.stats();
  if (r.status != 200) throw Error(r.body);
  out << nlohmann::json::parse(r.body).dump(2) << "\n";
  return 0;
}

struct ForgeServeOptions {
  std::string host = "127.0.0.1";
  int port = 0;
  bool half_open = false;
  SyntheticOptions synthetic;
};

int cmd_forge_serve(const GlobalOptions& g, const ForgeServeOptions& o, std::ostream& out) {
  AppConfig config = load_config(g);
  LanguageConfig languages = resolve_languages(config);
  auto population = generate(o.synthetic.seed, population_params(o.synthetic, languages.languages()));
  SystemClock clock;
  SyntheticForge forge(population, clock);
  ForgeHttpServer server(forge, !o.half_open);
  g_shutdown = false;
  const int port = server.start(o.host, o.port);
  out << "synthetic forge with " << population.repos.size() << " repositories on http://"
      << o.host << ":" << port << "\n";
  out.flush();
  while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds{100});
  server.stop();
  return 0;
}

void configure_logging(const std::string& level) {
  static const bool configured = [] {
    auto logger = spdlog::stderr_color_mt("ghs");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)configured;
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

void request_cli_shutdown() { g_shutdown = true; }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Harvests repository metadata from a code forge and serves it for sampling."};
  app.name("ghs");
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON config file (also GHS_CONFIG)");
  app.add_option("--log-level", global.log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  MineOptions mine;
  auto* mine_cmd = app.add_subcommand("mine", "Run mining passes");
  mine_cmd->add_option("--language", mine.language, "Language to mine");
  mine_cmd->add_flag("--once", mine.once, "Run a single pass (default)");
  mine_cmd->add_flag("--loop", mine.loop, "Run the six-hourly scheduler");
  mine_cmd->add_option("--backend", mine.backend, "real or synthetic")
      ->check(CLI::IsMember({"real", "synthetic"}));
  mine_cmd->add_option("--store", mine.store, "Store target (also GHS_STORE)");
  mine_cmd->add_option("--now", mine.now, "Start time of the simulated clock (synthetic)");
  mine_cmd->add_option("--selectors", mine.selectors, "Selector spec for page extraction");
  mine_cmd->add_option("--forge-url", mine.forge_url, "Search API base URL");
  mine_cmd->add_option("--web-url", mine.web_url, "Repository web page base URL");
  mine_cmd->add_option("--workers", mine.workers, "Concurrent page scrapers");
  mine_cmd->add_option("--period-hours", mine.period_hours, "Cycle period for --loop");
  mine_cmd->add_option("--cycles", mine.cycles, "Stop --loop after this many cycles");
  add_synthetic_options(mine_cmd, mine.synthetic);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the query API");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (default 8080)");
  serve_cmd->add_option("--store", serve.store, "Store target (also GHS_STORE)");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed console origin");

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Export matching repositories");
  export_cmd->add_option("--format", exp.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  export_cmd->add_option("--out", exp.out, "Output file, - for stdout");
  export_cmd->add_option("--store", exp.store, "Store target (also GHS_STORE)");
  export_cmd->add_option("--sort", exp.sort, "Sort column");
  export_cmd->add_option("--direction", exp.direction, "asc or desc");
  for (const auto& name : value_params()) {
    export_cmd->add_option_function<std::string>(
        "--" + kebab(name), [&exp, name](const std::string& v) { exp.values[name] = v; },
        "Filter " + name);
  }
  for (const auto& name : flag_params()) {
    export_cmd->add_flag_function(
        "--" + kebab(name), [&exp, name](std::int64_t n) { exp.flags[name] = n > 0; },
        "Filter " + name);
  }

  std::string stats_store;
  auto* stats_cmd = app.add_subcommand("stats", "Print corpus statistics");
  stats_cmd->add_option("--store", stats_store, "Store target (also GHS_STORE)");

  ForgeServeOptions forge;
  auto* forge_cmd = app.add_subcommand("forge-serve", "Serve a synthetic forge over HTTP");
  forge_cmd->add_option("--host", forge.host, "Bind address");
  forge_cmd->add_option("--port", forge.port, "Port (0 picks a free one)");
  forge_cmd->add_flag("--half-open", forge.half_open,
                      "Read ranges as half-open instead of the real forge's inclusive form");
  add_synthetic_options(forge_cmd, forge.synthetic);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ghs: " << e.what() << "\n";
    return 2;
  }

  try {
    configure_logging(global.log_level);
    if (mine_cmd->parsed()) return cmd_mine(global, mine, out, err);
    if (serve_cmd->parsed()) return cmd_serve(global, serve, out);
    if (export_cmd->parsed()) return cmd_export(global, exp, out);
    if (stats_cmd->parsed()) return cmd_stats(global, stats_store, out);
    if (forge_cmd->parsed()) return cmd_forge_serve(global, forge, out);
  } catch (const UsageError& e) {
    err << "ghs: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "ghs: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "ghs: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ghs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ghs
