// tvcompanion command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "tvcompanion/service.hpp"
#include "tvcompanion/simulation.hpp"
#include "tvcompanion/wmd.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;

void print_warnings(const tvc::Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 const std::string& out, std::optional<double> threshold, bool quiet) {
  auto scenario = tvc::load_scenario_file(scenario_path);
  if (threshold) scenario.config_overrides["wmd_threshold"] = *threshold;
  auto resources = tvc::load_resources(scenario.resources);
  if (!quiet) print_warnings(resources.warnings);
  auto result = tvc::simulate(scenario, resources.deps, out, seed);
  std::cout << "scenario " << scenario.name << "\n";
  tvc::print_summary(result, std::cout);
  if (!out.empty()) std::cout << "transcript written to " << out << "\n";
  return kOk;
}

int run_stats(const std::vector<std::string>& files, const std::vector<std::string>& labels) {
  if (!labels.empty() && labels.size() != files.size()) {
    std::cerr << "error: --label must be given once per transcript\n";
    return kUsage;
  }
  std::vector<tvc::StatsGroup> groups;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::ifstream in(files[i]);
    if (!in) throw tvc::DataError("cannot open transcript: " + files[i]);
    std::vector<tvc::TranscriptParseError> errors;
    auto entries = tvc::read_transcript(in, &errors);
    for (const auto& e : errors) {
      std::cerr << "warning: " << files[i] << ":" << e.line << ": " << e.message << "\n";
    }
    const std::string label =
        labels.empty() ? std::filesystem::path(files[i]).stem().string() : labels[i];
    groups.push_back({label, tvc::compute_turn_stats(entries)});
  }
  tvc::print_stats_table(groups, std::cout);
  return kOk;
}

int run_wmd(const std::string& resources_path, const std::string& vectors,
            const std::string& doc_a, const std::string& doc_b) {
  std::shared_ptr<const tvc::EmbeddingStore> store;
  std::shared_ptr<const tvc::Tokenizer> tokenizer;
  if (!vectors.empty()) {
    tvc::Warnings warnings;
    store = std::make_shared<const tvc::EmbeddingStore>(tvc::load_vectors_file(vectors, &warnings));
    print_warnings(warnings);
    tokenizer = std::make_shared<const tvc::DefaultTokenizer>();
  } else {
    auto res = tvc::load_resources(tvc::load_resource_paths_file(resources_path));
    store = res.deps.store;
    tokenizer = res.deps.tokenizer;
  }
  tvc::WeightedDoc a, b;
  try {
    a = tvc::nbow(tokenizer->tokenize(doc_a), *store);
    b = tvc::nbow(tokenizer->tokenize(doc_b), *store);
  } catch (const tvc::ContractError& e) {
    throw tvc::DataError(e.what());
  }
  const auto result = tvc::wmd(a, b, *store);
  std::cout << std::setprecision(9);
  std::cout << "distance   " << result.distance << "\n";
  std::cout << "similarity " << tvc::to_similarity(result.distance) << "\n";
  std::cout << "relaxed    " << tvc::relaxed_wmd(a, b, *store) << "\n";
  std::cout << "plan\n";
  for (const auto& [pair, mass] : result.plan.flows) {
    if (mass <= 0.0) continue;
    const double cost = tvc::euclidean_distance(store->vector(pair.first), store->vector(pair.second));
    std::cout << "  " << pair.first << " -> " << pair.second << "  mass " << mass << "  cost "
              << cost << "\n";
  }
  return kOk;
}

int run_gen(const std::string& resources_path, const std::string& keyword, const std::string& kind) {
  auto k = tvc::parse_template_kind(kind);
  if (!k) {
    std::cerr << "error: kind must be disclosure or question\n";
    return kUsage;
  }
  auto res = tvc::load_resources(tvc::load_resource_paths_file(resources_path));
  print_warnings(res.warnings);
  tvc::Keyword kw;
  kw.surface = keyword;
  const auto& tmpl = tvc::select_template(kw, *k, *res.deps.templates, *res.deps.store);
  const auto utterance = tvc::realize(tmpl, kw);
  std::cout << utterance.text << "\n";
  std::cout << "template " << tmpl.id << " (" << tvc::to_string(tmpl.kind) << ", anchor '"
            << tmpl.anchor << "', pattern '" << tmpl.pattern << "')\n";
  return kOk;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::string& resources_path, const std::string& host, int port,
              const std::string& data_dir, const std::string& web_root) {
  auto res = tvc::load_resources(tvc::load_resource_paths_file(resources_path));
  print_warnings(res.warnings);
  tvc::ServiceOptions options;
  options.data_dir = data_dir;
  if (!web_root.empty()) options.web_root = web_root;
  tvc::CompanionService service(res.deps, options);
  httplib::Server server;
  server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  tvc::register_routes(server, service);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TV-watching companion: simulation, statistics and session service"};
  app.require_subcommand(1);
  const std::string default_resources = "data/demo/resources.json";

  auto* sim = app.add_subcommand("simulate", "Run a scripted scenario in logical time");
  std::string scenario_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool quiet = false;
  sim->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sim->add_option("--seed", seed, "Override the scenario's RNG seed");
  sim->add_option("-o,--out", out, "Write the transcript (JSON lines) here");
  sim->add_option("--threshold", threshold, "WMD similarity threshold")->check(CLI::Range(0.0, 1.0));
  sim->add_flag("-q,--quiet", quiet, "Suppress resource warnings");

  auto* stats = app.add_subcommand("stats", "Turn statistics per transcript");
  std::vector<std::string> files, labels;
  stats->add_option("transcripts", files, "Transcript files, one column each")->required();
  stats->add_option("--label", labels, "Column label, once per transcript");

  auto* wmd = app.add_subcommand("wmd", "Word Mover's Distance between two texts");
  std::string resources_path = default_resources, vectors, doc_a, doc_b;
  wmd->add_option("a", doc_a, "First text")->required();
  wmd->add_option("b", doc_b, "Second text")->required();
  wmd->add_option("--resources", resources_path, "Resources JSON")->capture_default_str();
  wmd->add_option("--vectors", vectors, "Word vector file (overrides --resources)");

  auto* gen = app.add_subcommand("gen", "Realize a template utterance for a keyword");
  std::string keyword, kind = "disclosure";
  gen->add_option("keyword", keyword, "Keyword surface")->required();
  gen->add_option("--kind", kind, "disclosure or question")->capture_default_str();
  gen->add_option("--resources", resources_path, "Resources JSON")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  std::string host = "127.0.0.1", data_dir = "data", web_root;
  int port = 8080;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "Where session transcripts are written")->capture_default_str();
  serve->add_option("--web-root", web_root, "Static files served at /");
  serve->add_option("--resources", resources_path, "Resources JSON")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return run_simulate(scenario_path, seed, out, threshold, quiet);
    if (*stats) return run_stats(files, labels);
    if (*wmd) return run_wmd(resources_path, vectors, doc_a, doc_b);
    if (*gen) return run_gen(resources_path, keyword, kind);
    if (*serve) return run_serve(resources_path, host, port, data_dir, web_root);
  } catch (const tvc::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const tvc::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
