// Python extension. Structured results cross the boundary as JSON text and
// are decoded by the package wrapper.

#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tvcompanion/errors.hpp"
#include "tvcompanion/resources.hpp"
#include "tvcompanion/service.hpp"
#include "tvcompanion/simulation.hpp"
#include "tvcompanion/stats.hpp"
#include "tvcompanion/templates.hpp"
#include "tvcompanion/wmd.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

struct LoadedResources {
  tvc::Resources res;
};

std::shared_ptr<LoadedResources> load(const std::string& path) {
  py::gil_scoped_release nogil;
  auto out = std::make_shared<LoadedResources>();
  out->res = tvc::load_resources(tvc::load_resource_paths_file(path));
  return out;
}

tvc::WeightedDoc doc_of(const LoadedResources& r, const std::string& text) {
  return tvc::nbow(r.res.deps.tokenizer->tokenize(text), *r.res.deps.store);
}

std::string wmd_json(const LoadedResources& r, const std::string& a, const std::string& b) {
  const auto da = doc_of(r, a), db = doc_of(r, b);
  const auto& store = *r.res.deps.store;
  tvc::WmdResult result;
  double relaxed;
  {
    py::gil_scoped_release nogil;
    result = tvc::wmd(da, db, store);
    relaxed = tvc::relaxed_wmd(da, db, store);
  }
  json plan = json::array();
  for (const auto& [pair, mass] : result.plan.flows) plan.push_back({pair.first, pair.second, mass});
  return json{{"distance", result.distance},
              {"similarity", tvc::to_similarity(result.distance)},
              {"relaxed", relaxed},
              {"plan", plan}}
      .dump();
}

std::string generate_json(const LoadedResources& r, const std::string& keyword, const std::string& kind) {
  const auto k = tvc::parse_template_kind(kind);
  if (!k) throw tvc::ContractError("kind must be 'disclosure' or 'question'");
  tvc::Keyword kw;
  kw.surface = keyword;
  const auto& tmpl = tvc::select_template(kw, *k, *r.res.deps.templates, *r.res.deps.store);
  const auto u = tvc::realize(tmpl, kw);
  return json{{"text", u.text},
              {"kind", std::string(tvc::to_string(tmpl.kind))},
              {"template_id", tmpl.id},
              {"anchor", tmpl.anchor},
              {"pattern", tmpl.pattern}}
      .dump();
}

std::string simulate_json(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                          const std::string& out, std::optional<double> threshold) {
  tvc::SimulationResult result;
  std::string name;
  {
    py::gil_scoped_release nogil;
    auto scenario = tvc::load_scenario_file(scenario_path);
    if (threshold) scenario.config_overrides["wmd_threshold"] = *threshold;
    auto res = tvc::load_resources(scenario.resources);
    result = tvc::simulate(scenario, res.deps, out, seed);
    name = scenario.name;
  }
  json transcript = json::array();
  for (const auto& e : result.transcript) transcript.push_back(tvc::to_json(e));
  return json{{"name", name},
              {"config", tvc::to_json(result.config)},
              {"stats", tvc::stats_to_json(result.stats)},
              {"engine_usage", result.engine_usage},
              {"keyword_usage", result.keyword_usage},
              {"utterance_seq", result.final_state.utterance_seq},
              {"transcript", transcript}}
      .dump();
}

tvc::TurnStats stats_of(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tvc::DataError("cannot open transcript '" + path + "'");
  return tvc::compute_turn_stats(tvc::read_transcript(in));
}

std::string stats_table(const std::vector<std::pair<std::string, std::string>>& labelled_paths) {
  std::vector<tvc::StatsGroup> groups;
  for (const auto& [label, path] : labelled_paths) groups.push_back({label, stats_of(path)});
  std::ostringstream out;
  tvc::print_stats_table(groups, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the tvcompanion package";

  auto data_error = py::register_exception<tvc::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<tvc::ContractError>(m, "ContractError", PyExc_ValueError);
  (void)data_error;

  py::class_<LoadedResources, std::shared_ptr<LoadedResources>>(m, "Resources")
      .def_property_readonly("vocab_size", [](const LoadedResources& r) { return r.res.deps.store->vocab_size(); })
      .def_property_readonly("warnings", [](const LoadedResources& r) { return r.res.warnings; })
      .def("tokenize", [](const LoadedResources& r, const std::string& text) {
        return r.res.deps.tokenizer->tokenize(text);
      });

  m.def("load_resources", &load, py::arg("path"));
  m.def("wmd_json", &wmd_json, py::arg("resources"), py::arg("a"), py::arg("b"));
  m.def("generate_json", &generate_json, py::arg("resources"), py::arg("keyword"), py::arg("kind"));
  m.def("simulate_json", &simulate_json, py::arg("scenario"), py::arg("seed") = py::none(),
        py::arg("out") = "", py::arg("threshold") = py::none());
  m.def("stats_json", [](const std::string& path) { return tvc::stats_to_json(stats_of(path)).dump(); },
        py::arg("path"));
  m.def("stats_table", &stats_table, py::arg("groups"));
  m.def("similarity", &tvc::to_similarity, py::arg("distance"));
}
