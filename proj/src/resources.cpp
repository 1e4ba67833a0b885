#include "tvcompanion/resources.hpp"

#include <fstream>

namespace tvc {

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

}  // namespace

ResourcePaths resource_paths_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("resources must be a JSON object");
  ResourcePaths paths;
  try {
    paths.vectors = resolve(base_dir, j.at("vectors").get<std::string>());
    paths.templates = resolve(base_dir, j.at("templates").get<std::string>());
    paths.stopwords = resolve(base_dir, j.value("stopwords", std::string{}));
    paths.user_dictionary = resolve(base_dir, j.value("user_dictionary", std::string{}));
    if (j.contains("corpora")) {
      for (const auto& [name, value] : j["corpora"].items()) {
        auto id = parse_engine_id(name);
        if (!id || *id == EngineId::Generative) throw DataError("unknown retrieval engine '" + name + "'");
        paths.corpora[*id] = resolve(base_dir, value.get<std::string>());
      }
    }
    if (j.contains("generative_replies")) {
      paths.generative_replies = j["generative_replies"].get<std::vector<std::string>>();
    }
    if (j.contains("generative_url") && !j["generative_url"].is_null()) {
      paths.generative_url = j["generative_url"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad resources block: ") + e.what());
  }
  return paths;
}

ResourcePaths load_resource_paths_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open resources file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("resources file is not valid JSON: " + std::string(e.what()));
  }
  return resource_paths_from_json(j, std::filesystem::absolute(path).parent_path());
}

Resources load_resources(const ResourcePaths& paths, TemplateConfig template_config,
                         DialogConfig dialog_config) {
  Resources out;
  auto store = std::make_shared<const EmbeddingStore>(load_vectors_file(paths.vectors, &out.warnings));

  std::vector<std::string> dictionary;
  if (!paths.user_dictionary.empty()) dictionary = load_word_list_file(paths.user_dictionary);
  auto tokenizer = std::make_shared<const DefaultTokenizer>(std::move(dictionary));

  std::set<std::string> stopwords;
  if (!paths.stopwords.empty()) {
    for (auto& w : load_word_list_file(paths.stopwords)) stopwords.insert(std::move(w));
  }

  auto templates = std::make_shared<const TemplateCorpus>(
      load_templates_file(paths.templates, *store, std::move(template_config), &out.warnings));

  std::map<EngineId, std::shared_ptr<const DialogEngine>> engines;
  for (EngineId id : kRetrievalEngines) {
    std::vector<CorpusEntry> corpus;
    auto it = paths.corpora.find(id);
    if (it != paths.corpora.end()) corpus = load_corpus_file(it->second);
    engines[id] = std::make_shared<const RetrievalEngine>(id, std::move(corpus));
  }

  std::shared_ptr<const GenerativeEngine> generative =
      paths.generative_replies.empty()
          ? std::make_shared<const BuiltinGenerative>()
          : std::make_shared<const BuiltinGenerative>(paths.generative_replies);
  if (paths.generative_url) {
    generative = std::make_shared<const ExternalGenerative>(*paths.generative_url, generative);
  }

  out.deps.store = store;
  out.deps.tokenizer = tokenizer;
  out.deps.stopwords = std::move(stopwords);
  out.deps.templates = templates;
  out.deps.dialog = std::make_shared<const DialogManager>(store, tokenizer, std::move(engines),
                                                          std::move(generative), dialog_config);
  return out;
}

}  // namespace tvc
