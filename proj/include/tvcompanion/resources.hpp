#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvcompanion/session.hpp"

namespace tvc {

/// File locations for everything a session needs besides its feed.
struct ResourcePaths {
  std::string vectors;
  std::string templates;
  std::string stopwords;                 // optional; empty means no stopwords
  std::string user_dictionary;           // optional
  std::map<EngineId, std::string> corpora;
  std::vector<std::string> generative_replies;  // empty -> builtin defaults
  std::optional<std::string> generative_url;
};

/// Reads {"vectors", "templates", "stopwords"?, "user_dictionary"?,
/// "corpora": {engine: path}, "generative_replies"?, "generative_url"?}.
/// Relative paths resolve against `base_dir`.
ResourcePaths resource_paths_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Same block stored in its own file; paths resolve against the file's directory.
ResourcePaths load_resource_paths_file(const std::string& path);

struct Resources {
  SessionDeps deps;
  Warnings warnings;
};

/// Loads vectors, templates, word lists and engine corpora. Missing corpus
/// entries register an empty retrieval engine.
Resources load_resources(const ResourcePaths& paths, TemplateConfig template_config = {},
                         DialogConfig dialog_config = {});

}  // namespace tvc
