#include "tvcompanion/transcript.hpp"

#include <istream>

#include "tvcompanion/errors.hpp"

namespace tvc {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const Enum (&values)[N], const char* what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw DataError(std::string("unknown ") + what + " '" + text + "'");
}

constexpr Mode kModes[] = {Mode::TVWatching, Mode::Conversing};
constexpr Speaker kSpeakers[] = {Speaker::Robot, Speaker::User, Speaker::System};
constexpr EntryKind kKinds[] = {EntryKind::Disclosure, EntryKind::Question, EntryKind::Response,
                                EntryKind::User, EntryKind::Event};

template <typename T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <typename T>
void get(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

std::string_view to_string(Mode mode) {
  return mode == Mode::TVWatching ? "TVWatching" : "Conversing";
}

std::string_view to_string(Speaker speaker) {
  switch (speaker) {
    case Speaker::Robot: return "robot";
    case Speaker::User: return "user";
    case Speaker::System: return "system";
  }
  return "unknown";
}

std::string_view to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::Disclosure: return "disclosure";
    case EntryKind::Question: return "question";
    case EntryKind::Response: return "response";
    case EntryKind::User: return "user";
    case EntryKind::Event: return "event";
  }
  return "unknown";
}

nlohmann::json to_json(const TranscriptEntry& e) {
  nlohmann::json j;
  j["t"] = e.t;
  j["speaker"] = std::string(to_string(e.speaker));
  j["text"] = e.text;
  j["kind"] = std::string(to_string(e.kind));
  if (e.engine) j["engine"] = std::string(to_string(*e.engine));
  put(j, "conversation_id", e.conversation_id);
  put(j, "event", e.event);
  put(j, "cause", e.cause);
  put(j, "keyword", e.keyword);
  put(j, "source", e.source);
  put(j, "similarity", e.similarity);
  if (e.from) j["from"] = std::string(to_string(*e.from));
  if (e.to) j["to"] = std::string(to_string(*e.to));
  put(j, "turns", e.turns);
  put(j, "robot_turns", e.robot_turns);
  put(j, "seq", e.seq);
  put(j, "turn_index", e.turn_index);
  put(j, "template_id", e.template_id);
  return j;
}

TranscriptEntry entry_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("transcript entry must be an object");
  TranscriptEntry e;
  try {
    e.t = j.at("t").get<double>();
    e.speaker = parse_enum(j.at("speaker").get<std::string>(), kSpeakers, "speaker");
    e.text = j.at("text").get<std::string>();
    e.kind = parse_enum(j.at("kind").get<std::string>(), kKinds, "kind");
    if (j.contains("engine")) {
      auto id = parse_engine_id(j["engine"].get<std::string>());
      if (!id) throw DataError("unknown engine");
      e.engine = *id;
    }
    get(j, "conversation_id", e.conversation_id);
    get(j, "event", e.event);
    get(j, "cause", e.cause);
    get(j, "keyword", e.keyword);
    get(j, "source", e.source);
    get(j, "similarity", e.similarity);
    if (j.contains("from")) e.from = parse_enum(j["from"].get<std::string>(), kModes, "mode");
    if (j.contains("to")) e.to = parse_enum(j["to"].get<std::string>(), kModes, "mode");
    get(j, "turns", e.turns);
    get(j, "robot_turns", e.robot_turns);
    get(j, "seq", e.seq);
    get(j, "turn_index", e.turn_index);
    get(j, "template_id", e.template_id);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("bad transcript entry: ") + ex.what());
  }
  return e;
}

std::string to_jsonl(const TranscriptEntry& entry) { return to_json(entry).dump(); }

TranscriptWriter::TranscriptWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw DataError("cannot open transcript for writing: " + path);
}

void TranscriptWriter::append(const TranscriptEntry& entry) {
  out_ << to_jsonl(entry) << '\n';
  out_.flush();
}

std::vector<TranscriptEntry> read_transcript(std::istream& in,
                                             std::vector<TranscriptParseError>* errors) {
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      entries.push_back(entry_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      if (errors) errors->push_back({line_no, ex.what()});
    }
  }
  return entries;
}

}  // namespace tvc
