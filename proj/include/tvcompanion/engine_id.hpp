#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace tvc {

/// Declaration order is the tie-break order between retrieval engines.
enum class EngineId { TvProgram, DailyLife, NewsSns, Generative };

inline constexpr std::array<EngineId, 3> kRetrievalEngines = {
    EngineId::TvProgram, EngineId::DailyLife, EngineId::NewsSns};

constexpr std::string_view to_string(EngineId id) {
  switch (id) {
    case EngineId::TvProgram: return "tv_program";
    case EngineId::DailyLife: return "daily_life";
    case EngineId::NewsSns: return "news_sns";
    case EngineId::Generative: return "generative";
  }
  return "unknown";
}

constexpr std::optional<EngineId> parse_engine_id(std::string_view text) {
  for (auto id : {EngineId::TvProgram, EngineId::DailyLife, EngineId::NewsSns, EngineId::Generative}) {
    if (to_string(id) == text) return id;
  }
  return std::nullopt;
}

}  // namespace tvc
