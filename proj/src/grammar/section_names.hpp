#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pscript {

enum class Section {
  kPrelude,
  kObjects,
  kLegend,
  kSounds,
  kCollisionLayers,
  kRules,
  kWinConditions,
  kLevels,
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// `trimmed_lower` must already be trimmed and lower-case.
inline std::optional<Section> section_from_header(std::string_view trimmed_lower) {
  if (trimmed_lower == "objects") return Section::kObjects;
  if (trimmed_lower == "legend") return Section::kLegend;
  if (trimmed_lower == "sounds") return Section::kSounds;
  if (trimmed_lower == "collisionlayers") return Section::kCollisionLayers;
  if (trimmed_lower == "rules") return Section::kRules;
  if (trimmed_lower == "winconditions") return Section::kWinConditions;
  if (trimmed_lower == "levels") return Section::kLevels;
  return std::nullopt;
}

inline const char* section_name(Section s) {
  switch (s) {
    case Section::kPrelude: return "prelude";
    case Section::kObjects: return "objects";
    case Section::kLegend: return "legend";
    case Section::kSounds: return "sounds";
    case Section::kCollisionLayers: return "collisionlayers";
    case Section::kRules: return "rules";
    case Section::kWinConditions: return "winconditions";
    case Section::kLevels: return "levels";
  }
  return "";
}

inline bool is_underline(std::string_view trimmed) {
  if (trimmed.empty()) return false;
  for (char c : trimmed) {
    if (c != '=') return false;
  }
  return true;
}

}  // namespace pscript
