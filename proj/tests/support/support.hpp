#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pscript/compiler.hpp"
#include "pscript/engine.hpp"

namespace pscript::testkit {

inline std::string games_dir() { return PSCRIPT_GAMES_DIR; }
inline std::string fixtures_dir() { return PSCRIPT_FIXTURES_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const GameDef> compile_text(const std::string& text) {
  return std::make_shared<const GameDef>(compile_source(SourceText(text)));
}

inline std::vector<std::string> exemplar_paths() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(games_dir())) {
    if (e.path().extension() == ".txt") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// `src` with everything after its LEVELS header replaced by `levels`.
inline std::string replace_levels(const std::string& src, const std::string& levels) {
  std::string lowered = src;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::size_t at = lowered.find("\nlevels\n");
  if (at == std::string::npos) throw std::runtime_error("source has no LEVELS section");
  std::size_t end = at + 8;
  // Skip an optional ===== underline.
  if (end < src.size() && src[end] == '=') end = src.find('\n', end) + 1;
  return src.substr(0, end) + "\n" + levels;
}

inline std::string limerick_with_levels(const std::string& levels) {
  return replace_levels(read_file(fixtures_dir() + "/limerick_appendix.txt"), levels);
}

// Builds a force-free state directly from a picture. `key` maps each
// character to the lower-case object names present in that cell; the
// background object is added everywhere.
inline GridState grid_from_picture(const GameDef& game, const std::vector<std::string>& rows,
                                   const std::map<char, std::vector<std::string>>& key,
                                   int level_index) {
  GridState s;
  s.level_index = level_index;
  s.height = static_cast<int>(rows.size());
  s.width = static_cast<int>(rows.front().size());
  s.words = std::max(1, game.object_words());
  s.layers = game.num_layers();
  s.objects.assign(static_cast<std::size_t>(s.cells()) * s.words, 0);
  s.forces.assign(static_cast<std::size_t>(s.cells()) * s.layers, 0);
  s.last_input.assign(s.cells(), 0);
  for (int y = 0; y < s.height; ++y) {
    if (static_cast<int>(rows[y].size()) != s.width) throw std::runtime_error("ragged picture");
    for (int x = 0; x < s.width; ++x) {
      uint64_t* c = s.cell(y * s.width + x);
      c[game.background_id >> 6] |= uint64_t{1} << (game.background_id & 63);
      auto it = key.find(rows[y][x]);
      if (it == key.end()) throw std::runtime_error(std::string("no key for '") + rows[y][x] + "'");
      for (const std::string& name : it->second) {
        const auto id = game.object_table.find(name);
        if (!id) throw std::runtime_error("unknown object " + name);
        c[*id >> 6] |= uint64_t{1} << (*id & 63);
      }
    }
  }
  s.recount(game.num_objects());
  return s;
}

// Digest oracle written from the documented byte layout only.
inline uint64_t reference_digest(const GridState& s, int num_objects) {
  std::vector<uint8_t> bytes;
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(uint32_t(s.width) >> (8 * i)));
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(uint32_t(s.height) >> (8 * i)));
  const int cells = s.width * s.height;
  for (int id = 0; id < num_objects; ++id) {
    std::vector<uint8_t> plane((cells + 7) / 8, 0);
    for (int ci = 0; ci < cells; ++ci) {
      if (s.has(ci, id)) plane[ci / 8] |= static_cast<uint8_t>(1u << (ci % 8));
    }
    bytes.insert(bytes.end(), plane.begin(), plane.end());
  }
  uint64_t h = 14695981039346656037ull;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

// Count-based check of one-object-per-layer, independent of the engine.
inline bool layers_exclusive(const GameDef& game, const GridState& s, std::string* why = nullptr) {
  for (int ci = 0; ci < s.cells(); ++ci) {
    for (int l = 0; l < game.num_layers(); ++l) {
      int n = 0;
      for (ObjectId id : game.layer_table.layers[l]) n += s.has(ci, id) ? 1 : 0;
      if (n > 1) {
        if (why) *why = "cell " + std::to_string(ci) + " layer " + std::to_string(l);
        return false;
      }
    }
  }
  return true;
}

inline bool all_forces_zero(const GridState& s) {
  return std::all_of(s.forces.begin(), s.forces.end(), [](uint8_t f) { return f == 0; });
}

// Random reachable-ish states: a short random playout from a random
// playable level, resetting on win/restart.
inline GridState random_playout_state(Engine& engine, std::mt19937_64& rng, int max_ticks) {
  const std::vector<int> playable = engine.game().playable_levels();
  const int level = playable[rng() % playable.size()];
  GridState s = engine.init_level(level);
  const int n = static_cast<int>(rng() % (max_ticks + 1));
  for (int i = 0; i < n; ++i) {
    StepOutcome out = engine.tick(s, static_cast<Action>(rng() % kNumActions));
    if (out.won || out.restarted) s = engine.init_level(level);
  }
  return s;
}

}  // namespace pscript::testkit
