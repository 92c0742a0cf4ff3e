#include <bit>
#include <cstdio>

#include "pscript/engine.hpp"

namespace pscript {

const char* action_name(Action a) {
  switch (a) {
    case Action::kUp: return "up";
    case Action::kDown: return "down";
    case Action::kLeft: return "left";
    case Action::kRight: return "right";
    case Action::kAction: return "action";
    case Action::kNone: return "none";
  }
  return "?";
}

std::optional<Action> action_from_code(int code) {
  if (code < 0 || code >= kNumActions) return std::nullopt;
  return static_cast<Action>(code);
}

bool GridState::any_force() const {
  for (uint8_t f : forces) {
    if (f) return true;
  }
  return false;
}

std::vector<uint8_t> GridState::presence_plane(ObjectId id) const {
  std::vector<uint8_t> plane(cells());
  for (int ci = 0; ci < cells(); ++ci) plane[ci] = has(ci, id) ? 1 : 0;
  return plane;
}

void GridState::recount(int num_objects) {
  object_counts.assign(num_objects, 0);
  force_counts.assign(static_cast<std::size_t>(layers) * 5, 0);
  for (int ci = 0; ci < cells(); ++ci) {
    const uint64_t* c = cell(ci);
    for (int w = 0; w < words; ++w) {
      uint64_t x = c[w];
      while (x) {
        ++object_counts[w * 64 + std::countr_zero(x)];
        x &= x - 1;
      }
    }
    for (int l = 0; l < layers; ++l) {
      uint8_t f = force(ci, l);
      if (f) ++force_counts[l * 5 + std::countr_zero(f)];
    }
  }
}

uint64_t state_digest(const GridState& state, int num_objects) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  auto feed_u32 = [&feed](uint32_t v) {
    for (int i = 0; i < 4; ++i) feed(static_cast<uint8_t>(v >> (8 * i)));
  };
  feed_u32(static_cast<uint32_t>(state.width));
  feed_u32(static_cast<uint32_t>(state.height));
  const int cells = state.cells();
  for (ObjectId id = 0; id < num_objects; ++id) {
    const int w = id >> 6;
    const int bit = id & 63;
    uint8_t acc = 0;
    int nbits = 0;
    const uint64_t* p = state.objects.data() + w;
    for (int ci = 0; ci < cells; ++ci, p += state.words) {
      acc |= static_cast<uint8_t>(((*p >> bit) & 1) << nbits);
      if (++nbits == 8) {
        feed(acc);
        acc = 0;
        nbits = 0;
      }
    }
    if (nbits) feed(acc);
  }
  return h;
}

std::string digest_hex(uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

GridState make_level_state(const GameDef& game, int level_index) {
  if (level_index < 0 || level_index >= static_cast<int>(game.levels.size())) {
    throw std::out_of_range("level index " + std::to_string(level_index) + " out of range");
  }
  const LevelDef& level = game.levels[level_index];
  if (level.is_message) {
    throw std::invalid_argument("level " + std::to_string(level_index) + " is a message");
  }
  GridState s;
  s.level_index = level_index;
  s.width = level.width;
  s.height = level.height;
  s.words = std::max(1, game.object_words());
  s.layers = game.num_layers();
  s.objects.assign(static_cast<std::size_t>(s.cells()) * s.words, 0);
  s.forces.assign(static_cast<std::size_t>(s.cells()) * s.layers, 0);
  s.last_input.assign(s.cells(), 0);
  for (int ci = 0; ci < s.cells(); ++ci) {
    for (int w = 0; w < s.words; ++w) s.cell(ci)[w] = level.cells[ci].w[w];
  }
  s.recount(game.num_objects());
  return s;
}

}  // namespace pscript
