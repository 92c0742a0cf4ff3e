#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "pscript/cli.hpp"

namespace pscript {
namespace {

struct GlyphEntry {
  char glyph;
  ObjectMask mask;
};

std::vector<GlyphEntry> display_glyphs(const GameDef& game) {
  std::vector<GlyphEntry> out;
  for (const auto& [glyph, mask] : game.legend_table.glyphs) {
    const std::string name(1, glyph);
    if (game.legend_table.meta.count(name)) continue;
    out.push_back({glyph, mask});
  }
  return out;
}

char glyph_for(const std::vector<GlyphEntry>& glyphs, const ObjectMask& cell, ObjectId background) {
  ObjectMask bare = cell;
  bare.reset(background);
  for (const GlyphEntry& g : glyphs) {
    if (g.mask == cell) return g.glyph;
  }
  for (const GlyphEntry& g : glyphs) {
    if (g.mask == bare) return g.glyph;
  }
  if (bare.empty()) return '.';
  return '?';
}

enum class Key { kUp, kDown, kLeft, kRight, kAction, kUndo, kRestart, kQuit, kOther, kEnd };

Key read_key(std::istream& in) {
  const int c = in.get();
  if (c == std::char_traits<char>::eof()) return Key::kEnd;
  if (c == 0x1b) {
    if (in.peek() != '[') return Key::kOther;
    in.get();
    switch (in.get()) {
      case 'A': return Key::kUp;
      case 'B': return Key::kDown;
      case 'C': return Key::kRight;
      case 'D': return Key::kLeft;
      default: return Key::kOther;
    }
  }
  switch (std::tolower(c)) {
    case 'w': return Key::kUp;
    case 's': return Key::kDown;
    case 'a': return Key::kLeft;
    case 'd': return Key::kRight;
    case 'x': return Key::kAction;
    case 'z': return Key::kUndo;
    case 'r': return Key::kRestart;
    case 'q': return Key::kQuit;
    default: return Key::kOther;
  }
}

}  // namespace

std::string render_ascii(const GameDef& game, const GridState& state) {
  const std::vector<GlyphEntry> glyphs = display_glyphs(game);
  ObjectMask hidden;  // objects drawn entirely transparent
  for (const ObjectRecord& obj : game.object_table.objects) {
    if (std::all_of(obj.colors.begin(), obj.colors.end(), [](const Rgb& c) { return c.transparent; })) {
      hidden.set(obj.id);
    }
  }
  std::string out;
  for (int y = 0; y < state.height; ++y) {
    for (int x = 0; x < state.width; ++x) {
      const int ci = y * state.width + x;
      ObjectMask cell;
      for (int w = 0; w < state.words; ++w) cell.w[w] = state.cell(ci)[w] & ~hidden.w[w];
      out += glyph_for(glyphs, cell, game.background_id);
    }
    out += '\n';
  }
  return out;
}

int play_session(std::shared_ptr<const GameDef> game, int level_index, std::istream& in,
                 std::ostream& out, const EngineLimits& limits) {
  Engine engine(game, limits);
  StepOutcome start;
  GridState state = engine.init_level(level_index, &start);
  std::vector<GridState> history;
  const int n_objects = game->num_objects();

  auto show = [&](const std::vector<std::string>& messages) {
    out << render_ascii(*game, state);
    for (const std::string& m : messages) out << "message: " << m << '\n';
    out << "digest " << digest_hex(state_digest(state, n_objects)) << '\n';
    out.flush();
  };
  show(start.messages);

  for (;;) {
    const Key key = read_key(in);
    Action action;
    switch (key) {
      case Key::kEnd:
      case Key::kQuit: return kExitOk;
      case Key::kOther: continue;
      case Key::kUndo:
        if (!history.empty()) {
          state = std::move(history.back());
          history.pop_back();
        }
        show({});
        continue;
      case Key::kRestart:
        history.push_back(state);
        state = engine.init_level(level_index);
        show({});
        continue;
      case Key::kUp: action = Action::kUp; break;
      case Key::kDown: action = Action::kDown; break;
      case Key::kLeft: action = Action::kLeft; break;
      case Key::kRight: action = Action::kRight; break;
      case Key::kAction: action = Action::kAction; break;
    }
    GridState before = state;
    const StepOutcome o = engine.tick(state, action);
    if (o.changed) history.push_back(std::move(before));
    show(o.messages);
    if (o.won) {
      out << "level complete\n";
      return kExitOk;
    }
  }
}

}  // namespace pscript
