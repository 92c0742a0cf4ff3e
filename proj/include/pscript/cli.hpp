#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pscript/engine.hpp"

namespace pscript {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ASCII view of a level state using legend glyphs; '?' where no glyph fits.
std::string render_ascii(const GameDef& game, const GridState& state);

// Interactive loop. Keys: arrows or WASD move, X action, Z undo, R restart,
// Q quits. Reads raw bytes from `in`; the caller handles terminal modes.
int play_session(std::shared_ptr<const GameDef> game, int level_index, std::istream& in,
                 std::ostream& out, const EngineLimits& limits = {});

}  // namespace pscript
