#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pscript/diagnostics.hpp"

namespace pscript {

// Raw game text plus the byte offset of every line start.
class SourceText {
 public:
  SourceText() : SourceText(std::string()) {}
  explicit SourceText(std::string raw);

  const std::string& raw() const { return raw_; }
  const std::vector<std::size_t>& line_index() const { return line_index_; }
  int line_count() const { return static_cast<int>(line_index_.size()); }

  // 1-based line number containing byte `offset`.
  int line_of(std::size_t offset) const;
  // Text of 1-based line `n`, without the trailing newline.
  std::string_view line(int n) const;

 private:
  std::string raw_;
  std::vector<std::size_t> line_index_;
};

SourceText load_source_file(const std::string& path);

// Strips nested parenthesized comments, lower-cases everything except
// message text and prelude values, and normalizes the two kernel-boundary
// quirks in rule lines (`] | [` and `]...[`). Line count is preserved so
// diagnostics still point into the original file.
SourceText preprocess(const SourceText& source);

// ---------------------------------------------------------------------------
// Syntax tree

struct PreludeEntry {
  std::string key;
  std::optional<std::string> value;
  int line = 0;
};

// Palette index per pixel, -1 for transparent.
using Sprite = std::array<std::array<int8_t, 5>, 5>;

struct ObjectDecl {
  std::string name;
  std::optional<char> glyph;
  std::vector<std::string> colors;
  std::optional<Sprite> sprite;
  int line = 0;
};

struct LegendDecl {
  enum class Kind { kAlias, kOr, kAnd };
  std::string name;
  Kind kind = Kind::kAlias;
  bool mixed_operators = false;  // both `and` and `or` appeared
  std::vector<std::string> targets;
  int line = 0;
};

struct LayerLine {
  std::vector<std::string> names;
  int line = 0;
};

struct CellEntryAst {
  std::string qualifier;  // empty, "no", ">", "moving", "up", ...
  std::string name;
};

struct CellAst {
  std::vector<CellEntryAst> entries;
  bool ellipsis = false;
};

using KernelAst = std::vector<CellAst>;

struct RuleAst {
  enum class Kind { kRule, kStartLoop, kEndLoop };
  Kind kind = Kind::kRule;
  bool joined = false;  // line started with '+'
  std::vector<std::string> prefixes;
  std::vector<KernelAst> lhs;
  std::vector<KernelAst> rhs;
  std::vector<std::string> commands;
  std::optional<std::string> message;
  int line = 0;
};

struct WinConditionAst {
  std::string quantifier;  // all, some, any, no
  std::string subject;
  std::optional<std::string> target;
  int line = 0;
};

struct LevelAst {
  bool is_message = false;
  std::string message;
  std::vector<std::string> rows;
  int line = 0;
};

struct GameAst {
  std::vector<PreludeEntry> prelude;
  std::vector<ObjectDecl> objects;
  std::vector<LegendDecl> legend;
  std::vector<std::string> sounds;
  std::vector<LayerLine> collision_layers;
  std::vector<RuleAst> rule_lines;
  std::vector<WinConditionAst> win_conditions;
  std::vector<LevelAst> levels;
  std::vector<Diagnostic> warnings;

  const PreludeEntry* find_prelude(std::string_view key) const;
};

// Parses preprocessed text. Throws CompileError listing every diagnostic.
GameAst parse(const SourceText& source);

// Convenience: preprocess + parse.
GameAst parse_game(const SourceText& source);

// Renders a glyph grid back to text, one row per line.
std::string render_level_rows(const LevelAst& level);

}  // namespace pscript
