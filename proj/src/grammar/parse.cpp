#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "pscript/grammar.hpp"
#include "section_names.hpp"

namespace pscript {
namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_sprite_row(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == '.' || (c >= '0' && c <= '9');
  });
}

const std::set<std::string, std::less<>>& cell_qualifiers() {
  static const std::set<std::string, std::less<>> k = {
      "no",     ">",          "<",        "^",          "v",
      "up",     "down",       "left",     "right",      "moving",
      "stationary", "action", "horizontal", "vertical", "orthogonal",
      "parallel", "perpendicular", "randomdir", "random"};
  return k;
}

const std::set<std::string, std::less<>>& rule_prefixes() {
  static const std::set<std::string, std::less<>> k = {
      "up",     "down",       "left",   "right", "horizontal", "vertical",
      "orthogonal", "late",   "random", "rigid", "+"};
  return k;
}

bool is_command(std::string_view t) {
  if (t == "win" || t == "again" || t == "restart" || t == "cancel" ||
      t == "checkpoint" || t == "message") {
    return true;
  }
  if (t.size() > 3 && t.substr(0, 3) == "sfx") {
    return std::all_of(t.begin() + 3, t.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
  }
  return false;
}

// Splits a rule line into tokens, treating brackets, bars and arrows as
// standalone tokens. The message command keeps the rest of the line.
struct RuleTokens {
  std::vector<std::string> tokens;
  std::optional<std::string> message;
};

RuleTokens tokenize_rule(std::string_view line) {
  RuleTokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.tokens.push_back(std::move(cur)), cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      if (!out.tokens.empty() && out.tokens.back() == "message") {
        out.message = std::string(trim(line.substr(i)));
        out.tokens.pop_back();
        out.tokens.push_back("message");
        return out;
      }
    } else if (c == '[' || c == ']' || c == '|') {
      flush();
      out.tokens.emplace_back(1, c);
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      flush();
      out.tokens.emplace_back("->");
      ++i;
    } else {
      cur.push_back(c);
    }
  }
  flush();
  if (!out.tokens.empty() && out.tokens.back() == "message") out.message = "";
  return out;
}

class Parser {
 public:
  explicit Parser(const SourceText& src) : src_(src) {}

  GameAst run() {
    int n = src_.line_count();
    std::vector<std::string> lines;
    lines.reserve(n);
    for (int i = 1; i <= n; ++i) lines.emplace_back(src_.line(i));

    for (int i = 0; i < n; ++i) {
      int lineno = i + 1;
      std::string_view t = trim(lines[i]);
      if (t.empty()) {
        blank_line();
        continue;
      }
      if (is_underline(t)) continue;
      if (auto header = section_from_header(t)) {
        finish_section();
        section_ = *header;
        seen_sections_.insert(section_);
        continue;
      }
      // A word underlined with '=' that is not a known section name.
      if (i + 1 < n && is_underline(trim(lines[i + 1])) &&
          t.find(' ') == std::string_view::npos && section_ != Section::kLevels) {
        error(lineno, "malformed section header '" + std::string(t) + "'");
        continue;
      }
      switch (section_) {
        case Section::kPrelude: prelude_line(t, lineno); break;
        case Section::kObjects: object_line(t, lineno); break;
        case Section::kLegend: legend_line(t, lineno); break;
        case Section::kSounds: ast_.sounds.emplace_back(t); break;
        case Section::kCollisionLayers: layer_line(t, lineno); break;
        case Section::kRules: {
          // Rules may continue onto following lines while a bracket is open
          // or the line ends with an arrow.
          std::string joined(t);
          int start = lineno;
          while (needs_continuation(joined) && i + 1 < n) {
            ++i;
            joined += " ";
            joined += trim(lines[i]);
          }
          rule_line(joined, start);
          break;
        }
        case Section::kWinConditions: win_line(t, lineno); break;
        case Section::kLevels: level_line(lines[i], t, lineno); break;
      }
    }
    finish_section();
    if (!errors_.empty()) {
      std::vector<Diagnostic> all = errors_;
      all.insert(all.end(), ast_.warnings.begin(), ast_.warnings.end());
      throw CompileError(std::move(all));
    }
    return std::move(ast_);
  }

 private:
  void error(int line, std::string msg) {
    errors_.push_back({Severity::kError, section_name(section_), line, std::move(msg)});
  }

  static bool needs_continuation(std::string_view s) {
    int depth = 0;
    for (char c : s) {
      if (c == '[') ++depth;
      if (c == ']') --depth;
    }
    if (depth > 0) return true;
    std::string_view t = trim(s);
    return t.size() >= 2 && t.substr(t.size() - 2) == "->";
  }

  void blank_line() {
    if (section_ == Section::kObjects) finish_object();
    if (section_ == Section::kLevels) finish_level();
  }

  void finish_section() {
    if (section_ == Section::kObjects) finish_object();
    if (section_ == Section::kLevels) finish_level();
  }

  // ---- prelude
  void prelude_line(std::string_view t, int lineno) {
    auto sp = t.find_first_of(" \t");
    PreludeEntry e;
    e.line = lineno;
    if (sp == std::string_view::npos) {
      e.key = std::string(t);
    } else {
      e.key = std::string(t.substr(0, sp));
      e.value = std::string(trim(t.substr(sp)));
    }
    std::transform(e.key.begin(), e.key.end(), e.key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    ast_.prelude.push_back(std::move(e));
  }

  // ---- objects
  enum class ObjState { kName, kColors, kSprite };

  void object_line(std::string_view t, int lineno) {
    if (obj_state_ == ObjState::kSprite) {
      if (is_sprite_row(t) && sprite_rows_.size() < 5) {
        sprite_rows_.emplace_back(t);
        if (sprite_rows_.size() == 5) finish_object();
        return;
      }
      finish_object();
    }
    if (obj_state_ == ObjState::kColors && cur_obj_) {
      cur_obj_->colors = split_ws(t);
      obj_state_ = ObjState::kSprite;
      return;
    }
    // Name line.
    finish_object();
    auto toks = split_ws(t);
    ObjectDecl d;
    d.name = toks[0];
    d.line = lineno;
    if (toks.size() >= 2) {
      if (toks[1].size() != 1 || toks.size() > 2) {
        error(lineno, "object declaration '" + std::string(t) +
                          "' should be a name and an optional single glyph");
      } else {
        d.glyph = toks[1][0];
      }
    }
    cur_obj_ = std::move(d);
    obj_state_ = ObjState::kColors;
  }

  void finish_object() {
    if (!cur_obj_) return;
    ObjectDecl d = std::move(*cur_obj_);
    cur_obj_.reset();
    if (obj_state_ == ObjState::kColors) {
      error(d.line, "object '" + d.name + "' is missing its color line");
    }
    if (!sprite_rows_.empty()) {
      bool ok = sprite_rows_.size() == 5;
      for (const auto& r : sprite_rows_) ok = ok && r.size() == 5;
      if (!ok) {
        error(d.line, "sprite for object '" + d.name + "' must be 5x5");
      } else {
        Sprite sp{};
        for (int y = 0; y < 5; ++y) {
          for (int x = 0; x < 5; ++x) {
            char c = sprite_rows_[y][x];
            int8_t v = c == '.' ? int8_t{-1} : static_cast<int8_t>(c - '0');
            if (v >= static_cast<int>(d.colors.size())) {
              error(d.line, "sprite for object '" + d.name +
                                "' uses a palette index without a color");
            }
            sp[y][x] = v;
          }
        }
        d.sprite = sp;
      }
    }
    sprite_rows_.clear();
    obj_state_ = ObjState::kName;
    for (const auto& o : ast_.objects) {
      if (o.name == d.name) {
        error(d.line, "duplicate object name '" + d.name + "'");
        return;
      }
    }
    ast_.objects.push_back(std::move(d));
  }

  // ---- legend
  void legend_line(std::string_view t, int lineno) {
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      error(lineno, "legend line needs the form 'name = value'");
      return;
    }
    LegendDecl d;
    d.line = lineno;
    d.name = std::string(trim(t.substr(0, eq)));
    auto rhs = split_ws(t.substr(eq + 1));
    if (d.name.empty() || d.name.find(' ') != std::string::npos || rhs.empty()) {
      error(lineno, "legend line needs the form 'name = value'");
      return;
    }
    bool saw_or = false, saw_and = false;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      if (i % 2 == 1) {
        if (rhs[i] == "or") saw_or = true;
        else if (rhs[i] == "and") saw_and = true;
        else {
          error(lineno, "expected 'and' or 'or' in legend, found '" + rhs[i] + "'");
          return;
        }
      } else {
        d.targets.push_back(rhs[i]);
      }
    }
    if (rhs.size() % 2 == 0) {
      error(lineno, "legend definition ends with an operator");
      return;
    }
    d.mixed_operators = saw_or && saw_and;
    d.kind = saw_and ? LegendDecl::Kind::kAnd
                     : (saw_or ? LegendDecl::Kind::kOr : LegendDecl::Kind::kAlias);
    ast_.legend.push_back(std::move(d));
  }

  // ---- collision layers
  void layer_line(std::string_view t, int lineno) {
    std::string s(t);
    std::replace(s.begin(), s.end(), ',', ' ');
    LayerLine l;
    l.names = split_ws(s);
    l.line = lineno;
    ast_.collision_layers.push_back(std::move(l));
  }

  // ---- rules
  void rule_line(std::string_view t, int lineno) {
    RuleAst r;
    r.line = lineno;
    if (t == "startloop") {
      r.kind = RuleAst::Kind::kStartLoop;
      ast_.rule_lines.push_back(std::move(r));
      return;
    }
    if (t == "endloop") {
      r.kind = RuleAst::Kind::kEndLoop;
      ast_.rule_lines.push_back(std::move(r));
      return;
    }
    RuleTokens rt = tokenize_rule(t);
    const auto& toks = rt.tokens;
    std::size_t i = 0;
    for (; i < toks.size() && toks[i] != "["; ++i) {
      if (toks[i] == "+") {
        r.joined = true;
        continue;
      }
      if (!rule_prefixes().count(toks[i])) {
        error(lineno, "unknown rule prefix '" + toks[i] + "'");
        return;
      }
      r.prefixes.push_back(toks[i]);
    }
    if (i == toks.size()) {
      error(lineno, "rule has no pattern");
      return;
    }
    if (!parse_kernels(toks, i, r.lhs, lineno)) return;
    if (i >= toks.size() || toks[i] != "->") {
      error(lineno, "rule is missing '->'");
      return;
    }
    ++i;
    if (i < toks.size() && toks[i] == "[") {
      if (!parse_kernels(toks, i, r.rhs, lineno)) return;
    }
    for (; i < toks.size(); ++i) {
      if (!is_command(toks[i])) {
        error(lineno, "unexpected token '" + toks[i] + "' after rule pattern");
        return;
      }
      r.commands.push_back(toks[i]);
    }
    if (rt.message) r.message = rt.message;
    if (!r.rhs.empty()) {
      if (r.rhs.size() != r.lhs.size()) {
        error(lineno, "left and right patterns have a different number of kernels");
        return;
      }
      for (std::size_t k = 0; k < r.lhs.size(); ++k) {
        if (r.lhs[k].size() != r.rhs[k].size()) {
          error(lineno, "kernel length mismatch: left kernel " + std::to_string(k + 1) +
                            " has " + std::to_string(r.lhs[k].size()) +
                            " cells, right has " + std::to_string(r.rhs[k].size()));
          return;
        }
        for (std::size_t c = 0; c < r.lhs[k].size(); ++c) {
          if (r.lhs[k][c].ellipsis != r.rhs[k][c].ellipsis) {
            error(lineno, "'...' on the right must line up with '...' on the left");
            return;
          }
        }
      }
    }
    ast_.rule_lines.push_back(std::move(r));
  }

  // Parses consecutive `[ ... ]` groups starting at toks[i].
  bool parse_kernels(const std::vector<std::string>& toks, std::size_t& i,
                     std::vector<KernelAst>& out, int lineno) {
    while (i < toks.size() && toks[i] == "[") {
      ++i;
      KernelAst kernel;
      std::vector<std::string> cell_toks;
      bool closed = false;
      auto flush_cell = [&]() -> bool {
        CellAst cell;
        if (cell_toks.size() == 1 && cell_toks[0] == "...") {
          cell.ellipsis = true;
        } else {
          for (std::size_t j = 0; j < cell_toks.size(); ++j) {
            const std::string& tok = cell_toks[j];
            if (tok == "...") {
              error(lineno, "'...' must occupy a cell of its own");
              return false;
            }
            CellEntryAst e;
            if (cell_qualifiers().count(tok) && j + 1 < cell_toks.size()) {
              e.qualifier = tok;
              e.name = cell_toks[++j];
            } else {
              e.name = tok;
            }
            cell.entries.push_back(std::move(e));
          }
        }
        kernel.push_back(std::move(cell));
        cell_toks.clear();
        return true;
      };
      for (; i < toks.size(); ++i) {
        if (toks[i] == "]") {
          if (!flush_cell()) return false;
          closed = true;
          ++i;
          break;
        }
        if (toks[i] == "|") {
          if (!flush_cell()) return false;
          continue;
        }
        if (toks[i] == "[" || toks[i] == "->") break;
        cell_toks.push_back(toks[i]);
      }
      if (!closed) {
        error(lineno, "unclosed '[' in rule");
        return false;
      }
      out.push_back(std::move(kernel));
    }
    return true;
  }

  // ---- win conditions
  void win_line(std::string_view t, int lineno) {
    auto toks = split_ws(t);
    WinConditionAst w;
    w.line = lineno;
    bool ok = false;
    if (toks.size() == 2) {
      ok = toks[0] == "some" || toks[0] == "any" || toks[0] == "no";
    } else if (toks.size() == 4 && toks[2] == "on") {
      ok = toks[0] == "all" || toks[0] == "some" || toks[0] == "any" || toks[0] == "no";
      w.target = toks[3];
    }
    if (!ok) {
      error(lineno, "malformed win condition '" + std::string(t) + "'");
      return;
    }
    w.quantifier = toks[0] == "any" ? "some" : toks[0];
    w.subject = toks[1];
    ast_.win_conditions.push_back(std::move(w));
  }

  // ---- levels
  void level_line(const std::string& raw, std::string_view t, int lineno) {
    if (t.size() >= 7 && t.substr(0, 7) == "message" &&
        (t.size() == 7 || t[7] == ' ' || t[7] == '\t')) {
      finish_level();
      LevelAst m;
      m.is_message = true;
      m.message = std::string(trim(t.substr(7)));
      m.line = lineno;
      ast_.levels.push_back(std::move(m));
      return;
    }
    (void)raw;
    if (!cur_level_) {
      cur_level_ = LevelAst{};
      cur_level_->line = lineno;
    }
    cur_level_->rows.emplace_back(t);
  }

  char background_glyph() const {
    for (const auto& l : ast_.legend) {
      if (l.name.size() == 1 && l.targets.size() == 1 && l.targets[0] == "background") {
        return l.name[0];
      }
    }
    for (const auto& o : ast_.objects) {
      if (o.name == "background" && o.glyph) return *o.glyph;
    }
    return '.';
  }

  void finish_level() {
    if (!cur_level_) return;
    LevelAst l = std::move(*cur_level_);
    cur_level_.reset();
    std::size_t width = 0;
    for (const auto& r : l.rows) width = std::max(width, r.size());
    char pad = background_glyph();
    for (auto& r : l.rows) r.resize(width, pad);
    ast_.levels.push_back(std::move(l));
  }

  const SourceText& src_;
  GameAst ast_;
  Section section_ = Section::kPrelude;
  std::set<Section> seen_sections_;
  std::vector<Diagnostic> errors_;

  ObjState obj_state_ = ObjState::kName;
  std::optional<ObjectDecl> cur_obj_;
  std::vector<std::string> sprite_rows_;

  std::optional<LevelAst> cur_level_;
};

}  // namespace

const PreludeEntry* GameAst::find_prelude(std::string_view key) const {
  for (const auto& e : prelude) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

GameAst parse(const SourceText& source) { return Parser(source).run(); }

GameAst parse_game(const SourceText& source) { return parse(preprocess(source)); }

std::string render_level_rows(const LevelAst& level) {
  std::string out;
  for (const auto& r : level.rows) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace pscript
