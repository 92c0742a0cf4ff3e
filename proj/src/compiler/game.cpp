#include <algorithm>

#include "pscript/compiler.hpp"

namespace pscript {

int GameDef::compiled_variant_count() const {
  int n = 0;
  for (const auto* list : {&blocks, &late_blocks}) {
    for (const Block& b : *list) {
      for (const RuleGroup& g : b.groups) n += static_cast<int>(g.rules.size());
    }
  }
  return n;
}

namespace {

template <typename Pred>
bool any_rule(const GameDef& game, Pred pred) {
  for (const auto* list : {&game.blocks, &game.late_blocks}) {
    for (const Block& b : *list) {
      for (const RuleGroup& g : b.groups) {
        for (const CompiledRule& r : g.rules) {
          if (pred(r)) return true;
        }
      }
    }
  }
  return false;
}

bool truthy_flag(const PreludeEntry& e) {
  return !e.value || (*e.value != "0" && *e.value != "false" && *e.value != "off");
}

std::optional<double> parse_number(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  try {
    return std::stod(*s);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

PreludeFlags build_prelude(const GameAst& ast) {
  PreludeFlags p;
  for (const PreludeEntry& e : ast.prelude) {
    const std::string value = e.value.value_or("");
    if (e.key == "title") p.title = value;
    else if (e.key == "author") p.author = value;
    else if (e.key == "homepage") p.homepage = value;
    else if (e.key == "run_rules_on_level_start") p.run_rules_on_level_start = truthy_flag(e);
    else if (e.key == "noaction") p.noaction = truthy_flag(e);
    else if (e.key == "norepeat_action") p.norepeat_action = truthy_flag(e);
    else if (e.key == "noundo") p.noundo = truthy_flag(e);
    else if (e.key == "norestart") p.norestart = truthy_flag(e);
    else if (e.key == "require_player_movement") p.require_player_movement = truthy_flag(e);
    else if (e.key == "flickscreen") p.flickscreen = value;
    else if (e.key == "zoomscreen") p.zoomscreen = value;
    else if (e.key == "background_color") p.background_color = value;
    else if (e.key == "text_color") p.text_color = value;
    else if (e.key == "again_interval") p.again_interval = parse_number(e.value);
    else if (e.key == "realtime_interval") p.realtime_interval = parse_number(e.value);
    else p.other.emplace_back(e.key, e.value);
  }
  return p;
}

class GameCompiler {
 public:
  explicit GameCompiler(const GameAst& ast) : ast_(ast) {}

  GameDef run() {
    game_.warnings = ast_.warnings;
    game_.object_table = build_object_table(ast_);
    game_.legend_table = resolve_legend(ast_, game_.object_table);
    game_.layer_table =
        build_layers(ast_, game_.object_table, game_.legend_table, &game_.warnings);
    game_.prelude = build_prelude(ast_);
    resolve_special_names();
    if (errors_.empty()) compile_rules();
    compile_win_conditions();
    if (errors_.empty()) compile_levels();
    if (!errors_.empty()) {
      errors_.insert(errors_.end(), game_.warnings.begin(), game_.warnings.end());
      throw CompileError(std::move(errors_));
    }
    return std::move(game_);
  }

 private:
  void error(const char* section, int line, std::string msg) {
    errors_.push_back({Severity::kError, section, line, std::move(msg)});
  }

  const ObjectTable& objects() const { return game_.object_table; }

  void resolve_special_names() {
    auto player = game_.legend_table.resolve("player", objects());
    if (!player || player->members.empty()) {
      error("legend", 0, "no object or legend entry named 'player'");
    } else if (player->kind == LegendTable::Kind::kAggregate) {
      error("legend", 0, "'player' cannot be an aggregate");
    } else {
      game_.player_ids = player->members;
    }
    auto background = game_.legend_table.resolve("background", objects());
    if (!background || background->members.empty()) {
      error("legend", 0, "no object or legend entry named 'background'");
    } else {
      game_.background_id = background->members.first();
    }
    for (const ObjectRecord& o : objects().objects) {
      if (game_.layer_table.layer_of[o.id] < 0 &&
          (game_.player_ids.test(o.id) || o.id == game_.background_id)) {
        error("collisionlayers", o.line,
              "object '" + o.name + "' is not assigned to a collision layer");
      }
    }
  }

  void compile_rules() {
    const CompileTables tables{game_.object_table, game_.legend_table, game_.layer_table};
    bool in_loop = false;
    int loop_line = 0;
    // Index of the open block in each partition, or -1 to start a new one.
    int open_early = -1;
    int open_late = -1;
    RuleGroup* last_group = nullptr;

    auto target_block = [&](bool late) -> Block& {
      auto& list = late ? game_.late_blocks : game_.blocks;
      int& open = late ? open_late : open_early;
      if (open < 0) {
        list.push_back(Block{in_loop, {}});
        open = static_cast<int>(list.size()) - 1;
      }
      return list[open];
    };

    for (const RuleAst& line : ast_.rule_lines) {
      if (line.kind == RuleAst::Kind::kStartLoop) {
        if (in_loop) error("rules", line.line, "nested startloop");
        in_loop = true;
        loop_line = line.line;
        open_early = open_late = -1;
        last_group = nullptr;
        continue;
      }
      if (line.kind == RuleAst::Kind::kEndLoop) {
        if (!in_loop) error("rules", line.line, "endloop without startloop");
        in_loop = false;
        open_early = open_late = -1;
        last_group = nullptr;
        continue;
      }
      ++game_.source_rule_lines;
      RuleGroup group;
      try {
        group = compile_rule(line, tables);
      } catch (const UnsupportedFeatureError&) {
        throw;
      } catch (const CompileError& e) {
        errors_.insert(errors_.end(), e.diagnostics().begin(), e.diagnostics().end());
        continue;
      }
      if (line.joined) {
        if (!last_group) {
          error("rules", line.line, "'+' continues a rule group but there is none to continue");
          continue;
        }
        if (last_group->is_late != group.is_late) {
          error("rules", line.line, "'+' joins a late rule with a non-late group");
          continue;
        }
        for (CompiledRule& r : group.rules) {
          r.is_random = last_group->is_random;
          last_group->rules.push_back(std::move(r));
        }
        continue;
      }
      Block& block = target_block(group.is_late);
      block.groups.push_back(std::move(group));
      last_group = &block.groups.back();
    }
    if (in_loop) error("rules", loop_line, "startloop without endloop");
  }

  std::optional<ObjectMask> win_operand(const std::string& name, int line) {
    auto r = game_.legend_table.resolve(name, objects());
    if (!r) {
      error("winconditions", line, "unknown name '" + name + "' in win condition");
      return std::nullopt;
    }
    return r->members;
  }

  void compile_win_conditions() {
    for (const WinConditionAst& w : ast_.win_conditions) {
      WinCondition wc;
      wc.line = w.line;
      wc.a_name = w.subject;
      auto a = win_operand(w.subject, w.line);
      if (!a) continue;
      wc.a = *a;
      if (w.target) {
        wc.b_name = *w.target;
        auto b = win_operand(*w.target, w.line);
        if (!b) continue;
        wc.b = *b;
        if (w.quantifier == "all") wc.kind = WinCondition::Kind::kAllOn;
        else if (w.quantifier == "some") wc.kind = WinCondition::Kind::kSomeOn;
        else wc.kind = WinCondition::Kind::kNoOn;
      } else {
        wc.kind = w.quantifier == "no" ? WinCondition::Kind::kNone : WinCondition::Kind::kSome;
      }
      game_.win_conditions.push_back(std::move(wc));
    }
  }

  void compile_levels() {
    const LayerTable& layers = game_.layer_table;
    const int background_layer = layers.layer_of[game_.background_id];
    for (const LevelAst& lv : ast_.levels) {
      LevelDef def;
      def.line = lv.line;
      if (lv.is_message) {
        def.is_message = true;
        def.message = lv.message;
        game_.levels.push_back(std::move(def));
        continue;
      }
      def.rows = lv.rows;
      def.height = static_cast<int>(lv.rows.size());
      for (const std::string& row : lv.rows) {
        def.width = std::max(def.width, static_cast<int>(row.size()));
      }
      bool ok = true;
      for (int y = 0; y < def.height && ok; ++y) {
        for (int x = 0; x < def.width; ++x) {
          const char ch = x < static_cast<int>(lv.rows[y].size()) ? lv.rows[y][x] : '.';
          auto it = game_.legend_table.glyphs.find(ch);
          if (it == game_.legend_table.glyphs.end()) {
            error("levels", lv.line + y, std::string("unknown glyph '") + ch + "' in level");
            ok = false;
            break;
          }
          if (auto r = game_.legend_table.resolve(std::string(1, ch), objects());
              r && r->kind == LegendTable::Kind::kMeta) {
            error("levels", lv.line + y,
                  std::string("glyph '") + ch + "' is ambiguous ('or' definition) in a level");
            ok = false;
            break;
          }
          ObjectMask cell = it->second;
          std::vector<int> per_layer(layers.size(), 0);
          for (ObjectId id : cell.ids()) {
            int l = layers.layer_of[id];
            if (l < 0) {
              error("levels", lv.line + y, "object '" + objects().objects[id].name +
                                               "' is not assigned to a collision layer");
              ok = false;
            } else if (++per_layer[l] > 1) {
              error("levels", lv.line + y,
                    std::string("glyph '") + ch + "' places two objects on one collision layer");
              ok = false;
            }
          }
          if (!ok) break;
          if (per_layer[background_layer] == 0) cell.set(game_.background_id);
          def.cells.push_back(cell);
        }
      }
      if (ok) game_.levels.push_back(std::move(def));
    }
  }

  const GameAst& ast_;
  GameDef game_;
  std::vector<Diagnostic> errors_;
};

}  // namespace

bool GameDef::uses_randomness() const {
  return any_rule(*this, [](const CompiledRule& r) { return r.uses_random; });
}

bool GameDef::uses_checkpoint() const {
  return any_rule(*this, [](const CompiledRule& r) { return r.commands.checkpoint; });
}

bool GameDef::references_action() const {
  return any_rule(*this, [](const CompiledRule& r) { return r.references_action; });
}

std::vector<int> GameDef::playable_levels() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(levels.size()); ++i) {
    if (!levels[i].is_message) out.push_back(i);
  }
  return out;
}

GameDef compile_game(const GameAst& ast) { return GameCompiler(ast).run(); }

GameDef compile_source(const SourceText& source) {
  GameDef game = compile_game(parse_game(source));
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : source.raw()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  game.source_digest = h;
  return game;
}

std::shared_ptr<const GameDef> load_game(const std::string& path) {
  return std::make_shared<const GameDef>(compile_source(load_source_file(path)));
}

}  // namespace pscript
