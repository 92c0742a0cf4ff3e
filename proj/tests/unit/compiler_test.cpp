#include <gtest/gtest.h>

#include <set>
#include <string>

#include "pscript/compiler.hpp"
#include "support.hpp"

namespace pscript {
namespace {

using testkit::compile_text;
using testkit::read_file;

std::string limerick_text() { return read_file(testkit::fixtures_dir() + "/limerick_appendix.txt"); }

// Four objects on four layers plus a meta name, for rule-level tests.
const char* kProbeGame = R"(title probe

objects
background
black
a
red
b
blue
c
green
d
white
wall
brown

legend
. = background
# = wall
p = a
player = a
any = a or b
pair = c and d

collisionlayers
background
a
b
c
d
wall

rules
%RULES%

winconditions
some a

levels
#p..#
)";

std::string probe_with_rules(const std::string& rules) {
  std::string text = kProbeGame;
  text.replace(text.find("%RULES%"), 7, rules);
  return text;
}

// Compiles the first rule line of `rules` against the probe game's tables.
RuleGroup compile_probe_rule(const std::string& rules) {
  const std::string text = probe_with_rules(rules);
  const GameAst ast = parse_game(SourceText(text));
  const GameDef game = compile_game(ast);
  const CompileTables tables{game.object_table, game.legend_table, game.layer_table};
  return compile_rule(ast.rule_lines.at(0), tables);
}

ObjectId id_of(const GameDef& g, const char* name) {
  auto id = g.object_table.find(name);
  if (!id) throw std::runtime_error(std::string("no object ") + name);
  return *id;
}

TEST(Legend, LimeRickObstacleMembers) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  const auto r = g.legend_table.resolve("obstacle", g.object_table);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, LegendTable::Kind::kMeta);
  // Two bodies, wall, crate and the four heads behind Player.
  EXPECT_EQ(r->members.count(), 8);
  for (const char* n : {"playerbodyh", "playerbodyv", "wall", "crate", "playerhead1", "playerhead2",
                        "playerhead3", "playerhead4"}) {
    EXPECT_TRUE(r->members.test(id_of(g, n))) << n;
  }
}

TEST(Legend, GlyphAliasBindsOneAtom) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  ASSERT_TRUE(g.legend_table.glyphs.count('p'));
  const ObjectMask& m = g.legend_table.glyphs.at('p');
  EXPECT_EQ(m.count(), 1);
  EXPECT_TRUE(m.test(id_of(g, "playerhead1")));
}

TEST(Legend, AggregateDeduplicates) {
  std::string t = probe_with_rules("");
  t.replace(t.find("pair = c and d"), 14, "pair = c and d and c\nsolo = a and a");
  const GameDef g = compile_source(SourceText(t));
  ASSERT_TRUE(g.legend_table.aggregate.count("pair"));
  const ObjectMask& m = g.legend_table.aggregate.at("pair");
  EXPECT_EQ(m.count(), 2);
  EXPECT_TRUE(m.test(id_of(g, "c")));
  EXPECT_TRUE(m.test(id_of(g, "d")));
  // A single distinct member degrades to a plain alias.
  ASSERT_TRUE(g.legend_table.alias.count("solo"));
  EXPECT_EQ(g.legend_table.alias.at("solo"), id_of(g, "a"));
}

TEST(Legend, NestedOrFlattens) {
  std::string t = probe_with_rules("");
  t.replace(t.find("pair = c and d"), 14, "cd = c or d\nall4 = any or cd");
  const GameDef g = compile_source(SourceText(t));
  const auto r = g.legend_table.resolve("all4", g.object_table);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, LegendTable::Kind::kMeta);
  EXPECT_EQ(r->members.count(), 4);
}

TEST(Legend, ResolvingAtomicIsFixpoint) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  for (const ObjectRecord& o : g.object_table.objects) {
    const auto r = g.legend_table.resolve(o.name, g.object_table);
    ASSERT_TRUE(r) << o.name;
    EXPECT_EQ(r->members, ObjectMask::of({o.id})) << o.name;
  }
}

TEST(Legend, Errors) {
  auto with_legend = [](const std::string& line) {
    std::string t = probe_with_rules("");
    t.replace(t.find("pair = c and d"), 14, line);
    return t;
  };
  EXPECT_THROW(compile_source(SourceText(with_legend("m = a and b or c"))), CompileError);
  EXPECT_THROW(compile_source(SourceText(with_legend("m = a or ghost"))), CompileError);
  EXPECT_THROW(compile_source(SourceText(with_legend("m = n or a\nn = m or b"))), CompileError);
}

TEST(Legend, LookupIsCaseInsensitiveThroughSource) {
  std::string t = probe_with_rules("[ A ] -> [ A ]");
  EXPECT_NO_THROW(compile_source(SourceText(t)));
}

TEST(Layers, LimeRick) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  ASSERT_EQ(g.num_layers(), 4);
  EXPECT_EQ(g.layer_table.layers[0], std::vector<ObjectId>{g.background_id});
  const int top = g.layer_table.layer_of[id_of(g, "wall")];
  for (const char* n : {"playerhead1", "playerhead2", "playerhead3", "playerhead4", "crate"}) {
    EXPECT_EQ(g.layer_table.layer_of[id_of(g, n)], top) << n;
  }
  EXPECT_EQ(top, 3);
}

TEST(Layers, RedeclaredObjectTakesLaterLayerWithWarning) {
  std::string t = probe_with_rules("");
  t.replace(t.find("\nd\nwall\n"), 8, "\nd\nwall, a\n");
  const GameAst ast = parse_game(SourceText(t));
  const ObjectTable objects = build_object_table(ast);
  const LegendTable legend = resolve_legend(ast, objects);
  std::vector<Diagnostic> warnings;
  const LayerTable layers = build_layers(ast, objects, legend, &warnings);
  const ObjectId a = *objects.find("a");
  const ObjectId wall = *objects.find("wall");
  EXPECT_EQ(layers.layer_of[a], layers.layer_of[wall]);
  ASSERT_FALSE(warnings.empty());
  EXPECT_EQ(warnings.front().severity, Severity::kWarning);
}

TEST(Layers, MetaNameExpandsToMembers) {
  std::string t = probe_with_rules("");
  t.replace(t.find("\na\nb\nc\nd\n"), 9, "\nany\nc\nd\n");
  const GameDef g = compile_source(SourceText(t));
  EXPECT_EQ(g.layer_table.layer_of[id_of(g, "a")], g.layer_table.layer_of[id_of(g, "b")]);
}

TEST(Layers, UnassignedObjectIsAnError) {
  std::string t = probe_with_rules("[ d ] -> [ ]");
  t.replace(t.find("\nd\nwall\n"), 8, "\nwall\n");
  EXPECT_THROW(compile_source(SourceText(t)), CompileError);
}

TEST(CompileRule, PushRuleHasFourVariantsUpFirst) {
  const RuleGroup g = compile_probe_rule("[ > a | b ] -> [ > a | > b ]");
  ASSERT_EQ(g.rules.size(), 4u);
  const Direction order[] = {Direction::kUp, Direction::kDown, Direction::kLeft, Direction::kRight};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(g.rules[i].direction, order[i]);
  const CompiledRule& up = g.rules[0];
  ASSERT_EQ(up.lhs.size(), 1u);
  ASSERT_EQ(up.lhs[0].size(), 2u);
  const PatternEntry& e = up.lhs[0][0].entries.at(0);
  EXPECT_EQ(e.qualifier, Qualifier::kForce);
  EXPECT_EQ(e.force, kForceUp);
}

TEST(CompileRule, HorizontalPrefixGivesLeftRight) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  const GameAst ast = parse_game(SourceText(limerick_text()));
  const CompileTables tables{g.object_table, g.legend_table, g.layer_table};
  const RuleGroup h = compile_rule(ast.rule_lines.at(5), tables);
  ASSERT_EQ(h.rules.size(), 2u);
  EXPECT_EQ(h.rules[0].direction, Direction::kLeft);
  EXPECT_EQ(h.rules[1].direction, Direction::kRight);
  const RuleGroup u = compile_rule(ast.rule_lines.at(0), tables);
  ASSERT_EQ(u.rules.size(), 1u);
  EXPECT_EQ(u.rules[0].direction, Direction::kUp);
}

TEST(CompileRule, LimeRickVariantTotal) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  // 4 UP lines, 2 horizontal lines x2, two single-cell apple lines, one
  // `[ > Player ]` line x4, two DOWN lines.
  EXPECT_EQ(g.compiled_variant_count(), 4 + 4 + 1 + 1 + 4 + 2);
  EXPECT_EQ(g.source_rule_lines, 11);
}

// Independent table of relative directions per rule direction: > < ^ v.
uint8_t expected_relative(Direction d, char token) {
  static const std::map<Direction, std::array<uint8_t, 4>> table{
      {Direction::kUp, {kForceUp, kForceDown, kForceLeft, kForceRight}},
      {Direction::kDown, {kForceDown, kForceUp, kForceRight, kForceLeft}},
      {Direction::kLeft, {kForceLeft, kForceRight, kForceDown, kForceUp}},
      {Direction::kRight, {kForceRight, kForceLeft, kForceUp, kForceDown}},
  };
  const std::string tokens = "><^v";
  return table.at(d)[tokens.find(token)];
}

TEST(CompileRule, RelativeTokensMapPerVariantAndInvert) {
  const RuleGroup g = compile_probe_rule("[ > a | < b | ^ c | v d ] -> [ > a | < b | ^ c | v d ]");
  ASSERT_EQ(g.rules.size(), 4u);
  const std::string tokens = "><^v";
  for (const CompiledRule& r : g.rules) {
    ASSERT_EQ(r.lhs.at(0).size(), 4u);
    for (int i = 0; i < 4; ++i) {
      const PatternEntry& e = r.lhs[0][i].entries.at(0);
      EXPECT_EQ(e.force, expected_relative(r.direction, tokens[i]))
          << direction_name(r.direction) << " cell " << i;
      // Inverse: exactly one relative token maps to this force.
      int hits = 0;
      char recovered = '?';
      for (char t : tokens) {
        if (expected_relative(r.direction, t) == e.force) {
          ++hits;
          recovered = t;
        }
      }
      EXPECT_EQ(hits, 1);
      EXPECT_EQ(recovered, tokens[i]);
    }
  }
}

TEST(CompileRule, AbsoluteTokensUnchanged) {
  const RuleGroup g = compile_probe_rule("[ left a | b ] -> [ left a | b ]");
  ASSERT_EQ(g.rules.size(), 4u);
  for (const CompiledRule& r : g.rules) EXPECT_EQ(r.lhs[0][0].entries.at(0).force, kForceLeft);
}

TEST(CompileRule, NonDirectionalCollapses) {
  EXPECT_EQ(compile_probe_rule("[ a b ] -> [ a ]").rules.size(), 1u);
  EXPECT_EQ(compile_probe_rule("[ a ] [ b ] -> [ a ] [ ]").rules.size(), 1u);
}

TEST(CompileRule, UnboundRhsMetaIsAnError) {
  EXPECT_THROW(compile_probe_rule("[ c ] -> [ any ]"), CompileError);
}

TEST(CompileRule, MovingOnRhsNeedsBinding) {
  EXPECT_THROW(compile_probe_rule("[ a ] -> [ moving a ]"), CompileError);
  EXPECT_NO_THROW(compile_probe_rule("[ moving a | b ] -> [ moving a | moving b ]"));
}

TEST(CompileRule, AggregateInRuleIsAnError) {
  EXPECT_THROW(compile_probe_rule("[ pair ] -> [ ]"), CompileError);
}

TEST(CompileRule, CommandOnlyRule) {
  const RuleGroup g = compile_probe_rule("[ a ] -> win");
  ASSERT_EQ(g.rules.size(), 1u);
  EXPECT_TRUE(g.rules[0].rhs.empty());
  EXPECT_TRUE(g.rules[0].commands.win);
}

TEST(CompileRule, RigidIsUnsupported) {
  try {
    compile_probe_rule("rigid [ > a | b ] -> [ > a | > b ]");
    FAIL() << "expected UnsupportedFeatureError";
  } catch (const UnsupportedFeatureError& e) {
    EXPECT_EQ(e.feature(), "rigid");
    EXPECT_NE(std::string(e.what()).find("rigid"), std::string::npos);
  }
}

TEST(CompileGame, LimeRick) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  EXPECT_EQ(g.playable_levels(), std::vector<int>{1});
  const LevelDef& l = g.levels.at(1);
  EXPECT_EQ(l.width, 19);
  EXPECT_EQ(l.height, 15);
  ASSERT_EQ(g.win_conditions.size(), 1u);
  const WinCondition& w = g.win_conditions[0];
  EXPECT_EQ(w.kind, WinCondition::Kind::kSomeOn);
  EXPECT_EQ(w.a, g.player_ids);
  EXPECT_EQ(w.a.count(), 4);
  ASSERT_TRUE(w.b);
  EXPECT_EQ(*w.b, ObjectMask::of({id_of(g, "exit")}));
  for (const ObjectMask& cell : l.cells) EXPECT_TRUE(cell.test(g.background_id));
}

TEST(CompileGame, BlocksStyleEmptyRules) {
  const GameDef g = compile_source(SourceText(read_file(testkit::games_dir() + "/blocks.txt")));
  EXPECT_EQ(g.compiled_variant_count(), 0);
  EXPECT_FALSE(g.win_conditions.empty());
}

TEST(CompileGame, JoinedLinesShareGroupAndLateIsSeparate) {
  const GameDef g = compile_source(SourceText(probe_with_rules(
      "[ a ] -> [ a ]\n+ [ b ] -> [ b ]\nlate [ c ] -> [ c ]\nstartloop\n[ d ] -> [ d ]\nendloop")));
  ASSERT_GE(g.blocks.size(), 2u);
  EXPECT_FALSE(g.blocks[0].is_loop);
  ASSERT_EQ(g.blocks[0].groups.size(), 1u);
  EXPECT_EQ(g.blocks[0].groups[0].rules.size(), 2u);
  EXPECT_TRUE(g.blocks.back().is_loop);
  int late_groups = 0;
  for (const Block& b : g.late_blocks) late_groups += static_cast<int>(b.groups.size());
  EXPECT_EQ(late_groups, 1);
}

TEST(CompileGame, UnknownGlyphAndWinName) {
  std::string t = probe_with_rules("");
  t.replace(t.find("#p..#"), 5, "#pz.#");
  EXPECT_THROW(compile_source(SourceText(t)), CompileError);
  std::string t2 = probe_with_rules("");
  t2.replace(t2.find("some a"), 6, "some ghost");
  EXPECT_THROW(compile_source(SourceText(t2)), CompileError);
}

TEST(CompileGame, LevelCellsRespectLayers) {
  std::string t = probe_with_rules("");
  t.replace(t.find("pair = c and d"), 14, "q = a and any");
  t.replace(t.find("#p..#"), 5, "#q..#");
  EXPECT_THROW(compile_source(SourceText(t)), CompileError);
}

TEST(CompileGame, JsonDumpIsVersioned) {
  const GameDef g = compile_source(SourceText(limerick_text()));
  const std::string json = game_to_json(g);
  EXPECT_NE(json.find("\"version\""), std::string::npos);
  EXPECT_EQ(json, game_to_json(compile_source(SourceText(limerick_text()))));
}

// Properties over every exemplar game.
TEST(CompilerProperties, VariantCountsMatchPrefixes) {
  for (const std::string& path : testkit::exemplar_paths()) {
    const std::string text = read_file(path);
    const GameAst ast = parse_game(SourceText(text));
    const GameDef g = compile_game(ast);
    const CompileTables tables{g.object_table, g.legend_table, g.layer_table};
    for (const RuleAst& line : ast.rule_lines) {
      if (line.kind != RuleAst::Kind::kRule) continue;
      const RuleGroup group = compile_rule(line, tables);
      const int n = static_cast<int>(group.rules.size());
      EXPECT_TRUE(n == 1 || n == 2 || n == 4) << path << ":" << line.line;
      std::set<std::string> dirs;
      for (const std::string& p : line.prefixes) {
        if (p == "up" || p == "down" || p == "left" || p == "right") dirs.insert(p);
        if (p == "horizontal") dirs.insert({"left", "right"});
        if (p == "vertical") dirs.insert({"up", "down"});
      }
      const int implied = dirs.empty() ? 4 : static_cast<int>(dirs.size());
      EXPECT_TRUE(n == implied || n == 1) << path << ":" << line.line;
    }
  }
}

TEST(CompilerProperties, EveryLevelCellHasOneObjectPerLayer) {
  for (const std::string& path : testkit::exemplar_paths()) {
    const auto g = load_game(path);
    for (const LevelDef& l : g->levels) {
      if (l.is_message) continue;
      for (const ObjectMask& cell : l.cells) {
        for (const ObjectMask& lm : g->layer_table.layer_masks) {
          ObjectMask both = cell;
          both &= lm;
          EXPECT_LE(both.count(), 1) << path;
        }
      }
    }
  }
}

TEST(CompilerProperties, DeterministicCompilation) {
  for (const std::string& path : testkit::exemplar_paths()) {
    const std::string text = read_file(path);
    EXPECT_EQ(game_to_json(compile_source(SourceText(text))),
              game_to_json(compile_source(SourceText(text))))
        << path;
  }
}

TEST(Palette, NamedAndHexColors) {
  const auto lg = parse_color("lightgreen");
  ASSERT_TRUE(lg);
  const auto hex = parse_color("#ff8800");
  ASSERT_TRUE(hex);
  EXPECT_EQ(hex->r, 0xff);
  EXPECT_EQ(hex->g, 0x88);
  EXPECT_EQ(hex->b, 0x00);
  const auto short_hex = parse_color("#f80");
  ASSERT_TRUE(short_hex);
  EXPECT_EQ(*short_hex, *hex);
  EXPECT_TRUE(parse_color("transparent")->transparent);
  EXPECT_FALSE(parse_color("notacolor"));
}

}  // namespace
}  // namespace pscript
