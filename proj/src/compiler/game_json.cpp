#include <cstdio>

#include "json.hpp"

#include "pscript/compiler.hpp"

namespace pscript {
namespace {

using nlohmann::json;

std::string hex_color(const Rgb& c) {
  if (c.transparent) return "transparent";
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

const char* qualifier_name(Qualifier q) {
  switch (q) {
    case Qualifier::kPresent: return "present";
    case Qualifier::kAbsent: return "absent";
    case Qualifier::kStationary: return "stationary";
    case Qualifier::kForce: return "force";
    case Qualifier::kBound: return "bound";
    case Qualifier::kRandomDir: return "randomdir";
  }
  return "?";
}

json names_of(const ObjectMask& mask, const ObjectTable& objects) {
  json out = json::array();
  for (ObjectId id : mask.ids()) out.push_back(objects.objects[id].name);
  return out;
}

json kernels_json(const std::vector<Kernel>& kernels) {
  json out = json::array();
  for (const Kernel& k : kernels) {
    json jk = json::array();
    for (const CellPattern& c : k) {
      if (c.is_ellipsis) {
        jk.push_back("...");
        continue;
      }
      json jc = json::array();
      for (const PatternEntry& e : c.entries) {
        json je = {{"name", e.name}, {"qualifier", qualifier_name(e.qualifier)}};
        if (e.qualifier == Qualifier::kForce) je["force"] = force_name(e.force);
        if (e.qualifier == Qualifier::kBound) {
          je["keyword"] = e.keyword;
          je["slot"] = e.binding_slot;
        }
        if (e.is_meta) je["meta"] = true;
        jc.push_back(std::move(je));
      }
      jk.push_back(std::move(jc));
    }
    out.push_back(std::move(jk));
  }
  return out;
}

json rule_json(const CompiledRule& r) {
  json j = {{"direction", direction_name(r.direction)},
            {"line", r.source_line},
            {"lhs", kernels_json(r.lhs)},
            {"rhs", kernels_json(r.rhs)}};
  json cmds = json::array();
  if (r.commands.win) cmds.push_back("win");
  if (r.commands.again) cmds.push_back("again");
  if (r.commands.restart) cmds.push_back("restart");
  if (r.commands.cancel) cmds.push_back("cancel");
  if (r.commands.checkpoint) cmds.push_back("checkpoint");
  for (const std::string& s : r.commands.sfx) cmds.push_back(s);
  if (r.commands.message) cmds.push_back("message " + *r.commands.message);
  j["commands"] = std::move(cmds);
  return j;
}

json blocks_json(const std::vector<Block>& blocks) {
  json out = json::array();
  for (const Block& b : blocks) {
    json groups = json::array();
    for (const RuleGroup& g : b.groups) {
      json rules = json::array();
      for (const CompiledRule& r : g.rules) rules.push_back(rule_json(r));
      groups.push_back({{"line", g.source_line},
                        {"late", g.is_late},
                        {"random", g.is_random},
                        {"rules", std::move(rules)}});
    }
    out.push_back({{"loop", b.is_loop}, {"groups", std::move(groups)}});
  }
  return out;
}

const char* win_kind_name(WinCondition::Kind k) {
  switch (k) {
    case WinCondition::Kind::kAllOn: return "all_on";
    case WinCondition::Kind::kSomeOn: return "some_on";
    case WinCondition::Kind::kNoOn: return "no_on";
    case WinCondition::Kind::kSome: return "some";
    case WinCondition::Kind::kNone: return "none";
  }
  return "?";
}

}  // namespace

std::string game_to_json(const GameDef& game) {
  const ObjectTable& objects = game.object_table;
  json j;
  j["version"] = 1;
  j["title"] = game.prelude.title;

  json jobjects = json::array();
  for (const ObjectRecord& o : objects.objects) {
    json colors = json::array();
    for (const Rgb& c : o.colors) colors.push_back(hex_color(c));
    jobjects.push_back({{"id", o.id},
                        {"name", o.name},
                        {"layer", game.layer_table.layer_of[o.id]},
                        {"colors", std::move(colors)},
                        {"has_sprite", o.sprite.has_value()}});
  }
  j["objects"] = std::move(jobjects);

  json layers = json::array();
  for (const ObjectMask& m : game.layer_table.layer_masks) layers.push_back(names_of(m, objects));
  j["layers"] = std::move(layers);

  json legend = json::object();
  for (const auto& [name, id] : game.legend_table.alias) legend[name] = {{"alias", objects.objects[id].name}};
  for (const auto& [name, m] : game.legend_table.meta) legend[name] = {{"or", names_of(m, objects)}};
  for (const auto& [name, m] : game.legend_table.aggregate) legend[name] = {{"and", names_of(m, objects)}};
  j["legend"] = std::move(legend);

  j["player"] = names_of(game.player_ids, objects);
  j["background"] = objects.objects[game.background_id].name;
  j["blocks"] = blocks_json(game.blocks);
  j["late_blocks"] = blocks_json(game.late_blocks);
  j["compiled_variants"] = game.compiled_variant_count();

  json wins = json::array();
  for (const WinCondition& w : game.win_conditions) {
    json jw = {{"kind", win_kind_name(w.kind)}, {"a", w.a_name}};
    if (w.b) jw["b"] = w.b_name;
    wins.push_back(std::move(jw));
  }
  j["win_conditions"] = std::move(wins);

  json levels = json::array();
  for (const LevelDef& l : game.levels) {
    if (l.is_message) {
      levels.push_back({{"message", l.message}});
    } else {
      levels.push_back({{"width", l.width}, {"height", l.height}, {"rows", l.rows}});
    }
  }
  j["levels"] = std::move(levels);
  return j.dump(2);
}

}  // namespace pscript
