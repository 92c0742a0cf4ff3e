#include <algorithm>
#include <array>
#include <map>

#include "pscript/compiler.hpp"

namespace pscript {

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
    case Direction::kRight: return "right";
  }
  return "?";
}

const char* force_name(uint8_t force) {
  switch (force) {
    case 0: return "none";
    case kForceUp: return "up";
    case kForceDown: return "down";
    case kForceLeft: return "left";
    case kForceRight: return "right";
    case kForceAction: return "action";
    default: return "mixed";
  }
}

namespace {

constexpr std::array<Direction, 4> kAllDirections = {Direction::kUp, Direction::kDown,
                                                     Direction::kLeft, Direction::kRight};

Direction opposite(Direction d) {
  switch (d) {
    case Direction::kUp: return Direction::kDown;
    case Direction::kDown: return Direction::kUp;
    case Direction::kLeft: return Direction::kRight;
    case Direction::kRight: return Direction::kLeft;
  }
  return d;
}

// `^` relative to the rule direction.
Direction turn_ccw(Direction d) {
  switch (d) {
    case Direction::kRight: return Direction::kUp;
    case Direction::kUp: return Direction::kLeft;
    case Direction::kLeft: return Direction::kDown;
    case Direction::kDown: return Direction::kRight;
  }
  return d;
}

// `v` relative to the rule direction.
Direction turn_cw(Direction d) {
  switch (d) {
    case Direction::kRight: return Direction::kDown;
    case Direction::kDown: return Direction::kLeft;
    case Direction::kLeft: return Direction::kUp;
    case Direction::kUp: return Direction::kRight;
  }
  return d;
}

bool is_vertical(Direction d) { return d == Direction::kUp || d == Direction::kDown; }

bool is_relative_token(std::string_view q) {
  return q == ">" || q == "<" || q == "^" || q == "v" || q == "parallel" ||
         q == "perpendicular";
}

struct QualifierInfo {
  Qualifier qualifier = Qualifier::kPresent;
  uint8_t force = 0;
  std::string keyword;  // binding keyword for kBound
};

QualifierInfo map_qualifier(std::string_view q, Direction dir) {
  auto fixed = [](Direction d) { return QualifierInfo{Qualifier::kForce, force_of(d), {}}; };
  auto bound = [](uint8_t set, std::string_view kw) {
    return QualifierInfo{Qualifier::kBound, set, std::string(kw)};
  };
  constexpr uint8_t kHorizontal = kForceLeft | kForceRight;
  constexpr uint8_t kVertical = kForceUp | kForceDown;
  if (q.empty()) return {};
  if (q == "no") return {Qualifier::kAbsent, 0, {}};
  if (q == "stationary") return {Qualifier::kStationary, 0, {}};
  if (q == "up") return fixed(Direction::kUp);
  if (q == "down") return fixed(Direction::kDown);
  if (q == "left") return fixed(Direction::kLeft);
  if (q == "right") return fixed(Direction::kRight);
  if (q == ">") return fixed(dir);
  if (q == "<") return fixed(opposite(dir));
  if (q == "^") return fixed(turn_ccw(dir));
  if (q == "v") return fixed(turn_cw(dir));
  if (q == "action") return {Qualifier::kForce, kForceAction, {}};
  if (q == "moving" || q == "orthogonal") return bound(kForceAnyDir, q);
  if (q == "horizontal") return bound(kHorizontal, q);
  if (q == "vertical") return bound(kVertical, q);
  if (q == "parallel") return bound(is_vertical(dir) ? kVertical : kHorizontal, q);
  if (q == "perpendicular") return bound(is_vertical(dir) ? kHorizontal : kVertical, q);
  if (q == "randomdir") return {Qualifier::kRandomDir, kForceAnyDir, {}};
  return {};
}

bool has_force_requirement(Qualifier q) {
  return q == Qualifier::kForce || q == Qualifier::kBound || q == Qualifier::kStationary;
}

class VariantBuilder {
 public:
  VariantBuilder(const RuleAst& ast, const CompileTables& tables, Direction dir)
      : ast_(ast), tables_(tables), dir_(dir) {}

  CompiledRule build() {
    rule_.direction = dir_;
    rule_.source_line = ast_.line;
    for (const KernelAst& k : ast_.lhs) rule_.lhs.push_back(build_kernel(k, /*lhs=*/true));
    for (const KernelAst& k : ast_.rhs) rule_.rhs.push_back(build_kernel(k, /*lhs=*/false));
    check_shape();
    if (!rule_.rhs.empty()) bind_rhs();
    build_effects();
    build_quick_reject();
    return std::move(rule_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw CompileError("rules", ast_.line, msg);
  }

  void check_shape() const {
    for (const Kernel& k : rule_.lhs) {
      int ellipses = 0;
      for (std::size_t c = 0; c < k.size(); ++c) {
        if (!k[c].is_ellipsis) continue;
        ++ellipses;
        if (c == 0 || c + 1 == k.size()) fail("'...' cannot start or end a kernel");
        if (k[c - 1].is_ellipsis) fail("two '...' cells in a row");
      }
      if (ellipses > 4) fail("too many '...' cells in one kernel");
    }
    if (rule_.meta_slots > 48) fail("rule binds too many properties");
    if (rule_.binding_slots > 8) fail("rule uses too many movement bindings");
  }

  PatternEntry build_entry(const CellEntryAst& e, bool lhs) {
    if (e.qualifier == "random") {
      if (lhs) fail("'random' cannot qualify an object on the left-hand side");
      throw UnsupportedFeatureError("random object choice", ast_.line);
    }
    auto resolved = tables_.legend.resolve(e.name, tables_.objects);
    if (!resolved) fail("unknown name '" + e.name + "' in rule");
    if (resolved->kind == LegendTable::Kind::kAggregate) {
      fail("aggregate '" + e.name + "' cannot be used in a rule");
    }
    PatternEntry out;
    out.name = e.name;
    out.members = resolved->members;
    out.is_meta = resolved->kind == LegendTable::Kind::kMeta;
    int layer = -2;
    for (ObjectId id : out.members.ids()) {
      int l = tables_.layers.layer_of[id];
      if (l < 0) {
        fail("object '" + tables_.objects.objects[id].name +
             "' is not assigned to a collision layer");
      }
      layer = layer == -2 ? l : (layer == l ? l : -1);
    }
    out.layer = layer;
    QualifierInfo qi = map_qualifier(e.qualifier, dir_);
    out.qualifier = qi.qualifier;
    out.force = qi.force;
    out.keyword = qi.keyword.empty() ? e.qualifier : qi.keyword;
    if (out.qualifier == Qualifier::kRandomDir && lhs) {
      fail("'randomdir' is only allowed on the right-hand side");
    }
    if (out.qualifier == Qualifier::kBound) {
      auto it = binding_slots_.find(qi.keyword);
      if (lhs) {
        if (it == binding_slots_.end()) {
          it = binding_slots_.emplace(qi.keyword, rule_.binding_slots++).first;
        }
      } else if (it == binding_slots_.end()) {
        fail("'" + qi.keyword + "' on the right-hand side has no match on the left");
      }
      out.binding_slot = static_cast<int8_t>(it->second);
    }
    if (out.qualifier == Qualifier::kForce && out.force == kForceAction) {
      if (lhs) rule_.references_action = true;
    }
    if (out.qualifier == Qualifier::kRandomDir) rule_.uses_random = true;
    if (lhs && out.is_meta && out.qualifier != Qualifier::kAbsent) {
      out.meta_slot = rule_.meta_slots++;
    }
    return out;
  }

  Kernel build_kernel(const KernelAst& ast, bool lhs) {
    Kernel kernel;
    for (const CellAst& cell : ast) {
      CellPattern pat;
      pat.is_ellipsis = cell.ellipsis;
      for (const CellEntryAst& e : cell.entries) {
        for (const PatternEntry& prev : pat.entries) {
          if (prev.name == e.name) fail("'" + e.name + "' appears twice in one cell");
        }
        pat.entries.push_back(build_entry(e, lhs));
      }
      for (int i = 0; i < static_cast<int>(pat.entries.size()); ++i) {
        const PatternEntry& pe = pat.entries[i];
        if (pe.qualifier == Qualifier::kAbsent) {
          pat.none_present |= pe.members;
        } else if (pe.is_meta) {
          pat.meta_entries.push_back(i);
        } else {
          pat.all_present |= pe.members;
          if (pe.qualifier != Qualifier::kPresent) pat.force_entries.push_back(i);
        }
      }
      kernel.push_back(std::move(pat));
    }
    return kernel;
  }

  // Attaches every right-hand meta put to the left-hand match it copies.
  void bind_rhs() {
    for (std::size_t k = 0; k < rule_.rhs.size(); ++k) {
      for (std::size_t c = 0; c < rule_.rhs[k].size(); ++c) {
        for (PatternEntry& e : rule_.rhs[k][c].entries) {
          if (!e.is_meta || e.qualifier == Qualifier::kAbsent) continue;
          int slot = -1;
          for (const PatternEntry& l : rule_.lhs[k][c].entries) {
            if (l.name == e.name && l.meta_slot >= 0) slot = l.meta_slot;
          }
          for (std::size_t k2 = 0; slot < 0 && k2 < rule_.lhs.size(); ++k2) {
            for (const CellPattern& cell : rule_.lhs[k2]) {
              for (const PatternEntry& l : cell.entries) {
                if (slot < 0 && l.name == e.name && l.meta_slot >= 0) slot = l.meta_slot;
              }
            }
          }
          if (slot < 0) fail("unbound property '" + e.name + "' on the right-hand side");
          e.meta_slot = slot;
        }
      }
    }
  }

  void build_effects() {
    int flat = 0;
    for (std::size_t k = 0; k < rule_.lhs.size(); ++k) {
      rule_.kernel_offsets.push_back(flat);
      for (std::size_t c = 0; c < rule_.lhs[k].size(); ++c, ++flat) {
        CellEffect eff;
        if (!rule_.rhs.empty() && !rule_.lhs[k][c].is_ellipsis) {
          eff = cell_effect(rule_.lhs[k][c], rule_.rhs[k][c]);
        }
        rule_.effects.push_back(std::move(eff));
      }
    }
  }

  static CellEffect cell_effect(const CellPattern& lhs, const CellPattern& rhs) {
    CellEffect eff;
    auto positive = [](const PatternEntry& e) { return e.qualifier != Qualifier::kAbsent; };
    for (int i = 0; i < static_cast<int>(lhs.entries.size()); ++i) {
      const PatternEntry& l = lhs.entries[i];
      if (!positive(l)) continue;
      bool retained = false;
      for (const PatternEntry& r : rhs.entries) {
        if (!positive(r)) continue;
        if (r.name == l.name || (l.layer >= 0 && r.layer == l.layer)) retained = true;
      }
      if (!retained) eff.remove_entries.push_back(i);
    }
    for (const PatternEntry& r : rhs.entries) {
      if (!positive(r)) eff.clear |= r.members;
    }
    for (const PatternEntry& r : rhs.entries) {
      if (!positive(r)) continue;
      CellEffect::Put put;
      if (r.is_meta) {
        put.bind_slot = r.meta_slot;
      } else {
        put.id = r.members.first();
      }
      const PatternEntry* same = nullptr;
      for (const PatternEntry& l : lhs.entries) {
        if (positive(l) && l.name == r.name) same = &l;
      }
      for (const PatternEntry& l : lhs.entries) {
        if (!same && positive(l) && r.layer >= 0 && l.layer == r.layer) same = &l;
      }
      using Op = CellEffect::MoveOp;
      switch (r.qualifier) {
        case Qualifier::kPresent:
          put.op = same && has_force_requirement(same->qualifier) ? Op::kClear : Op::kKeep;
          break;
        case Qualifier::kStationary: put.op = Op::kClear; break;
        case Qualifier::kForce:
          put.op = Op::kSet;
          put.force = r.force;
          break;
        case Qualifier::kBound:
          put.op = Op::kSetBound;
          put.force = r.force;
          put.slot = r.binding_slot;
          break;
        case Qualifier::kRandomDir:
          put.op = Op::kRandom;
          put.force = kForceAnyDir;
          break;
        case Qualifier::kAbsent: break;
      }
      eff.puts.push_back(put);
    }
    return eff;
  }

  void build_quick_reject() {
    std::vector<std::pair<int, uint8_t>> forces;
    for (const Kernel& k : rule_.lhs) {
      for (const CellPattern& cell : k) {
        rule_.required_objects |= cell.all_present;
        for (const PatternEntry& e : cell.entries) {
          if (e.qualifier == Qualifier::kAbsent) continue;
          if (e.is_meta) {
            if (std::find(rule_.required_any.begin(), rule_.required_any.end(), e.members) ==
                rule_.required_any.end()) {
              rule_.required_any.push_back(e.members);
            }
          }
          if (e.qualifier == Qualifier::kForce && e.layer >= 0) {
            std::pair<int, uint8_t> f{e.layer, e.force};
            if (std::find(forces.begin(), forces.end(), f) == forces.end()) forces.push_back(f);
          }
        }
      }
    }
    rule_.required_forces = std::move(forces);
  }

  const RuleAst& ast_;
  const CompileTables& tables_;
  Direction dir_;
  CompiledRule rule_;
  std::map<std::string, int> binding_slots_;
};

}  // namespace

RuleGroup compile_rule(const RuleAst& line, const CompileTables& tables) {
  if (line.kind != RuleAst::Kind::kRule) {
    throw CompileError("rules", line.line, "loop marker is not a rule");
  }
  RuleGroup group;
  group.source_line = line.line;
  uint8_t allowed = 0;
  for (const std::string& p : line.prefixes) {
    if (p == "rigid") throw UnsupportedFeatureError("rigid", line.line);
    if (p == "late") group.is_late = true;
    if (p == "random") group.is_random = true;
    if (p == "up") allowed |= kForceUp;
    if (p == "down") allowed |= kForceDown;
    if (p == "left") allowed |= kForceLeft;
    if (p == "right") allowed |= kForceRight;
    if (p == "horizontal") allowed |= kForceLeft | kForceRight;
    if (p == "vertical") allowed |= kForceUp | kForceDown;
    if (p == "orthogonal") allowed |= kForceAnyDir;
  }
  if (allowed == 0) allowed = kForceAnyDir;

  bool directional = false;
  for (const auto* side : {&line.lhs, &line.rhs}) {
    for (const KernelAst& k : *side) {
      if (k.size() > 1) directional = true;
      for (const CellAst& c : k) {
        for (const CellEntryAst& e : c.entries) {
          if (is_relative_token(e.qualifier)) directional = true;
        }
      }
    }
  }

  for (Direction d : kAllDirections) {
    if (!(allowed & force_of(d))) continue;
    CompiledRule rule = VariantBuilder(line, tables, d).build();
    rule.is_late = group.is_late;
    rule.is_random = group.is_random;
    if (group.is_random) rule.uses_random = true;
    for (const std::string& cmd : line.commands) {
      if (cmd == "win") rule.commands.win = true;
      else if (cmd == "again") rule.commands.again = true;
      else if (cmd == "restart") rule.commands.restart = true;
      else if (cmd == "cancel") rule.commands.cancel = true;
      else if (cmd == "checkpoint") rule.commands.checkpoint = true;
      else if (cmd.rfind("sfx", 0) == 0) rule.commands.sfx.push_back(cmd);
    }
    if (line.message) rule.commands.message = line.message;
    group.rules.push_back(std::move(rule));
    if (!directional) break;
  }
  return group;
}

}  // namespace pscript
