#include <functional>
#include <set>

#include "pscript/compiler.hpp"

namespace pscript {

std::optional<ObjectId> ObjectTable::find(std::string_view name) const {
  auto it = by_name.find(name);
  if (it == by_name.end()) return std::nullopt;
  return it->second;
}

ObjectTable build_object_table(const GameAst& ast) {
  ObjectTable table;
  std::vector<Diagnostic> errors;
  for (const ObjectDecl& decl : ast.objects) {
    if (static_cast<int>(table.objects.size()) >= kMaxObjects) {
      errors.push_back({Severity::kError, "objects", decl.line,
                        "too many objects (limit " + std::to_string(kMaxObjects) + ")"});
      break;
    }
    if (table.by_name.count(decl.name)) {
      errors.push_back({Severity::kError, "objects", decl.line,
                        "duplicate object name '" + decl.name + "'"});
      continue;
    }
    ObjectRecord rec;
    rec.id = static_cast<ObjectId>(table.objects.size());
    rec.name = decl.name;
    rec.sprite = decl.sprite;
    rec.line = decl.line;
    for (const std::string& c : decl.colors) {
      auto rgb = parse_color(c);
      if (!rgb) {
        errors.push_back({Severity::kError, "objects", decl.line, "unknown color '" + c + "'"});
        rgb = Rgb{};
      }
      rec.colors.push_back(*rgb);
    }
    table.by_name.emplace(rec.name, rec.id);
    table.objects.push_back(std::move(rec));
  }
  if (!errors.empty()) throw CompileError(std::move(errors));
  return table;
}

std::optional<LegendTable::Resolved> LegendTable::resolve(std::string_view name,
                                                          const ObjectTable& objects) const {
  if (auto id = objects.find(name)) return Resolved{Kind::kAtomic, ObjectMask::of({*id})};
  if (auto it = alias.find(name); it != alias.end()) {
    return Resolved{Kind::kAtomic, ObjectMask::of({it->second})};
  }
  if (auto it = meta.find(name); it != meta.end()) return Resolved{Kind::kMeta, it->second};
  if (auto it = aggregate.find(name); it != aggregate.end()) {
    return Resolved{Kind::kAggregate, it->second};
  }
  return std::nullopt;
}

LegendTable resolve_legend(const GameAst& ast, const ObjectTable& objects) {
  LegendTable table;
  std::vector<Diagnostic> errors;
  auto fail = [&](int line, std::string msg) {
    errors.push_back({Severity::kError, "legend", line, std::move(msg)});
  };

  std::map<std::string, const LegendDecl*, std::less<>> decls;
  for (const LegendDecl& d : ast.legend) {
    if (objects.find(d.name) || decls.count(d.name)) {
      fail(d.line, "'" + d.name + "' is already defined");
      continue;
    }
    decls.emplace(d.name, &d);
  }

  using Kind = LegendTable::Kind;
  std::map<std::string, LegendTable::Resolved, std::less<>> done;
  std::set<std::string, std::less<>> visiting;

  std::function<std::optional<LegendTable::Resolved>(const std::string&, int)> resolve_name =
      [&](const std::string& name, int line) -> std::optional<LegendTable::Resolved> {
    if (auto id = objects.find(name)) return LegendTable::Resolved{Kind::kAtomic, ObjectMask::of({*id})};
    if (auto it = done.find(name); it != done.end()) return it->second;
    auto dit = decls.find(name);
    if (dit == decls.end()) {
      fail(line, "undefined name '" + name + "'");
      return std::nullopt;
    }
    const LegendDecl& d = *dit->second;
    if (visiting.count(name)) {
      fail(d.line, "cyclic legend definition involving '" + name + "'");
      return std::nullopt;
    }
    if (d.mixed_operators) {
      fail(d.line, "'" + name + "' mixes 'and' and 'or'");
      return std::nullopt;
    }
    visiting.insert(name);
    LegendTable::Resolved out{Kind::kAtomic, {}};
    bool ok = true;
    for (const std::string& t : d.targets) {
      auto r = resolve_name(t, d.line);
      if (!r) {
        ok = false;
        continue;
      }
      if (d.kind == LegendDecl::Kind::kOr && r->kind == Kind::kAggregate) {
        fail(d.line, "'" + name + "' uses aggregate '" + t + "' inside an 'or' definition");
        ok = false;
      } else if (d.kind == LegendDecl::Kind::kAnd && r->kind == Kind::kMeta) {
        fail(d.line, "'" + name + "' uses property '" + t + "' inside an 'and' definition");
        ok = false;
      }
      out.members |= r->members;
      if (d.kind == LegendDecl::Kind::kAlias) out.kind = r->kind;
    }
    visiting.erase(name);
    if (!ok) return std::nullopt;
    if (d.kind == LegendDecl::Kind::kOr) out.kind = Kind::kMeta;
    if (d.kind == LegendDecl::Kind::kAnd) out.kind = Kind::kAggregate;
    // A one-member set behaves like the object itself.
    if (out.members.count() == 1) out.kind = Kind::kAtomic;
    done.emplace(name, out);
    return out;
  };

  for (const LegendDecl& d : ast.legend) {
    if (!decls.count(d.name) || decls.at(d.name) != &d) continue;
    auto r = resolve_name(d.name, d.line);
    if (!r) continue;
    switch (r->kind) {
      case Kind::kAtomic: table.alias.emplace(d.name, r->members.first()); break;
      case Kind::kMeta: table.meta.emplace(d.name, r->members); break;
      case Kind::kAggregate: table.aggregate.emplace(d.name, r->members); break;
    }
    if (d.name.size() == 1) table.glyphs[d.name[0]] = r->members;
  }

  for (const ObjectDecl& o : ast.objects) {
    auto id = objects.find(o.name);
    if (!id) continue;
    if (o.glyph) {
      if (table.glyphs.count(*o.glyph)) {
        errors.push_back({Severity::kError, "objects", o.line,
                          std::string("glyph '") + *o.glyph + "' is defined twice"});
      }
      table.glyphs[*o.glyph] = ObjectMask::of({*id});
    }
    if (o.name.size() == 1 && !table.glyphs.count(o.name[0])) {
      table.glyphs[o.name[0]] = ObjectMask::of({*id});
    }
  }

  if (!errors.empty()) throw CompileError(std::move(errors));
  return table;
}

}  // namespace pscript
