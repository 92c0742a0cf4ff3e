#include <algorithm>

#include "pscript/compiler.hpp"

namespace pscript {

LayerTable build_layers(const GameAst& ast, const ObjectTable& objects, const LegendTable& legend,
                        std::vector<Diagnostic>* warnings) {
  std::vector<Diagnostic> errors;
  std::vector<int> assigned(objects.size(), -1);
  std::vector<std::vector<ObjectId>> raw_layers;

  for (const LayerLine& line : ast.collision_layers) {
    const int index = static_cast<int>(raw_layers.size());
    raw_layers.emplace_back();
    for (const std::string& name : line.names) {
      auto r = legend.resolve(name, objects);
      if (!r) {
        errors.push_back({Severity::kError, "collisionlayers", line.line,
                          "unknown name '" + name + "'"});
        continue;
      }
      for (ObjectId id : r->members.ids()) {
        int prev = assigned[id];
        if (prev == index) continue;
        if (prev >= 0) {
          if (warnings) {
            warnings->push_back({Severity::kWarning, "collisionlayers", line.line,
                                 "object '" + objects.objects[id].name +
                                     "' reassigned to a later collision layer"});
          }
          auto& old = raw_layers[prev];
          old.erase(std::remove(old.begin(), old.end(), id), old.end());
        }
        assigned[id] = index;
        raw_layers[index].push_back(id);
      }
    }
  }
  if (!errors.empty()) throw CompileError(std::move(errors));

  LayerTable table;
  table.layer_of.assign(objects.size(), -1);
  for (auto& ids : raw_layers) {
    if (ids.empty()) continue;
    const int index = table.size();
    ObjectMask mask;
    for (ObjectId id : ids) {
      table.layer_of[id] = index;
      mask.set(id);
    }
    table.layers.push_back(ids);
    table.layer_masks.push_back(mask);
  }
  if (table.size() > kMaxLayers) {
    throw CompileError("collisionlayers", 0,
                       "too many collision layers (limit " + std::to_string(kMaxLayers) + ")");
  }
  return table;
}

}  // namespace pscript
