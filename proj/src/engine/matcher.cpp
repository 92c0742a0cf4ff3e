#include "matcher.hpp"

#include <bit>

namespace pscript::detail {

EngineTables::EngineTables(const GameDef& game)
    : words(std::max(1, game.object_words())),
      layers(game.num_layers()),
      layer_of(game.layer_table.layer_of) {
  for (const ObjectMask& m : game.layer_table.layer_masks) layer_masks.push_back(m.w);
  player_mask = game.player_ids.w;
}

namespace {

inline bool qualifier_holds(const PatternEntry& e, uint8_t force, MatchContext& ctx) {
  switch (e.qualifier) {
    case Qualifier::kPresent: return true;
    case Qualifier::kStationary: return force == 0;
    case Qualifier::kForce: return force == e.force;
    case Qualifier::kBound: {
      if (!(force & e.force)) return false;
      uint8_t& slot = ctx.bind[e.binding_slot];
      if (slot && slot != force) return false;
      slot = force;
      return true;
    }
    default: return false;
  }
}

}  // namespace

bool match_cell(const EngineTables& t, const GridState& s, const CellPattern& p, int ci,
                MatchContext& ctx) {
  const uint64_t* c = s.cell(ci);
  for (int w = 0; w < t.words; ++w) {
    if ((c[w] & p.all_present.w[w]) != p.all_present.w[w]) return false;
    if (c[w] & p.none_present.w[w]) return false;
  }
  const uint8_t* forces = s.forces.data() + static_cast<std::size_t>(ci) * t.layers;
  for (int i : p.force_entries) {
    const PatternEntry& e = p.entries[i];
    if (!qualifier_holds(e, forces[e.layer], ctx)) return false;
  }
  for (int i : p.meta_entries) {
    const PatternEntry& e = p.entries[i];
    ObjectId found = -1;
    for (int w = 0; w < t.words && found < 0; ++w) {
      uint64_t x = c[w] & e.members.w[w];
      while (x) {
        const ObjectId id = w * 64 + std::countr_zero(x);
        x &= x - 1;
        if (qualifier_holds(e, forces[t.layer_of[id]], ctx)) {
          found = id;
          break;
        }
      }
    }
    if (found < 0) return false;
    ctx.meta[e.meta_slot] = found;
  }
  return true;
}

void apply_cell(const EngineTables& t, GridState& s, int ci, const CellPattern& lhs,
                const CellEffect& eff, const MatchContext& ctx, std::mt19937_64* rng) {
  const int W = t.words;
  uint64_t* cell = s.cell(ci);
  uint8_t* forces = s.forces.data() + static_cast<std::size_t>(ci) * t.layers;
  std::array<uint64_t, kMaskWords> before{};
  std::array<uint64_t, kMaskWords> objs{};
  for (int w = 0; w < W; ++w) before[w] = objs[w] = cell[w];
  std::array<uint8_t, kMaxLayers> old_forces{};
  uint64_t touched = 0;

  auto touch = [&](int layer) {
    const uint64_t bit = uint64_t{1} << layer;
    if (!(touched & bit)) {
      touched |= bit;
      old_forces[layer] = forces[layer];
    }
  };
  auto id_of = [&](const PatternEntry& e) {
    return e.is_meta ? ctx.meta[e.meta_slot] : e.members.first();
  };

  for (int i : eff.remove_entries) {
    const ObjectId id = id_of(lhs.entries[i]);
    if (id < 0 || !((objs[id >> 6] >> (id & 63)) & 1)) continue;
    objs[id >> 6] &= ~(uint64_t{1} << (id & 63));
    const int layer = t.layer_of[id];
    touch(layer);
    forces[layer] = 0;
  }
  for (int w = 0; w < W; ++w) {
    uint64_t removed = objs[w] & eff.clear.w[w];
    objs[w] &= ~eff.clear.w[w];
    while (removed) {
      touch(t.layer_of[w * 64 + std::countr_zero(removed)]);
      removed &= removed - 1;
    }
  }
  for (const CellEffect::Put& put : eff.puts) {
    const ObjectId id = put.id >= 0 ? put.id : ctx.meta[put.bind_slot];
    const int layer = t.layer_of[id];
    touch(layer);
    const WordMask& lm = t.layer_masks[layer];
    for (int w = 0; w < W; ++w) objs[w] &= ~lm[w];
    objs[id >> 6] |= uint64_t{1} << (id & 63);
    switch (put.op) {
      case CellEffect::MoveOp::kKeep: break;
      case CellEffect::MoveOp::kClear: forces[layer] = 0; break;
      case CellEffect::MoveOp::kSet: forces[layer] = put.force; break;
      case CellEffect::MoveOp::kSetBound: forces[layer] = ctx.bind[put.slot]; break;
      case CellEffect::MoveOp::kRandom: {
        if (!rng) throw EngineError("randomdir requires an rng seed");
        forces[layer] = static_cast<uint8_t>(1u << ((*rng)() % 4));
        break;
      }
    }
  }

  uint64_t layers_left = touched;
  while (layers_left) {
    const int layer = std::countr_zero(layers_left);
    layers_left &= layers_left - 1;
    const WordMask& lm = t.layer_masks[layer];
    bool occupied = false;
    for (int w = 0; w < W; ++w) occupied |= (objs[w] & lm[w]) != 0;
    if (!occupied) forces[layer] = 0;
    const uint8_t of = old_forces[layer];
    const uint8_t nf = forces[layer];
    if (of != nf) {
      if (of) --s.force_counts[layer * 5 + std::countr_zero(of)];
      if (nf) ++s.force_counts[layer * 5 + std::countr_zero(nf)];
    }
  }
  for (int w = 0; w < W; ++w) {
    uint64_t diff = before[w] ^ objs[w];
    while (diff) {
      const int b = std::countr_zero(diff);
      diff &= diff - 1;
      s.object_counts[w * 64 + b] += ((objs[w] >> b) & 1) ? 1 : -1;
    }
    cell[w] = objs[w];
  }
}

void kernel_positions(const GridState& s, const Kernel& kernel, Direction dir,
                      const KernelMatch& m, std::vector<int>& out) {
  int dx, dy;
  direction_delta(dir, dx, dy);
  out.clear();
  int x = m.anchor % s.width;
  int y = m.anchor / s.width;
  int ei = 0;
  for (const CellPattern& c : kernel) {
    if (c.is_ellipsis) {
      out.push_back(-1);
      x += m.gaps[ei] * dx;
      y += m.gaps[ei] * dy;
      ++ei;
      continue;
    }
    out.push_back(y * s.width + x);
    x += dx;
    y += dy;
  }
}

}  // namespace pscript::detail
