#pragma once

#include <array>
#include <random>
#include <vector>

#include "pscript/engine.hpp"

namespace pscript::detail {

inline constexpr int kMaxBindingSlots = 8;
inline constexpr int kMaxMetaSlots = 48;
inline constexpr int kMaxEllipses = 4;

using WordMask = std::array<uint64_t, kMaskWords>;

// Per-game lookup tables shared by matching and movement.
struct EngineTables {
  int words = 1;
  int layers = 0;
  std::vector<int> layer_of;
  std::vector<WordMask> layer_masks;
  WordMask player_mask{};

  explicit EngineTables(const GameDef& game);
};

struct MatchContext {
  std::array<uint8_t, kMaxBindingSlots> bind{};  // bound force bit, 0 if unbound
  std::array<ObjectId, kMaxMetaSlots> meta{};     // bound meta ids
};

struct KernelMatch {
  int anchor = 0;
  std::array<int16_t, kMaxEllipses> gaps{};
  MatchContext ctx;
};

inline void direction_delta(Direction d, int& dx, int& dy) {
  switch (d) {
    case Direction::kUp: dx = 0; dy = -1; return;
    case Direction::kDown: dx = 0; dy = 1; return;
    case Direction::kLeft: dx = -1; dy = 0; return;
    case Direction::kRight: dx = 1; dy = 0; return;
  }
  dx = dy = 0;
}

bool match_cell(const EngineTables& t, const GridState& s, const CellPattern& p, int ci,
                MatchContext& ctx);

// Applies one right-hand cell. Keeps object_counts / force_counts in sync.
void apply_cell(const EngineTables& t, GridState& s, int ci, const CellPattern& lhs,
                const CellEffect& eff, const MatchContext& ctx, std::mt19937_64* rng);

// Grid index of every kernel cell for a match (-1 for ellipsis cells).
void kernel_positions(const GridState& s, const Kernel& kernel, Direction dir,
                      const KernelMatch& m, std::vector<int>& out);

// Invokes fn(const KernelMatch&) for each match in row-major anchor order,
// ellipsis gaps smallest first. Stops early and returns true once fn does.
template <typename Fn>
bool for_each_kernel_match(const EngineTables& t, const GridState& s, const Kernel& kernel,
                           Direction dir, const MatchContext& base, Fn&& fn) {
  int dx, dy;
  direction_delta(dir, dx, dy);
  const int n = static_cast<int>(kernel.size());
  int fixed = 0;
  for (const CellPattern& c : kernel) fixed += c.is_ellipsis ? 0 : 1;
  const int w = s.width;
  const int h = s.height;
  auto in_bounds = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h; };

  KernelMatch m;
  // Matches cells k.. starting at (x, y); `left` = fixed cells still to place.
  auto rec = [&](auto& self, int k, int x, int y, int ei, int left) -> bool {
    if (k == n) return fn(static_cast<const KernelMatch&>(m));
    const CellPattern& cell = kernel[k];
    if (cell.is_ellipsis) {
      const auto saved = m.ctx.bind;
      for (int gap = 0;; ++gap) {
        const int nx = x + gap * dx;
        const int ny = y + gap * dy;
        if (left > 0 && !in_bounds(nx + (left - 1) * dx, ny + (left - 1) * dy)) break;
        if (left == 0 && gap > 0 && !in_bounds(nx - dx, ny - dy)) break;
        m.gaps[ei] = static_cast<int16_t>(gap);
        if (self(self, k + 1, nx, ny, ei + 1, left)) return true;
        m.ctx.bind = saved;
      }
      return false;
    }
    if (!match_cell(t, s, cell, y * w + x, m.ctx)) return false;
    return self(self, k + 1, x + dx, y + dy, ei, left - 1);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!in_bounds(x + (fixed - 1) * dx, y + (fixed - 1) * dy)) continue;
      m.anchor = y * w + x;
      m.ctx.bind = base.bind;
      if (rec(rec, 0, x, y, 0, fixed)) return true;
    }
  }
  return false;
}

}  // namespace pscript::detail
