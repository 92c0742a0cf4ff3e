#include <algorithm>
#include <limits>

#include "pscript/agentenv.hpp"

namespace pscript {
namespace {

constexpr int kFar = std::numeric_limits<int>::max() / 4;

// Exact L1 distance to the nearest source cell, two raster passes.
std::vector<int> l1_distance_field(const std::vector<uint8_t>& source, int width, int height) {
  std::vector<int> d(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) d[i] = source[i] ? 0 : kFar;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int& v = d[y * width + x];
      if (x > 0) v = std::min(v, d[y * width + x - 1] + 1);
      if (y > 0) v = std::min(v, d[(y - 1) * width + x] + 1);
    }
  }
  for (int y = height - 1; y >= 0; --y) {
    for (int x = width - 1; x >= 0; --x) {
      int& v = d[y * width + x];
      if (x + 1 < width) v = std::min(v, d[y * width + x + 1] + 1);
      if (y + 1 < height) v = std::min(v, d[(y + 1) * width + x] + 1);
    }
  }
  return d;
}

std::vector<uint8_t> cells_with(const GridState& s, const ObjectMask& m) {
  std::vector<uint8_t> out(s.cells(), 0);
  for (int ci = 0; ci < s.cells(); ++ci) {
    const uint64_t* c = s.cell(ci);
    for (int w = 0; w < s.words; ++w) {
      if (c[w] & m.w[w]) {
        out[ci] = 1;
        break;
      }
    }
  }
  return out;
}

bool any_set(const std::vector<uint8_t>& v) {
  return std::any_of(v.begin(), v.end(), [](uint8_t b) { return b != 0; });
}

}  // namespace

double win_distance(const GameDef& game, const GridState& s, const HeuristicConfig& cfg) {
  const double penalty =
      cfg.unreachable_penalty >= 0 ? cfg.unreachable_penalty : double(s.width + s.height);
  const int n = s.cells();
  double total = 0;
  std::vector<uint8_t> participants(n, 0);
  bool unsatisfied_on = false;

  for (const WinCondition& wc : game.win_conditions) {
    switch (wc.kind) {
      case WinCondition::Kind::kSome: {
        bool present = false;
        for (ObjectId id : wc.a.ids()) present |= s.object_counts[id] > 0;
        if (!present) total += penalty;
        break;
      }
      case WinCondition::Kind::kNone: {
        for (ObjectId id : wc.a.ids()) total += s.object_counts[id];
        break;
      }
      case WinCondition::Kind::kAllOn: {
        const auto a = cells_with(s, wc.a);
        const auto b = cells_with(s, *wc.b);
        const bool have_b = any_set(b);
        const auto field = have_b ? l1_distance_field(b, s.width, s.height) : std::vector<int>();
        bool uncovered_any = false;
        for (int ci = 0; ci < n; ++ci) {
          if (a[ci] && !b[ci]) {
            total += have_b ? field[ci] : penalty;
            participants[ci] = 1;
            uncovered_any = true;
          }
        }
        if (uncovered_any) {
          unsatisfied_on = true;
          for (int ci = 0; ci < n; ++ci) {
            if (b[ci] && !a[ci]) participants[ci] = 1;
          }
        }
        break;
      }
      case WinCondition::Kind::kSomeOn: {
        const auto a = cells_with(s, wc.a);
        const auto b = cells_with(s, *wc.b);
        bool satisfied = false;
        for (int ci = 0; ci < n && !satisfied; ++ci) satisfied = a[ci] && b[ci];
        if (satisfied) break;
        unsatisfied_on = true;
        for (int ci = 0; ci < n; ++ci) {
          if (a[ci] || b[ci]) participants[ci] = 1;
        }
        if (!any_set(a) || !any_set(b)) {
          total += penalty;
          break;
        }
        const auto field = l1_distance_field(b, s.width, s.height);
        int best = kFar;
        for (int ci = 0; ci < n; ++ci) {
          if (a[ci]) best = std::min(best, field[ci]);
        }
        total += best;
        break;
      }
      case WinCondition::Kind::kNoOn: {
        const auto a = cells_with(s, wc.a);
        const auto b = cells_with(s, *wc.b);
        for (int ci = 0; ci < n; ++ci) {
          if (a[ci] && b[ci]) {
            total += 1;
            participants[ci] = 1;
            unsatisfied_on = true;
          }
        }
        break;
      }
    }
  }

  if (cfg.include_player_term && unsatisfied_on && any_set(participants)) {
    const auto players = cells_with(s, game.player_ids);
    if (any_set(players)) {
      const auto field = l1_distance_field(participants, s.width, s.height);
      int best = kFar;
      for (int ci = 0; ci < n; ++ci) {
        if (players[ci]) best = std::min(best, field[ci]);
      }
      total += best;
    }
  }
  return total;
}

}  // namespace pscript
