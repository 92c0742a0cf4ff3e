#include <array>
#include <chrono>
#include <unordered_map>
#include <unordered_set>

#include "pscript/agentenv.hpp"
#include "pscript/solver.hpp"

namespace pscript {
namespace {

using CellKey = std::array<uint64_t, kMaskWords>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (uint64_t w : k) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

void put_varint(std::vector<uint8_t>& out, uint32_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_varint(const uint8_t*& p) {
  uint32_t v = 0;
  int shift = 0;
  while (*p & 0x80) {
    v |= static_cast<uint32_t>(*p++ & 0x7f) << shift;
    shift += 7;
  }
  v |= static_cast<uint32_t>(*p++) << shift;
  return v;
}

// Presence planes stored as sparse differences from the root state. Cell
// contents are interned in a palette so each changed cell costs a few bytes.
class StateStore {
 public:
  StateStore(std::vector<uint64_t> base, int words) : base_(std::move(base)), words_(words) {}

  std::size_t size() const { return offsets_.size(); }

  void push(const std::vector<uint64_t>& objects) {
    offsets_.push_back(arena_.size());
    const int cells = static_cast<int>(base_.size()) / words_;
    int prev = 0;
    for (int ci = 0; ci < cells; ++ci) {
      const uint64_t* a = objects.data() + static_cast<std::size_t>(ci) * words_;
      const uint64_t* b = base_.data() + static_cast<std::size_t>(ci) * words_;
      bool same = true;
      for (int w = 0; w < words_; ++w) same &= a[w] == b[w];
      if (same) continue;
      CellKey key{};
      for (int w = 0; w < words_; ++w) key[w] = a[w];
      auto [it, fresh] = palette_index_.emplace(key, static_cast<uint32_t>(palette_.size()));
      if (fresh) palette_.push_back(key);
      put_varint(arena_, static_cast<uint32_t>(ci - prev));
      put_varint(arena_, it->second);
      prev = ci;
    }
  }

  void load(std::size_t index, std::vector<uint64_t>& objects) const {
    objects = base_;
    const uint8_t* p = arena_.data() + offsets_[index];
    const uint8_t* end =
        arena_.data() + (index + 1 < offsets_.size() ? offsets_[index + 1] : arena_.size());
    int ci = 0;
    while (p < end) {
      ci += static_cast<int>(get_varint(p));
      const CellKey& key = palette_[get_varint(p)];
      for (int w = 0; w < words_; ++w) objects[static_cast<std::size_t>(ci) * words_ + w] = key[w];
    }
  }

 private:
  std::vector<uint64_t> base_;
  int words_;
  std::vector<uint8_t> arena_;
  std::vector<std::size_t> offsets_;
  std::vector<CellKey> palette_;
  std::unordered_map<CellKey, uint32_t, CellKeyHash> palette_index_;
};

std::string hex64(uint64_t v) { return digest_hex(v); }

}  // namespace

std::vector<Action> default_action_set(const GameDef& game) {
  std::vector<Action> out = {Action::kUp, Action::kDown, Action::kLeft, Action::kRight};
  if (game.references_action() && !game.prelude.noaction) out.push_back(Action::kAction);
  return out;
}

uint64_t hash_state(const GridState& state, int num_objects) {
  return state_digest(state, num_objects);
}

Solution solve_bfs(std::shared_ptr<const GameDef> game, int level_index, const SearchLimits& limits,
                   std::optional<std::vector<Action>> action_set,
                   const EngineLimits& engine_limits) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  if (limits.max_env_steps <= 0 || limits.timeout_s <= 0) {
    throw std::invalid_argument("search limits must be positive");
  }
  EngineLimits elimits = engine_limits;
  if (game->uses_randomness()) {
    if (!limits.rng_seed && !elimits.rng_seed) {
      throw std::invalid_argument("game uses randomness; the solver needs an explicit seed");
    }
    if (limits.rng_seed) elimits.rng_seed = limits.rng_seed;
  }
  const std::vector<Action> actions = action_set ? *action_set : default_action_set(*game);
  const int n_objects = game->num_objects();
  const bool keep_checkpoints = game->uses_checkpoint();

  Engine engine(game, elimits);
  Solution sol;
  sol.game = hex64(game->source_digest);
  sol.level = level_index;

  GridState root = engine.init_level(level_index);
  engine.clear_forces(root);
  if (engine.check_win(root)) {
    sol.solved = true;
    sol.terminal_digest = state_digest(root, n_objects);
    sol.best_score = win_distance(*game, root);
    sol.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return sol;
  }

  StateStore store(root.objects, root.words);
  std::vector<int32_t> parent;
  std::vector<uint8_t> via;
  std::vector<int32_t> depth;
  std::vector<std::shared_ptr<const std::vector<uint64_t>>> checkpoints;
  std::unordered_set<uint64_t> seen;
  seen.reserve(1 << 16);

  auto add_node = [&](const GridState& s, int32_t from, Action a, int32_t d) {
    store.push(s.objects);
    parent.push_back(from);
    via.push_back(static_cast<uint8_t>(a));
    depth.push_back(d);
    if (keep_checkpoints) checkpoints.push_back(s.checkpoint);
  };
  auto path_to = [&](int32_t node) {
    std::vector<int> path;
    for (int32_t i = node; i > 0; i = parent[i]) path.push_back(via[i]);
    return std::vector<int>(path.rbegin(), path.rend());
  };

  add_node(root, -1, Action::kNone, 0);
  seen.insert(state_digest(root, n_objects));
  double best_score = win_distance(*game, root);
  int32_t best_node = 0;
  uint64_t best_digest = state_digest(root, n_objects);

  GridState current = root;
  GridState child;
  bool out_of_budget = false;
  for (std::size_t head = 0; head < store.size() && !out_of_budget; ++head) {
    store.load(head, current.objects);
    current.recount(n_objects);
    if (keep_checkpoints) current.checkpoint = checkpoints[head];
    ++sol.nodes_expanded;
    for (Action a : actions) {
      if (sol.env_steps >= limits.max_env_steps) {
        out_of_budget = true;
        break;
      }
      if ((sol.env_steps & 255) == 0 &&
          std::chrono::duration<double>(Clock::now() - start).count() >= limits.timeout_s) {
        out_of_budget = true;
        break;
      }
      child = current;
      const StepOutcome out = engine.tick(child, a);
      ++sol.env_steps;
      if (out.won) {
        sol.solved = true;
        sol.actions = path_to(static_cast<int32_t>(head));
        sol.actions.push_back(static_cast<int>(a));
        sol.terminal_digest = state_digest(child, n_objects);
        sol.best_score = win_distance(*game, child);
        sol.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
        return sol;
      }
      const uint64_t digest = state_digest(child, n_objects);
      if (limits.dedupe && !seen.insert(digest).second) continue;
      const int32_t d = depth[head] + 1;
      add_node(child, static_cast<int32_t>(head), a, d);
      const double score = win_distance(*game, child);
      if (score < best_score || (score == best_score && d >= depth[best_node])) {
        best_score = score;
        best_node = static_cast<int32_t>(store.size() - 1);
        best_digest = digest;
      }
    }
  }
  sol.actions = path_to(best_node);
  sol.best_score = best_score;
  sol.terminal_digest = best_digest;
  sol.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  return sol;
}

}  // namespace pscript
