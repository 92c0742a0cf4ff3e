#include <algorithm>
#include <bit>
#include <unordered_map>

#include "matcher.hpp"
#include "pscript/engine.hpp"

namespace pscript {

using detail::KernelMatch;
using detail::MatchContext;
using detail::WordMask;

namespace {

// Commands raised during one tick.
struct PendingCommands {
  bool win = false;
  bool again = false;
  bool restart = false;
  bool cancel = false;
  bool checkpoint = false;
  std::vector<std::string> messages;

  void queue(const RuleCommands& c) {
    win |= c.win;
    again |= c.again;
    restart |= c.restart;
    cancel |= c.cancel;
    checkpoint |= c.checkpoint;
    if (c.message && std::find(messages.begin(), messages.end(), *c.message) == messages.end()) {
      messages.push_back(*c.message);
    }
  }
};

// Precomputed per-variant data for quick rejection and tuple merging.
struct RulePlan {
  std::vector<ObjectId> required_ids;
  std::vector<std::vector<ObjectId>> required_any;
  std::vector<int> required_force_index;
  std::vector<std::vector<int>> kernel_meta_slots;
  bool has_rhs = false;
};

RulePlan make_plan(const CompiledRule& rule) {
  RulePlan plan;
  plan.required_ids = rule.required_objects.ids();
  for (const ObjectMask& m : rule.required_any) plan.required_any.push_back(m.ids());
  for (const auto& [layer, bit] : rule.required_forces) {
    plan.required_force_index.push_back(layer * 5 + std::countr_zero(bit));
  }
  for (const Kernel& k : rule.lhs) {
    std::vector<int> slots;
    for (const CellPattern& c : k) {
      for (const PatternEntry& e : c.entries) {
        if (e.meta_slot >= 0) slots.push_back(e.meta_slot);
      }
    }
    plan.kernel_meta_slots.push_back(std::move(slots));
  }
  plan.has_rhs = !rule.rhs.empty();
  return plan;
}

bool merge_context(MatchContext& into, const KernelMatch& km, const std::vector<int>& meta_slots) {
  for (int b = 0; b < detail::kMaxBindingSlots; ++b) {
    const uint8_t v = km.ctx.bind[b];
    if (!v) continue;
    if (into.bind[b] && into.bind[b] != v) return false;
    into.bind[b] = v;
  }
  for (int slot : meta_slots) into.meta[slot] = km.ctx.meta[slot];
  return true;
}

}  // namespace

struct Engine::Impl {
  const GameDef& game;
  detail::EngineTables tables;
  std::unordered_map<const CompiledRule*, RulePlan> plans;
  std::optional<std::mt19937_64> rng;
  bool needs_backup = false;
  bool uses_random = false;

  // Scratch buffers reused across applications.
  std::vector<int> positions;
  std::vector<uint64_t> saved_objects;
  std::vector<uint8_t> saved_forces;
  std::vector<int> saved_cells;

  // Trace destination while a tick runs.
  std::vector<RuleApplication>* trace = nullptr;
  bool trace_late = false;
  int trace_block = 0;
  int trace_group = 0;

  Impl(const GameDef& g, const EngineLimits& limits) : game(g), tables(g) {
    for (const auto* list : {&g.blocks, &g.late_blocks}) {
      for (const Block& b : *list) {
        for (const RuleGroup& grp : b.groups) {
          for (const CompiledRule& r : grp.rules) {
            plans.emplace(&r, make_plan(r));
            needs_backup |= r.commands.cancel;
            uses_random |= r.uses_random;
          }
        }
      }
    }
    needs_backup |= g.prelude.require_player_movement;
    if (limits.rng_seed) rng.emplace(*limits.rng_seed);
  }

  const RulePlan& plan_for(const CompiledRule& r) {
    auto it = plans.find(&r);
    if (it == plans.end()) it = plans.emplace(&r, make_plan(r)).first;
    return it->second;
  }

  bool quick_ok(const GridState& s, const RulePlan& plan) const {
    for (ObjectId id : plan.required_ids) {
      if (s.object_counts[id] == 0) return false;
    }
    for (const auto& any : plan.required_any) {
      bool found = false;
      for (ObjectId id : any) {
        if (s.object_counts[id] > 0) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    for (int idx : plan.required_force_index) {
      if (s.force_counts[idx] == 0) return false;
    }
    return true;
  }

  // Applies every kernel of a matched tuple; true if the state changed.
  bool apply_tuple(GridState& s, const CompiledRule& rule, const KernelMatch* matches,
                   const MatchContext& ctx) {
    const int W = s.words;
    const int L = s.layers;
    saved_cells.clear();
    saved_objects.clear();
    saved_forces.clear();
    for (std::size_t k = 0; k < rule.lhs.size(); ++k) {
      detail::kernel_positions(s, rule.lhs[k], rule.direction, matches[k], positions);
      for (std::size_t c = 0; c < positions.size(); ++c) {
        const int ci = positions[c];
        if (ci < 0) continue;
        saved_cells.push_back(ci);
        saved_objects.insert(saved_objects.end(), s.cell(ci), s.cell(ci) + W);
        const uint8_t* f = s.forces.data() + static_cast<std::size_t>(ci) * L;
        saved_forces.insert(saved_forces.end(), f, f + L);
      }
    }
    std::mt19937_64* r = rng ? &*rng : nullptr;
    for (std::size_t k = 0; k < rule.lhs.size(); ++k) {
      const int offset = rule.kernel_offsets[k];
      // Positions were computed above in the same order; recompute cheaply.
      detail::kernel_positions(s, rule.lhs[k], rule.direction, matches[k], positions);
      for (std::size_t c = 0; c < positions.size(); ++c) {
        const int ci = positions[c];
        if (ci < 0) continue;
        const CellEffect& eff = rule.effects[offset + c];
        if (!eff.empty()) detail::apply_cell(tables, s, ci, rule.lhs[k][c], eff, ctx, r);
      }
    }
    for (std::size_t i = 0; i < saved_cells.size(); ++i) {
      const int ci = saved_cells[i];
      if (!std::equal(s.cell(ci), s.cell(ci) + W, saved_objects.begin() + i * W)) return true;
      const uint8_t* f = s.forces.data() + static_cast<std::size_t>(ci) * L;
      if (!std::equal(f, f + L, saved_forces.begin() + i * L)) return true;
    }
    return false;
  }

  // Calls fn(const KernelMatch* tuple, const MatchContext& ctx) for every
  // match tuple in lexicographic order; stops when fn returns true.
  template <typename Fn>
  bool for_each_tuple(const GridState& s, const CompiledRule& rule, const RulePlan& plan, Fn&& fn) {
    const int K = static_cast<int>(rule.lhs.size());
    MatchContext base{};
    if (K == 1) {
      return detail::for_each_kernel_match(tables, s, rule.lhs[0], rule.direction, base,
                                           [&](const KernelMatch& m) { return fn(&m, m.ctx); });
    }
    std::vector<std::vector<KernelMatch>> local(K);
    for (int k = 1; k < K; ++k) {
      detail::for_each_kernel_match(tables, s, rule.lhs[k], rule.direction, base,
                                    [&](const KernelMatch& m) {
                                      local[k].push_back(m);
                                      return false;
                                    });
      if (local[k].empty()) return false;
    }
    std::vector<KernelMatch> tup(K);
    auto rec = [&](auto& self, int k, const MatchContext& ctx) -> bool {
      if (k == K) return fn(tup.data(), ctx);
      for (const KernelMatch& m : local[k]) {
        MatchContext merged = ctx;
        if (!merge_context(merged, m, plan.kernel_meta_slots[k])) continue;
        tup[k] = m;
        if (self(self, k + 1, merged)) return true;
      }
      return false;
    };
    return detail::for_each_kernel_match(
        tables, s, rule.lhs[0], rule.direction, base, [&](const KernelMatch& m0) {
          tup[0] = m0;
          return rec(rec, 1, m0.ctx);
        });
  }

  struct SearchResult {
    bool matched = false;
    bool applied = false;
    int anchor = -1;
  };

  SearchResult find_and_apply(GridState& s, const CompiledRule& rule, const RulePlan& plan) {
    SearchResult res;
    for_each_tuple(s, rule, plan, [&](const KernelMatch* t, const MatchContext& ctx) {
      res.matched = true;
      if (!plan.has_rhs) return true;
      if (apply_tuple(s, rule, t, ctx)) {
        res.applied = true;
        res.anchor = t[0].anchor;
        return true;
      }
      return false;
    });
    return res;
  }

  void record(const RuleGroup& group, int rule_index, int anchor) {
    if (!trace) return;
    trace->push_back(RuleApplication{trace_late, trace_block, trace_group, rule_index, anchor,
                                     group.rules[rule_index].source_line});
  }

  bool apply_random_group(GridState& s, const RuleGroup& group, PendingCommands& pending) {
    if (!rng) {
      throw EngineError("random rule group at line " + std::to_string(group.source_line) +
                        " requires an rng seed");
    }
    struct Candidate {
      int rule;
      std::vector<KernelMatch> tuple;
      MatchContext ctx;
    };
    std::vector<Candidate> candidates;
    for (int ri = 0; ri < static_cast<int>(group.rules.size()); ++ri) {
      const CompiledRule& rule = group.rules[ri];
      const RulePlan& plan = plan_for(rule);
      if (!quick_ok(s, plan)) continue;
      bool matched = false;
      for_each_tuple(s, rule, plan, [&](const KernelMatch* t, const MatchContext& ctx) {
        matched = true;
        if (plan.has_rhs) {
          candidates.push_back({ri, std::vector<KernelMatch>(t, t + rule.lhs.size()), ctx});
        }
        return false;
      });
      if (matched) pending.queue(rule.commands);
    }
    while (!candidates.empty()) {
      const std::size_t pick = (*rng)() % candidates.size();
      const Candidate& c = candidates[pick];
      if (apply_tuple(s, group.rules[c.rule], c.tuple.data(), c.ctx)) {
        record(group, c.rule, c.tuple[0].anchor);
        return true;
      }
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return false;
  }

  bool apply_group(GridState& s, const RuleGroup& group, PendingCommands& pending,
                   const EngineLimits& limits) {
    if (group.is_random) return apply_random_group(s, group, pending);
    bool any = false;
    int applications = 0;
    int sweeps = 0;
    const int n = static_cast<int>(group.rules.size());
    for (;;) {
      bool pass = false;
      for (int ri = 0; ri < n; ++ri) {
        const CompiledRule& rule = group.rules[ri];
        const RulePlan& plan = plan_for(rule);
        bool queued = false;
        while (quick_ok(s, plan)) {
          SearchResult res = find_and_apply(s, rule, plan);
          if (res.matched && !queued) {
            pending.queue(rule.commands);
            queued = true;
          }
          if (!res.applied) break;
          pass = true;
          record(group, ri, res.anchor);
          if (++applications > limits.max_rule_applications_per_group) {
            throw EngineError("rule group at line " + std::to_string(group.source_line) +
                              " exceeded " +
                              std::to_string(limits.max_rule_applications_per_group) +
                              " applications (infinite loop?)");
          }
        }
      }
      if (!pass) break;
      any = true;
      if (++sweeps > limits.max_group_sweeps_per_block) {
        throw EngineError("rule group at line " + std::to_string(group.source_line) +
                          " exceeded " + std::to_string(limits.max_group_sweeps_per_block) +
                          " sweeps (infinite loop?)");
      }
    }
    return any;
  }

  bool run_blocks(GridState& s, const std::vector<Block>& blocks, bool late,
                  PendingCommands& pending, const EngineLimits& limits) {
    bool any = false;
    trace_late = late;
    for (int bi = 0; bi < static_cast<int>(blocks.size()); ++bi) {
      const Block& block = blocks[bi];
      trace_block = bi;
      int iterations = 0;
      for (;;) {
        bool changed = false;
        for (int gi = 0; gi < static_cast<int>(block.groups.size()); ++gi) {
          trace_group = gi;
          changed |= apply_group(s, block.groups[gi], pending, limits);
        }
        any |= changed;
        if (!block.is_loop || !changed) break;
        if (++iterations >= limits.max_loop_iterations) {
          const int line = block.groups.empty() ? 0 : block.groups.front().source_line;
          throw EngineError("loop starting at line " + std::to_string(line) + " exceeded " +
                            std::to_string(limits.max_loop_iterations) + " iterations");
        }
      }
    }
    return any;
  }

  void stamp_input(GridState& s, Action input) const {
    std::fill(s.last_input.begin(), s.last_input.end(), 0);
    if (input == Action::kNone) return;
    const uint8_t bit = input == Action::kAction
                            ? kForceAction
                            : force_of(static_cast<Direction>(static_cast<int>(input)));
    const int bit_index = std::countr_zero(bit);
    const int W = s.words;
    for (int ci = 0; ci < s.cells(); ++ci) {
      const uint64_t* c = s.cell(ci);
      bool hit = false;
      for (int w = 0; w < W; ++w) {
        uint64_t x = c[w] & tables.player_mask[w];
        while (x) {
          const ObjectId id = w * 64 + std::countr_zero(x);
          x &= x - 1;
          const int layer = tables.layer_of[id];
          uint8_t& f = s.forces[static_cast<std::size_t>(ci) * s.layers + layer];
          if (f) --s.force_counts[layer * 5 + std::countr_zero(f)];
          f = bit;
          ++s.force_counts[layer * 5 + bit_index];
          hit = true;
        }
      }
      if (hit) s.last_input[ci] = 1;
    }
  }

  bool player_planes_equal(const GridState& a, const GridState& b) const {
    const int W = a.words;
    for (int ci = 0; ci < a.cells(); ++ci) {
      for (int w = 0; w < W; ++w) {
        if ((a.cell(ci)[w] & tables.player_mask[w]) != (b.cell(ci)[w] & tables.player_mask[w])) {
          return false;
        }
      }
    }
    return true;
  }

  void restart(const Engine& engine, GridState& s, StepOutcome& out, int depth) {
    auto checkpoint = s.checkpoint;
    GridState fresh = make_level_state(game, s.level_index);
    if (checkpoint) {
      fresh.objects = *checkpoint;
      fresh.recount(game.num_objects());
      fresh.checkpoint = checkpoint;
    }
    s = std::move(fresh);
    out.restarted = true;
    if (game.prelude.run_rules_on_level_start && depth < 2) {
      StepOutcome inner;
      PendingCommands p;
      run(engine, s, Action::kNone, inner, p, depth + 1);
      out.messages.insert(out.messages.end(), inner.messages.begin(), inner.messages.end());
    }
  }

  void run(const Engine& engine, GridState& s, Action input, StepOutcome& out,
           PendingCommands& pending, int depth) {
    const std::vector<uint64_t> before = s.objects;
    std::optional<GridState> backup;
    if (needs_backup) backup = s;
    stamp_input(s, input);
    run_blocks(s, game.blocks, false, pending, engine.limits());
    engine.resolve_movement(s);
    run_blocks(s, game.late_blocks, true, pending, engine.limits());
    out.messages.insert(out.messages.end(), pending.messages.begin(), pending.messages.end());

    bool cancel = pending.cancel;
    if (!cancel && game.prelude.require_player_movement && input != Action::kNone &&
        input != Action::kAction && player_planes_equal(s, *backup)) {
      cancel = true;
    }
    if (cancel) {
      s = std::move(*backup);
      out.cancelled = true;
      return;
    }
    if (pending.restart) {
      restart(engine, s, out, depth);
      out.changed = true;
      return;
    }
    if (pending.win) out.won = true;
    if (pending.checkpoint) s.checkpoint = std::make_shared<const std::vector<uint64_t>>(s.objects);
    engine.clear_forces(s);
    out.changed = s.objects != before;
    if (!out.won) out.won = engine.check_win(s);
  }
};

Engine::Engine(std::shared_ptr<const GameDef> game, EngineLimits limits)
    : game_(std::move(game)), limits_(limits), impl_(std::make_unique<Impl>(*game_, limits_)) {
  if (limits_.max_rule_applications_per_group <= 0 || limits_.max_group_sweeps_per_block <= 0 ||
      limits_.max_loop_iterations <= 0 || limits_.max_again_ticks <= 0) {
    throw std::invalid_argument("engine limits must be positive");
  }
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

void Engine::reseed(uint64_t seed) {
  limits_.rng_seed = seed;
  impl_->rng.emplace(seed);
}

bool Engine::apply_rule_group(GridState& state, const RuleGroup& group) {
  PendingCommands pending;
  return impl_->apply_group(state, group, pending, limits_);
}

bool Engine::resolve_movement(GridState& s) const {
  const detail::EngineTables& t = impl_->tables;
  const int W = s.words;
  const int L = s.layers;
  bool moved_any = false;
  for (;;) {
    bool moved = false;
    for (int ci = 0; ci < s.cells(); ++ci) {
      for (int layer = 0; layer < L; ++layer) {
        uint8_t& f = s.forces[static_cast<std::size_t>(ci) * L + layer];
        if (f == 0 || f == kForceAction) continue;
        const int x = ci % s.width;
        const int y = ci / s.width;
        int dx, dy;
        detail::direction_delta(static_cast<Direction>(std::countr_zero(f)), dx, dy);
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= s.width || ny >= s.height) continue;
        const int di = ny * s.width + nx;
        const WordMask& lm = t.layer_masks[layer];
        uint64_t* src = s.cell(ci);
        uint64_t* dst = s.cell(di);
        bool blocked = false;
        for (int w = 0; w < W; ++w) blocked |= (dst[w] & lm[w]) != 0;
        if (blocked) continue;
        --s.force_counts[layer * 5 + std::countr_zero(f)];
        f = 0;
        for (int w = 0; w < W; ++w) {
          const uint64_t occupant = src[w] & lm[w];
          src[w] &= ~occupant;
          dst[w] |= occupant;
        }
        moved = true;
      }
    }
    if (!moved) break;
    moved_any = true;
  }
  return moved_any;
}

void Engine::clear_forces(GridState& s) const {
  std::fill(s.forces.begin(), s.forces.end(), 0);
  std::fill(s.force_counts.begin(), s.force_counts.end(), 0);
}

bool Engine::check_win(const GridState& s) const {
  const GameDef& g = *game_;
  if (g.win_conditions.empty()) return false;
  const int W = s.words;
  auto intersects = [W](const uint64_t* cell, const ObjectMask& m) {
    for (int w = 0; w < W; ++w) {
      if (cell[w] & m.w[w]) return true;
    }
    return false;
  };
  for (const WinCondition& wc : g.win_conditions) {
    bool ok = true;
    switch (wc.kind) {
      case WinCondition::Kind::kAllOn:
        for (int ci = 0; ci < s.cells() && ok; ++ci) {
          if (intersects(s.cell(ci), wc.a) && !intersects(s.cell(ci), *wc.b)) ok = false;
        }
        break;
      case WinCondition::Kind::kSomeOn:
        ok = false;
        for (int ci = 0; ci < s.cells() && !ok; ++ci) {
          if (intersects(s.cell(ci), wc.a) && intersects(s.cell(ci), *wc.b)) ok = true;
        }
        break;
      case WinCondition::Kind::kNoOn:
        for (int ci = 0; ci < s.cells() && ok; ++ci) {
          if (intersects(s.cell(ci), wc.a) && intersects(s.cell(ci), *wc.b)) ok = false;
        }
        break;
      case WinCondition::Kind::kSome:
      case WinCondition::Kind::kNone: {
        bool present = false;
        for (ObjectId id : wc.a.ids()) present |= s.object_counts[id] > 0;
        ok = wc.kind == WinCondition::Kind::kSome ? present : !present;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

void Engine::check_invariants(const GridState& s) const {
  const detail::EngineTables& t = impl_->tables;
  for (int ci = 0; ci < s.cells(); ++ci) {
    for (int layer = 0; layer < s.layers; ++layer) {
      int n = 0;
      for (int w = 0; w < s.words; ++w) n += std::popcount(s.cell(ci)[w] & t.layer_masks[layer][w]);
      if (n > 1) {
        throw EngineError("layer exclusivity violated at cell " + std::to_string(ci) +
                          ", layer " + std::to_string(layer));
      }
      if (n == 0 && s.force(ci, layer)) {
        throw EngineError("force without occupant at cell " + std::to_string(ci) + ", layer " +
                          std::to_string(layer));
      }
    }
  }
}

GridState Engine::init_level(int level_index, StepOutcome* outcome) {
  GridState s = make_level_state(*game_, level_index);
  StepOutcome out;
  if (game_->prelude.run_rules_on_level_start) out = tick(s, Action::kNone);
  if (outcome) *outcome = std::move(out);
  return s;
}

StepOutcome Engine::tick(GridState& state, Action input) {
  StepOutcome out;
  if (trace_) out.rule_trace.emplace();
  if (input == Action::kAction && game_->prelude.noaction) return out;
  impl_->trace = out.rule_trace ? &*out.rule_trace : nullptr;
  struct TraceReset {
    Impl& impl;
    ~TraceReset() { impl.trace = nullptr; }
  } reset{*impl_};

  PendingCommands pending;
  impl_->run(*this, state, input, out, pending, 0);
  if (!pending.again || out.won || out.cancelled || out.restarted) return out;
  for (;;) {
    if (out.again_ticks_used >= limits_.max_again_ticks) {
      throw EngineError("again chain exceeded " + std::to_string(limits_.max_again_ticks) +
                        " ticks");
    }
    StepOutcome sub;
    PendingCommands next;
    impl_->run(*this, state, Action::kNone, sub, next, 0);
    ++out.again_ticks_used;
    out.messages.insert(out.messages.end(), sub.messages.begin(), sub.messages.end());
    out.changed |= sub.changed;
    out.won |= sub.won;
    out.restarted |= sub.restarted;
    if (sub.won || sub.cancelled || sub.restarted || !sub.changed || !next.again) break;
  }
  return out;
}

std::pair<GridState, StepOutcome> init_level(std::shared_ptr<const GameDef> game, int level_index,
                                             const EngineLimits& limits) {
  Engine engine(std::move(game), limits);
  StepOutcome out;
  GridState s = engine.init_level(level_index, &out);
  return {std::move(s), std::move(out)};
}

std::pair<GridState, StepOutcome> tick(std::shared_ptr<const GameDef> game, GridState state,
                                       Action input, const EngineLimits& limits) {
  Engine engine(std::move(game), limits);
  StepOutcome out = engine.tick(state, input);
  return {std::move(state), std::move(out)};
}

}  // namespace pscript
