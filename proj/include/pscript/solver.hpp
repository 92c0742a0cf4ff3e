#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pscript/engine.hpp"

namespace pscript {

struct SearchLimits {
  int64_t max_env_steps = 1'000'000;
  double timeout_s = 60.0;
  bool dedupe = true;
  std::optional<uint64_t> rng_seed;  // required for games with randomness
};

struct Solution {
  std::string game;  // hex digest of the game source
  int level = 0;
  std::vector<int> actions;
  bool solved = false;
  int64_t env_steps = 0;
  int64_t nodes_expanded = 0;
  double best_score = 0;
  double elapsed_s = 0;
  uint64_t terminal_digest = 0;
};

// Actions 0..3, plus 4 when some rule tests for `action` and the prelude
// does not set `noaction`.
std::vector<Action> default_action_set(const GameDef& game);

// Breadth-first search from the level's initial state.
Solution solve_bfs(std::shared_ptr<const GameDef> game, int level_index,
                   const SearchLimits& limits = {},
                   std::optional<std::vector<Action>> action_set = std::nullopt,
                   const EngineLimits& engine_limits = {});

// Digest used for deduplication; equal to state_digest.
uint64_t hash_state(const GridState& state, int num_objects);

enum class ReplayStatus { kSuccess, kCompileError, kRuntimeError, kSolutionError, kStateError };
const char* replay_status_name(ReplayStatus s);

struct ReplayReport {
  ReplayStatus status = ReplayStatus::kSuccess;
  uint64_t final_digest = 0;
  bool won = false;
  int steps_executed = 0;
  std::optional<int> divergence_step;
  std::vector<std::string> messages;
  std::string error;
};

// Replays `actions` from the level's initial state. `expected_trajectory`,
// when given, holds the digest expected after each action. Throws
// std::invalid_argument on action codes outside 0..5.
ReplayReport replay(std::shared_ptr<const GameDef> game, int level_index,
                    const std::vector<int>& actions,
                    std::optional<uint64_t> expected_digest = std::nullopt,
                    const std::vector<uint64_t>* expected_trajectory = nullptr,
                    const EngineLimits& engine_limits = {});

std::string solution_to_json(const Solution& s);
Solution solution_from_json(const std::string& text);
std::string replay_report_to_json(const ReplayReport& r);
std::optional<uint64_t> parse_digest_hex(const std::string& hex);

}  // namespace pscript
