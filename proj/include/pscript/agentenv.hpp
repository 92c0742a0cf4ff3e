#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pscript/engine.hpp"

namespace pscript {

struct HeuristicConfig {
  bool include_player_term = true;
  // Cost charged when a condition has no satisfying candidate; negative
  // means "width + height of the level".
  double unreachable_penalty = -1;
};

// Distance-to-win: per-condition Manhattan costs plus, when some on-condition
// is unsatisfied, the distance from the nearest player to the nearest cell
// taking part in an unsatisfied on-condition. Walls are ignored.
double win_distance(const GameDef& game, const GridState& state, const HeuristicConfig& cfg = {});

// Planes in order: one per atomic object (id order), then five per collision
// layer (up, down, left, right, action; layers in declaration order), then
// the last-input plane. Each plane is row-major.
struct Observation {
  int planes = 0;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;  // planes * height * width, 0 or 1

  uint8_t at(int plane, int y, int x) const {
    return data[(static_cast<std::size_t>(plane) * height + y) * width + x];
  }
};

Observation observe(const GameDef& game, const GridState& state);
// Rebuilds a state from its observation (inverse of observe).
GridState state_from_observation(const GameDef& game, const Observation& obs, int level_index);

// Binary layout: "PSOB", u32le planes, u32le height, u32le width, then one
// byte per (plane, row, column) in that nesting order.
std::vector<uint8_t> observation_to_binary(const Observation& obs);
std::string observation_to_json(const GameDef& game, const Observation& obs);

struct EnvConfig {
  int horizon = 1000;
  HeuristicConfig heuristic;
  EngineLimits limits;
};

struct EnvState {
  GridState grid;
  double score = 0;
  int steps = 0;
  bool done = false;
  bool won = false;
};

struct StepResult {
  Observation observation;
  double reward = 0;
  bool done = false;
  StepOutcome info;
};

// Episode wrapper around an Engine. One instance per worker.
class Environment {
 public:
  Environment(std::shared_ptr<const GameDef> game, EnvConfig cfg = {});

  const GameDef& game() const { return engine_.game(); }
  const EnvConfig& config() const { return cfg_; }
  Engine& engine() { return engine_; }

  std::pair<EnvState, Observation> reset(int level_index, uint64_t seed);
  StepResult step(EnvState& env, Action action);

 private:
  EnvConfig cfg_;
  Engine engine_;
};

}  // namespace pscript
