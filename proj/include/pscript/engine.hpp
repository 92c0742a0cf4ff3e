#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pscript/compiler.hpp"

namespace pscript {

enum class Action : uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kAction = 4, kNone = 5 };

inline constexpr int kNumActions = 6;
const char* action_name(Action a);
std::optional<Action> action_from_code(int code);

struct EngineLimits {
  int max_rule_applications_per_group = 10000;
  int max_group_sweeps_per_block = 10000;
  int max_loop_iterations = 200;
  int max_again_ticks = 1000;
  std::optional<uint64_t> rng_seed;
};

// Raised when a cap in EngineLimits is hit or an internal invariant fails.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mutable level state. Presence is stored cell-major (`words` 64-bit words
// per cell) so a cell's object set is one contiguous mask; forces hold one
// bit per (cell, layer) from {0, up, down, left, right, action}.
struct GridState {
  int level_index = -1;
  int width = 0;
  int height = 0;
  int words = 1;
  int layers = 0;
  std::vector<uint64_t> objects;      // cells * words
  std::vector<uint8_t> forces;        // cells * layers
  std::vector<uint8_t> last_input;    // cells, 0 or 1
  std::vector<int32_t> object_counts;  // per atomic id
  std::vector<int32_t> force_counts;   // per (layer, force bit index)
  std::shared_ptr<const std::vector<uint64_t>> checkpoint;

  int cells() const { return width * height; }
  const uint64_t* cell(int ci) const { return objects.data() + static_cast<std::size_t>(ci) * words; }
  uint64_t* cell(int ci) { return objects.data() + static_cast<std::size_t>(ci) * words; }
  bool has(int ci, ObjectId id) const { return (cell(ci)[id >> 6] >> (id & 63)) & 1; }
  uint8_t force(int ci, int layer) const { return forces[static_cast<std::size_t>(ci) * layers + layer]; }
  bool any_force() const;

  // Presence plane for one object, row-major.
  std::vector<uint8_t> presence_plane(ObjectId id) const;
  // Rebuilds object_counts and force_counts from the planes.
  void recount(int num_objects);

  // Same level, same presence and forces (checkpoint and counts excluded).
  bool same_planes(const GridState& other) const {
    return width == other.width && height == other.height && objects == other.objects &&
           forces == other.forces;
  }
};

// FNV-1a 64 over: u32le width, u32le height, then for each object id in
// order its presence plane packed row-major, least significant bit first,
// ceil(cells / 8) bytes per plane.
uint64_t state_digest(const GridState& state, int num_objects);
std::string digest_hex(uint64_t digest);

struct RuleApplication {
  bool late = false;
  int block = 0;
  int group = 0;
  int rule = 0;    // variant index within the group
  int cell = 0;    // anchor cell of the first kernel
  int line = 0;    // source line of the variant
};

struct StepOutcome {
  bool won = false;
  bool restarted = false;
  bool cancelled = false;
  bool changed = false;
  std::vector<std::string> messages;
  int again_ticks_used = 0;
  std::optional<std::vector<RuleApplication>> rule_trace;
};

// Executes ticks of one compiled game. Cheap to construct; holds only the
// shared game, the limits, scratch buffers and the RNG. Not thread-safe:
// use one Engine per worker.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const GameDef> game, EngineLimits limits = {});
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) noexcept;

  const GameDef& game() const { return *game_; }
  const std::shared_ptr<const GameDef>& game_ptr() const { return game_; }
  const EngineLimits& limits() const { return limits_; }
  void set_trace(bool on) { trace_ = on; }
  void reseed(uint64_t seed);

  // Fresh state for a playable level. Runs the level-start tick when the
  // prelude asks for it.
  GridState init_level(int level_index, StepOutcome* outcome = nullptr);
  StepOutcome tick(GridState& state, Action input);

  // Building blocks of tick, exposed for tests.
  bool apply_rule_group(GridState& state, const RuleGroup& group);
  bool resolve_movement(GridState& state) const;
  bool check_win(const GridState& state) const;
  void clear_forces(GridState& state) const;
  void check_invariants(const GridState& state) const;

 private:
  struct Impl;
  std::shared_ptr<const GameDef> game_;
  EngineLimits limits_;
  bool trace_ = false;
  std::unique_ptr<Impl> impl_;
};

// Functional wrappers over Engine.
std::pair<GridState, StepOutcome> init_level(std::shared_ptr<const GameDef> game, int level_index,
                                             const EngineLimits& limits = {});
std::pair<GridState, StepOutcome> tick(std::shared_ptr<const GameDef> game, GridState state,
                                       Action input, const EngineLimits& limits = {});

// Builds the level's initial state without running any rules.
GridState make_level_state(const GameDef& game, int level_index);

}  // namespace pscript
