#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pscript/solver.hpp"

namespace pscript {

// ---------------------------------------------------------------------------
// Random-rollout throughput

struct ThroughputPoint {
  int num_envs = 0;
  int64_t total_ticks = 0;
  double elapsed_s = 0;
  double fps = 0;
  uint64_t content_digest = 0;
};

struct ThroughputReport {
  std::string game;
  int level = 0;
  int num_envs = 0;
  int steps_per_env = 0;
  uint64_t seed = 0;
  int workers = 1;
  int64_t total_ticks = 0;
  int64_t resets = 0;
  double elapsed_s = 0;
  double fps = 0;
  std::vector<std::string> action_set;
  std::vector<uint64_t> final_digests;  // per env, in env order
  uint64_t content_digest = 0;          // digest over final_digests and resets
  std::vector<ThroughputPoint> sweep;
};

// Runs `num_envs` independent uniform-random episodes of `steps` ticks each,
// resetting on win or restart. Env i draws from an RNG seeded by (seed, i),
// so content does not depend on `workers` (0 = hardware concurrency).
ThroughputReport profile_random(std::shared_ptr<const GameDef> game, int level_index,
                                int num_envs, int steps, uint64_t seed, int workers = 0);

// One profile_random run per batch size; the report's top-level fields
// describe the largest batch.
ThroughputReport profile_sweep(std::shared_ptr<const GameDef> game, int level_index,
                               const std::vector<int>& batch_sizes, int steps, uint64_t seed,
                               int workers = 0);

std::string throughput_to_json(const ThroughputReport& r);
std::string throughput_to_csv(const ThroughputReport& r);

// ---------------------------------------------------------------------------
// Rendering

struct FrameImage {
  int width = 0;   // pixels
  int height = 0;  // pixels
  std::vector<uint8_t> rgb;  // row-major RGB triples
};

FrameImage render_frame(const GameDef& game, const GridState& state, int scale);
std::vector<uint8_t> encode_png(const FrameImage& image);
void write_png(const FrameImage& image, const std::string& path);

// ---------------------------------------------------------------------------
// Corpus validation

enum class LedgerStatus {
  kSuccess,
  kCompileError,
  kRuntimeError,
  kSolutionError,
  kStateError,
  kUnvalidated,
};
const char* ledger_status_name(LedgerStatus s);
inline constexpr int kLedgerStatusCount = 6;

struct LedgerRow {
  std::string game;
  std::string path;
  int level = -1;  // -1 for whole-game rows (compile errors, I/O errors)
  LedgerStatus status = LedgerStatus::kUnvalidated;
  std::string detail;
  int64_t env_steps = 0;
  int solution_length = 0;
  bool external_solution = false;
};

struct Ledger {
  std::vector<LedgerRow> rows;
  std::map<std::string, int> counts() const;  // every status name present, possibly 0
  int total() const { return static_cast<int>(rows.size()); }
};

struct CorpusLimits {
  SearchLimits search{100'000, 60.0, true, std::nullopt};
  EngineLimits engine;
  int workers = 0;
};

// Compiles every game, then for each playable level validates a solution:
// taken from `<game>.solutions.json` next to the game when present, else
// found by breadth-first search within the limits. Solutions are replayed in
// a fresh engine and classified.
Ledger validate_corpus(const std::vector<std::string>& game_paths, const CorpusLimits& limits = {});

std::string ledger_to_json(const Ledger& ledger);
std::string ledger_to_csv(const Ledger& ledger);

}  // namespace pscript
