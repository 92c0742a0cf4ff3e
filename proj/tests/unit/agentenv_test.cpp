#include <gtest/gtest.h>

#include <climits>
#include <cstdlib>
#include <random>
#include <string>

#include "pscript/agentenv.hpp"
#include "properties.hpp"
#include "support.hpp"

namespace pscript {
namespace {

using testkit::compile_text;
using testkit::grid_from_picture;
using testkit::read_file;
using Key = std::map<char, std::vector<std::string>>;

std::string sokoban_with(const std::string& levels) {
  return testkit::replace_levels(read_file(testkit::games_dir() + "/sokoban_basic.txt"), levels);
}

const Key kSokoKey{{'.', {}},           {'#', {"wall"}},   {'p', {"player"}}, {'*', {"crate"}},
                   {'o', {"target"}},   {'@', {"crate", "target"}}};

struct Cell {
  int x, y;
};

std::vector<Cell> cells_of(const GameDef& g, const GridState& s, const char* name) {
  std::vector<Cell> out;
  const ObjectId id = *g.object_table.find(name);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (s.has(y * s.width + x, id)) out.push_back({x, y});
    }
  }
  return out;
}

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

bool same(Cell a, Cell b) { return a.x == b.x && a.y == b.y; }

// Brute-force pairwise evaluation of the Sokoban heuristic
// (all target on crate, with the player term).
double oracle_sokoban(const GameDef& g, const GridState& s) {
  const auto targets = cells_of(g, s, "target");
  const auto crates = cells_of(g, s, "crate");
  const auto players = cells_of(g, s, "player");
  const double penalty = s.width + s.height;
  double cost = 0;
  std::vector<Cell> participants;
  for (Cell t : targets) {
    bool covered = false;
    for (Cell c : crates) covered |= same(t, c);
    if (covered) continue;
    participants.push_back(t);
    if (crates.empty()) {
      cost += penalty;
      continue;
    }
    int best = INT_MAX;
    for (Cell c : crates) best = std::min(best, manhattan(t, c));
    cost += best;
  }
  if (participants.empty()) return cost;
  for (Cell c : crates) {
    bool on_target = false;
    for (Cell t : targets) on_target |= same(t, c);
    if (!on_target) participants.push_back(c);
  }
  if (players.empty()) return cost;
  int best = INT_MAX;
  for (Cell p : players) {
    for (Cell q : participants) best = std::min(best, manhattan(p, q));
  }
  return cost + best;
}

TEST(WinDistance, CoveredTargetsScoreZero) {
  const auto g = compile_text(sokoban_with("#####\n#p@@#\n#####\n"));
  const GridState s = make_level_state(*g, 0);
  EXPECT_EQ(win_distance(*g, s), 0.0);
}

TEST(WinDistance, TargetCrateAndPlayerExample) {
  const auto g = compile_text(sokoban_with("...\n...\n...\n...\n"));
  // target at (2,3), crate at (0,0), player at (0,1)
  const GridState s = grid_from_picture(*g, {"*..", "p..", "...", "..o"}, kSokoKey, 0);
  EXPECT_EQ(oracle_sokoban(*g, s), 6.0);
  EXPECT_EQ(win_distance(*g, s), 6.0);
  HeuristicConfig no_player;
  no_player.include_player_term = false;
  EXPECT_EQ(win_distance(*g, s, no_player), 5.0);
}

TEST(WinDistance, NoConditionCountsInstances) {
  std::string src = read_file(testkit::games_dir() + "/sokoban_basic.txt");
  src.replace(src.find("All Target on Crate"), 19, "No Crate");
  const auto g = compile_text(testkit::replace_levels(src, "#p****#\n"));
  const GridState s = make_level_state(*g, 0);
  EXPECT_EQ(win_distance(*g, s), 4.0);
}

TEST(WinDistance, AgreesWithBruteForceOnRandomStates) {
  const auto g = compile_text(sokoban_with("...\n"));
  Engine engine(g);
  std::mt19937_64 rng(11);
  int zeros = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 5);
    const int h = 2 + static_cast<int>(rng() % 5);
    std::vector<std::string> rows(h, std::string(w, '.'));
    const char pieces[] = {'p', '*', 'o', '@', '#'};
    const int n = static_cast<int>(rng() % (w * h));
    for (int i = 0; i < n; ++i) rows[rng() % h][rng() % w] = pieces[rng() % 5];
    const GridState s = grid_from_picture(*g, rows, kSokoKey, 0);
    const double got = win_distance(*g, s);
    ASSERT_EQ(got, oracle_sokoban(*g, s)) << "trial " << trial;
    if (got == 0) {
      ++zeros;
      EXPECT_TRUE(engine.check_win(s)) << "trial " << trial;
    }
  }
  EXPECT_GT(zeros, 0);
}

TEST(WinDistance, ZeroImpliesWinOnPlayouts) {
  for (const std::string& path : testkit::exemplar_paths()) {
    const auto g = load_game(path);
    if (g->win_conditions.empty()) continue;
    EngineLimits lim;
    lim.rng_seed = testkit::seed_if_random(*g, 3);
    Engine engine(g, lim);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
      const GridState s = testkit::random_playout_state(engine, rng, 40);
      if (win_distance(*g, s) == 0) EXPECT_TRUE(engine.check_win(s)) << path;
    }
  }
}

TEST(Environment, ResetLimeRick) {
  const auto g = compile_text(read_file(testkit::fixtures_dir() + "/limerick_appendix.txt"));
  Environment env(g);
  const auto [state, obs] = env.reset(1, 0);
  const int head = *g->object_table.find("playerhead1");
  int bits = 0;
  for (int y = 0; y < obs.height; ++y) {
    for (int x = 0; x < obs.width; ++x) bits += obs.at(head, y, x);
  }
  EXPECT_EQ(bits, 1);
  EXPECT_EQ(obs.planes, g->num_objects() + 5 * g->num_layers() + 1);
  const auto again = env.reset(1, 0);
  EXPECT_EQ(again.second.data, obs.data);
  EXPECT_THROW(env.reset(0, 0), std::invalid_argument);
  EXPECT_EQ(state.score, win_distance(*g, state.grid));
}

TEST(Environment, PushTowardTargetRewardsOne) {
  const auto g = compile_text(sokoban_with("######\n#p*.o#\n######\n"));
  Environment env(g);
  auto [state, obs] = env.reset(0, 0);
  const double before = oracle_sokoban(*g, state.grid);
  const StepResult r = env.step(state, Action::kRight);
  const double after = oracle_sokoban(*g, state.grid);
  EXPECT_EQ(before - after, 1.0);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_FALSE(r.done);
}

TEST(Environment, IneffectiveTickRewardsZero) {
  const auto g = compile_text(sokoban_with("#####\n#p*o#\n#####\n"));
  Environment env(g);
  auto [state, obs] = env.reset(0, 0);
  const StepResult r = env.step(state, Action::kLeft);
  EXPECT_FALSE(r.info.changed);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Environment, WinningTickEndsEpisode) {
  const auto g = compile_text(sokoban_with("#####\n#p*o#\n#####\n"));
  Environment env(g);
  auto [state, obs] = env.reset(0, 0);
  const StepResult r = env.step(state, Action::kRight);
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(state.won);
  EXPECT_TRUE(state.done);
  EXPECT_THROW(env.step(state, Action::kLeft), std::logic_error);
}

TEST(Environment, HorizonEndsEpisode) {
  const auto g = compile_text(sokoban_with("#####\n#p*.o#\n#####\n"));
  EnvConfig cfg;
  cfg.horizon = 3;
  Environment env(g, cfg);
  auto [state, obs] = env.reset(0, 0);
  for (int i = 0; i < 3; ++i) env.step(state, Action::kUp);
  EXPECT_TRUE(state.done);
  EXPECT_FALSE(state.won);
  EXPECT_EQ(state.steps, 3);
}

TEST(Observation, RoundTripsThroughState) {
  for (const std::string& path : testkit::exemplar_paths()) {
    const auto g = load_game(path);
    EngineLimits lim;
    lim.rng_seed = testkit::seed_if_random(*g, 1);
    Engine engine(g, lim);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
      GridState s = testkit::random_playout_state(engine, rng, 20);
      testkit::stamp_player_force(*g, s, kForceLeft);
      const Observation obs = observe(*g, s);
      const GridState back = state_from_observation(*g, obs, s.level_index);
      EXPECT_EQ(state_digest(back, g->num_objects()), state_digest(s, g->num_objects())) << path;
      EXPECT_EQ(back.forces, s.forces) << path;
      EXPECT_EQ(back.last_input, s.last_input) << path;
      EXPECT_EQ(observe(*g, back).data, obs.data) << path;
    }
  }
}

TEST(Observation, PlanesMatchState) {
  const auto g = compile_text(sokoban_with("#####\n#p*o#\n#####\n"));
  Engine engine(g);
  GridState s = engine.init_level(0);
  testkit::stamp_player_force(*g, s, kForceUp);
  const Observation obs = observe(*g, s);
  const int n = g->num_objects();
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const int ci = y * s.width + x;
      for (ObjectId id = 0; id < n; ++id) EXPECT_EQ(obs.at(id, y, x), s.has(ci, id) ? 1 : 0);
      for (int l = 0; l < g->num_layers(); ++l) {
        const uint8_t f = s.force(ci, l);
        const uint8_t bits[] = {kForceUp, kForceDown, kForceLeft, kForceRight, kForceAction};
        for (int k = 0; k < 5; ++k) EXPECT_EQ(obs.at(n + 5 * l + k, y, x), f == bits[k] ? 1 : 0);
      }
      EXPECT_EQ(obs.at(n + 5 * g->num_layers(), y, x), s.last_input[ci]);
    }
  }
}

TEST(Observation, BinaryLayout) {
  const auto g = compile_text(sokoban_with("#####\n#p*o#\n#####\n"));
  const Observation obs = observe(*g, make_level_state(*g, 0));
  const std::vector<uint8_t> bin = observation_to_binary(obs);
  ASSERT_EQ(bin.size(), 16 + obs.data.size());
  EXPECT_EQ(std::string(bin.begin(), bin.begin() + 4), "PSOB");
  auto u32 = [&bin](int at) {
    return uint32_t(bin[at]) | uint32_t(bin[at + 1]) << 8 | uint32_t(bin[at + 2]) << 16 |
           uint32_t(bin[at + 3]) << 24;
  };
  EXPECT_EQ(u32(4), uint32_t(obs.planes));
  EXPECT_EQ(u32(8), uint32_t(obs.height));
  EXPECT_EQ(u32(12), uint32_t(obs.width));
  EXPECT_TRUE(std::equal(obs.data.begin(), obs.data.end(), bin.begin() + 16));
  EXPECT_NE(observation_to_json(*g, obs).find("\"planes\""), std::string::npos);
}

TEST(Environment, RewardsTelescope) {
  const auto g = load_game(testkit::games_dir() + "/sokoban_basic.txt");
  const auto r = testkit::check_reward_telescoping(g, 20, 200, 4);
  EXPECT_EQ(r.violations, 0) << r.first;
  EXPECT_EQ(r.checks, 20);
}

}  // namespace
}  // namespace pscript
