#include <gtest/gtest.h>

#include <random>
#include <string>

#include "json.hpp"
#include "pscript/solver.hpp"
#include "properties.hpp"
#include "support.hpp"

namespace pscript {
namespace {

using testkit::compile_text;
using testkit::read_file;

std::shared_ptr<const GameDef> sokoban_with(const std::string& levels) {
  return compile_text(
      testkit::replace_levels(read_file(testkit::games_dir() + "/sokoban_basic.txt"), levels));
}

TEST(Bfs, DepthOneExit) {
  const auto g = compile_text(testkit::limerick_with_levels("#####\n#PE.#\n#####\n"));
  const Solution s = solve_bfs(g, 0);
  EXPECT_TRUE(s.solved);
  EXPECT_EQ(s.actions, std::vector<int>{3});
  EXPECT_LE(s.nodes_expanded, 5);
  EXPECT_EQ(s.best_score, 0.0);
}

TEST(Bfs, SokobanBasicBothLevels) {
  const auto g = load_game(testkit::games_dir() + "/sokoban_basic.txt");
  for (int level : g->playable_levels()) {
    const Solution s = solve_bfs(g, level);
    EXPECT_TRUE(s.solved) << level;
    EXPECT_LE(static_cast<int64_t>(s.actions.size()), s.env_steps);
    const ReplayReport r = replay(g, level, s.actions, s.terminal_digest);
    EXPECT_EQ(r.status, ReplayStatus::kSuccess);
    EXPECT_TRUE(r.won);
  }
}

TEST(Bfs, MatchesBruteForceOnThreeByThreeSokoban) {
  const auto g = sokoban_with("p..\n.*.\n..o\n");
  Engine engine(g);
  const auto oracle = testkit::brute_force_min(engine, engine.init_level(0), default_action_set(*g), 8);
  ASSERT_TRUE(oracle);
  const Solution s = solve_bfs(g, 0);
  ASSERT_TRUE(s.solved);
  EXPECT_EQ(static_cast<int>(s.actions.size()), *oracle);
}

TEST(Bfs, OptimalOnGeneratedMicroGames) {
  const auto r = testkit::check_bfs_optimality(20, 8, 2024);
  EXPECT_EQ(r.violations, 0) << r.first;
  EXPECT_EQ(r.games, 20);
}

TEST(Bfs, DedupeOffKeepsLengths) {
  std::mt19937_64 rng(77);
  int compared = 0;
  for (int i = 0; i < 12; ++i) {
    const int kind = i % 3;
    const auto g = compile_text(std::string(testkit::micro_template(kind)) + testkit::micro_level(kind, rng));
    SearchLimits on;
    on.max_env_steps = 200'000;
    SearchLimits off = on;
    off.dedupe = false;
    const Solution a = solve_bfs(g, 0, on);
    if (!a.solved || a.actions.size() > 6) continue;
    const Solution b = solve_bfs(g, 0, off);
    ASSERT_TRUE(b.solved);
    EXPECT_EQ(a.actions.size(), b.actions.size());
    EXPECT_GE(b.env_steps, a.env_steps);
    ++compared;
  }
  EXPECT_GT(compared, 0);
}

TEST(Bfs, LargerBudgetNeverLosesSolution) {
  const auto g = load_game(testkit::games_dir() + "/sokoban_basic.txt");
  SearchLimits small;
  small.max_env_steps = 2500;
  SearchLimits large;
  large.max_env_steps = 50'000;
  for (int level : g->playable_levels()) {
    const Solution a = solve_bfs(g, level, small);
    const Solution b = solve_bfs(g, level, large);
    if (a.solved) {
      EXPECT_TRUE(b.solved);
      EXPECT_EQ(a.actions, b.actions);
    }
    EXPECT_LE(a.env_steps, small.max_env_steps);
  }
}

TEST(Bfs, Deterministic) {
  const auto g = load_game(testkit::games_dir() + "/sokoban_match3.txt");
  const int level = g->playable_levels().front();
  const Solution a = solve_bfs(g, level);
  const Solution b = solve_bfs(g, level);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.env_steps, b.env_steps);
  EXPECT_EQ(a.nodes_expanded, b.nodes_expanded);
  EXPECT_EQ(a.terminal_digest, b.terminal_digest);
}

TEST(Bfs, ExhaustionReturnsBestPartial) {
  const auto g = load_game(testkit::games_dir() + "/zen_puzzle_garden.txt");
  SearchLimits lim;
  lim.max_env_steps = 3000;
  const int level = g->playable_levels().front();
  const Solution s = solve_bfs(g, level, lim);
  EXPECT_FALSE(s.solved);
  EXPECT_EQ(s.env_steps, 3000);
  EXPECT_LE(static_cast<int64_t>(s.actions.size()), s.env_steps);
  const ReplayReport r = replay(g, level, s.actions);
  EXPECT_EQ(r.final_digest, s.terminal_digest);
  Engine engine(g);
  GridState st = engine.init_level(level);
  for (int a : s.actions) engine.tick(st, static_cast<Action>(a));
  EXPECT_EQ(win_distance(*g, st), s.best_score);
  EXPECT_LE(s.best_score, win_distance(*g, engine.init_level(level)));
}

TEST(Bfs, RandomGameNeedsSeed) {
  std::string text = testkit::micro_template(0);
  text.insert(text.find("[ > player"), "random [ target ] -> [ target ]\n");
  const auto g = compile_text(text + "p*o\n");
  EXPECT_THROW(solve_bfs(g, 0), std::invalid_argument);
  SearchLimits lim;
  lim.rng_seed = 1;
  EXPECT_TRUE(solve_bfs(g, 0, lim).solved);
}

TEST(ActionSet, ActionOnlyWhenReferenced) {
  EXPECT_EQ(default_action_set(*sokoban_with("p*o\n")).size(), 4u);
  std::string src = read_file(testkit::games_dir() + "/sokoban_basic.txt");
  src.replace(src.find("[ > Player | Crate ]"), 0, "[ action Player ] -> [ Player ]\n");
  const auto with_action = compile_text(testkit::replace_levels(src, "p*o\n"));
  const auto set = default_action_set(*with_action);
  ASSERT_EQ(set.size(), 5u);
  EXPECT_EQ(set.back(), Action::kAction);
  const auto no_action = compile_text("noaction\n" + testkit::replace_levels(src, "p*o\n"));
  EXPECT_EQ(default_action_set(*no_action).size(), 4u);
}

TEST(Replay, Statuses) {
  const auto g = sokoban_with("#####\n#p*.o#\n#####\n");
  const Solution s = solve_bfs(g, 0);
  ASSERT_TRUE(s.solved);
  ASSERT_EQ(s.actions, (std::vector<int>{3, 3}));

  const ReplayReport ok = replay(g, 0, s.actions, s.terminal_digest);
  EXPECT_EQ(ok.status, ReplayStatus::kSuccess);
  EXPECT_EQ(ok.final_digest, s.terminal_digest);

  const ReplayReport truncated = replay(g, 0, {3});
  EXPECT_FALSE(truncated.won);
  EXPECT_EQ(truncated.status, ReplayStatus::kSolutionError);

  const ReplayReport wrong = replay(g, 0, s.actions, s.terminal_digest ^ 1);
  EXPECT_TRUE(wrong.won);
  EXPECT_EQ(wrong.status, ReplayStatus::kStateError);

  EXPECT_THROW(replay(g, 0, {3, 9}), std::invalid_argument);
  EXPECT_THROW(replay(g, 0, {-1}), std::invalid_argument);
}

TEST(Replay, StopsAtFirstWin) {
  const auto g = sokoban_with("#####\n#p*o.#\n#####\n");
  const ReplayReport r = replay(g, 0, {3, 3, 3});
  EXPECT_TRUE(r.won);
  EXPECT_EQ(r.steps_executed, 1);
}

TEST(Replay, TrajectoryDivergence) {
  const auto g = sokoban_with("######\n#p*..o#\n######\n");
  std::vector<uint64_t> traj;
  Engine engine(g);
  GridState s = engine.init_level(0);
  for (int a : {3, 3, 3}) {
    engine.tick(s, static_cast<Action>(a));
    traj.push_back(state_digest(s, g->num_objects()));
  }
  const ReplayReport same = replay(g, 0, {3, 3, 3}, std::nullopt, &traj);
  EXPECT_FALSE(same.divergence_step.has_value());
  traj[1] ^= 1;
  const ReplayReport diverged = replay(g, 0, {3, 3, 3}, std::nullopt, &traj);
  ASSERT_TRUE(diverged.divergence_step.has_value());
  EXPECT_EQ(*diverged.divergence_step, 1);
}

TEST(Replay, CompileAndRuntimeStatusNames) {
  EXPECT_STREQ(replay_status_name(ReplayStatus::kCompileError), "compile_error");
  EXPECT_STREQ(replay_status_name(ReplayStatus::kRuntimeError), "runtime_error");
  EXPECT_STREQ(replay_status_name(ReplayStatus::kSolutionError), "solution_error");
  EXPECT_STREQ(replay_status_name(ReplayStatus::kStateError), "state_error");
  EXPECT_STREQ(replay_status_name(ReplayStatus::kSuccess), "success");
}

TEST(SolutionJson, RoundTrip) {
  Solution s;
  s.game = "00ff";
  s.level = 3;
  s.actions = {0, 1, 2, 3, 4, 5};
  s.solved = true;
  s.env_steps = 1234;
  s.nodes_expanded = 99;
  s.best_score = 2.5;
  s.elapsed_s = 0.25;
  s.terminal_digest = 0x0123456789abcdefull;
  const std::string json = solution_to_json(s);
  EXPECT_EQ(nlohmann::json::parse(json).at("terminal_digest"), "0123456789abcdef");
  const Solution back = solution_from_json(json);
  EXPECT_EQ(back.game, s.game);
  EXPECT_EQ(back.level, s.level);
  EXPECT_EQ(back.actions, s.actions);
  EXPECT_EQ(back.solved, s.solved);
  EXPECT_EQ(back.env_steps, s.env_steps);
  EXPECT_EQ(back.nodes_expanded, s.nodes_expanded);
  EXPECT_EQ(back.best_score, s.best_score);
  EXPECT_EQ(back.terminal_digest, s.terminal_digest);
  EXPECT_EQ(parse_digest_hex("0123456789abcdef"), s.terminal_digest);
  EXPECT_FALSE(parse_digest_hex("xyz"));
}

}  // namespace
}  // namespace pscript
