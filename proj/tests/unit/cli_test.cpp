#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pscript/cli.hpp"
#include "pscript/solver.hpp"
#include "support.hpp"

namespace pscript {
namespace {

namespace fs = std::filesystem;
using testkit::read_file;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("pscript_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const std::string kLime = testkit::fixtures_dir() + "/limerick_appendix.txt";
const std::string kSokoban = testkit::games_dir() + "/sokoban_basic.txt";

TEST(Cli, ValidateLimeRickSummary) {
  const CliRun r = cli({"validate", kLime});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("11 objects, 11 rules → 16 compiled variants"), std::string::npos) << r.out;
}

TEST(Cli, ValidateRigidFails) {
  const CliRun r = cli({"validate", testkit::fixtures_dir() + "/broken/broken_rigid.txt"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("rigid"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"validate", kLime, "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"solve", kSokoban}).code, kExitUsage);
  EXPECT_EQ(cli({"solve", kSokoban, "--level", "0", "--all"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MissingFileIsDomainFailure) {
  EXPECT_EQ(cli({"validate", "/nonexistent.txt"}).code, kExitFailure);
}

TEST(Cli, SolveAllWritesOneFilePerLevel) {
  TempDir dir;
  const CliRun r = cli({"solve", kSokoban, "--all", "--out", dir.path().string(), "-q"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (int level : {0, 1}) {
    const fs::path p = dir.path() / ("sokoban_basic_" + std::to_string(level) + ".json");
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_TRUE(solution_from_json(read_file(p.string())).solved);
  }
}

TEST(Cli, ReplayOfCorruptedSolutionIsStateError) {
  TempDir dir;
  const fs::path sol = dir.path() / "sol.json";
  ASSERT_EQ(cli({"solve", kSokoban, "--level", "0", "--out", sol.string(), "-q"}).code, kExitOk);
  EXPECT_EQ(cli({"replay", kSokoban, "--level", "0", "--solution", sol.string()}).code, kExitOk);
  const CliRun bad = cli({"replay", kSokoban, "--level", "0", "--solution", sol.string(),
                       "--expect-digest", "0000000000000001"});
  EXPECT_EQ(bad.code, kExitFailure);
  EXPECT_NE(bad.out.find("state_error"), std::string::npos) << bad.out;
}

TEST(Cli, ProfileEmitsJson) {
  const CliRun r = cli({"profile", kSokoban, "--level", "0", "--envs", "4", "--steps", "10", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("total_ticks"), 40) << r.out;
}

TEST(Cli, RenderWritesFramePerStep) {
  TempDir dir;
  const fs::path sol = dir.path() / "sol.json";
  ASSERT_EQ(cli({"solve", kSokoban, "--level", "0", "--out", sol.string(), "-q"}).code, kExitOk);
  const Solution s = solution_from_json(read_file(sol.string()));
  const CliRun r = cli({"render", kSokoban, "--level", "0", "--solution", sol.string(), "--scale", "1",
                     "--out", dir.path().string(), "-q"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  int pngs = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, static_cast<int>(s.actions.size()) + 1);
  EXPECT_TRUE(fs::exists(dir.path() / "sokoban_basic_0_0.png"));
}

TEST(Cli, CorpusOverBrokenFixtures) {
  const CliRun r = cli({"corpus", testkit::fixtures_dir() + "/broken", "--csv", "-q"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  for (const char* k : {"compile_error", "runtime_error", "solution_error", "state_error"}) {
    EXPECT_NE(r.out.find(k), std::string::npos) << k;
  }
}

std::vector<std::string> digests_in(const std::string& text) {
  std::vector<std::string> out;
  static const std::regex re("digest ([0-9a-f]{16})");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

TEST(Play, UndoIsExact) {
  const auto g = testkit::compile_text(testkit::replace_levels(read_file(kSokoban), "#######\n#p*..o#\n#######\n"));
  std::istringstream keys("dzdz\033[Czq");
  std::ostringstream out;
  ASSERT_EQ(play_session(g, 0, keys, out), kExitOk);
  const auto d = digests_in(out.str());
  ASSERT_EQ(d.size(), 7u) << out.str();
  EXPECT_NE(d[0], d[1]);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i], d[i % 2]) << i;
}

TEST(Play, ReportsWin) {
  const auto g = testkit::compile_text(testkit::replace_levels(read_file(kSokoban), "#####\n#p*o#\n#####\n"));
  std::istringstream keys("d");
  std::ostringstream out;
  EXPECT_EQ(play_session(g, 0, keys, out), kExitOk);
  EXPECT_NE(out.str().find("level complete"), std::string::npos);
}

TEST(Play, AsciiUsesLevelGlyphs) {
  const auto g = testkit::compile_text(testkit::replace_levels(read_file(kSokoban), "#####\n#p@o#\n#####\n"));
  const std::string text = render_ascii(*g, make_level_state(*g, 0));
  EXPECT_EQ(text, "#####\n#p@o#\n#####\n");
}

}  // namespace
}  // namespace pscript
