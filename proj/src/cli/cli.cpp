#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <termios.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pscript/cli.hpp"
#include "pscript/harness.hpp"

namespace pscript {
namespace {

namespace fs = std::filesystem;

// Domain failures that should produce exit code 1 with a message.
class CliFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CliFailure("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliFailure("cannot write " + path.string());
  f << text;
}

std::string default_out_dir() {
  const char* env = std::getenv("PSCRIPT_OUT_DIR");
  return env && *env ? env : ".";
}

std::string game_stem(const std::string& path) { return fs::path(path).stem().string(); }

void check_level(const GameDef& game, int level) {
  if (level < 0 || level >= static_cast<int>(game.levels.size())) {
    throw CliFailure("level " + std::to_string(level) + " out of range (game has " +
                     std::to_string(game.levels.size()) + " levels)");
  }
  if (game.levels[level].is_message) {
    throw CliFailure("level " + std::to_string(level) + " is a message screen");
  }
}

struct Options {
  bool quiet = false;
  std::string file;
  std::vector<std::string> paths;
  int level = -1;
  bool all = false;
  int64_t max_steps = 1'000'000;
  double timeout = 60.0;
  std::string out;
  std::string solution;
  std::string expect_digest;
  int envs = 1;
  int steps = 100;
  uint64_t seed = 0;
  bool seed_given = false;
  bool sweep = false;
  std::vector<int> sweep_sizes;
  int scale = 4;
  int workers = 0;
  bool csv = false;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int validate() {
    const std::string text = read_file(opt_.file);
    try {
      const GameDef game = compile_source(SourceText(text));
      for (const Diagnostic& w : game.warnings) err_ << format_diagnostic(w) << '\n';
      out_ << game.num_objects() << " objects, " << game.source_rule_lines << " rules → "
           << game.compiled_variant_count() << " compiled variants\n";
      return kExitOk;
    } catch (const CompileError& e) {
      for (const Diagnostic& d : e.diagnostics()) err_ << format_diagnostic(d) << '\n';
      return kExitFailure;
    }
  }

  int solve() {
    auto game = load(opt_.file);
    std::vector<int> levels;
    if (opt_.all) {
      levels = game->playable_levels();
    } else {
      check_level(*game, opt_.level);
      levels = {opt_.level};
    }
    SearchLimits limits;
    limits.max_env_steps = opt_.max_steps;
    limits.timeout_s = opt_.timeout;
    if (opt_.seed_given) limits.rng_seed = opt_.seed;

    std::vector<Solution> solutions(levels.size());
    std::vector<std::string> errors(levels.size());
    run_pool(levels.size(), [&](std::size_t i) {
      try {
        solutions[i] = solve_bfs(game, levels[i], limits);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });

    int unsolved = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!errors[i].empty()) throw CliFailure("level " + std::to_string(levels[i]) + ": " + errors[i]);
      const Solution& s = solutions[i];
      if (!s.solved) ++unsolved;
      note("level " + std::to_string(s.level) + ": " + (s.solved ? "solved" : "unsolved") + " in " +
           std::to_string(s.env_steps) + " env steps, length " + std::to_string(s.actions.size()));
      const std::string json = solution_to_json(s) + "\n";
      if (opt_.all) {
        const fs::path dir = opt_.out.empty() ? default_out_dir() : opt_.out;
        write_file(dir / (game_stem(opt_.file) + "_" + std::to_string(s.level) + ".json"), json);
      } else if (!opt_.out.empty()) {
        write_file(opt_.out, json);
      } else {
        out_ << json;
      }
    }
    return unsolved == 0 ? kExitOk : kExitFailure;
  }

  int replay_level() {
    auto game = load(opt_.file);
    const Solution sol = load_solution();
    const int level = opt_.level >= 0 ? opt_.level : sol.level;
    check_level(*game, level);
    std::optional<uint64_t> expected;
    if (!opt_.expect_digest.empty()) {
      expected = parse_digest_hex(opt_.expect_digest);
      if (!expected) throw CliFailure("--expect-digest is not a hex digest");
    } else if (sol.solved) {
      expected = sol.terminal_digest;
    }
    EngineLimits elimits;
    if (opt_.seed_given) elimits.rng_seed = opt_.seed;
    const ReplayReport rep = replay(game, level, sol.actions, expected, nullptr, elimits);
    out_ << replay_report_to_json(rep) << '\n';
    if (rep.status != ReplayStatus::kSuccess) {
      err_ << "replay: " << replay_status_name(rep.status) << '\n';
      return kExitFailure;
    }
    return kExitOk;
  }

  int play() {
    auto game = load(opt_.file);
    check_level(*game, opt_.level);
    EngineLimits elimits;
    if (opt_.seed_given) elimits.rng_seed = opt_.seed;
    const bool tty = isatty(STDIN_FILENO);
    termios saved{};
    if (tty) {
      tcgetattr(STDIN_FILENO, &saved);
      termios raw = saved;
      raw.c_lflag &= ~(ICANON | ECHO);
      tcsetattr(STDIN_FILENO, TCSANOW, &raw);
    }
    int code;
    try {
      code = play_session(game, opt_.level, std::cin, out_, elimits);
    } catch (...) {
      if (tty) tcsetattr(STDIN_FILENO, TCSANOW, &saved);
      throw;
    }
    if (tty) tcsetattr(STDIN_FILENO, TCSANOW, &saved);
    return code;
  }

  int profile() {
    auto game = load(opt_.file);
    check_level(*game, opt_.level);
    ThroughputReport rep;
    if (opt_.sweep) {
      std::vector<int> sizes = opt_.sweep_sizes;
      if (sizes.empty()) {
        for (int n = 1; n < opt_.envs; n *= 8) sizes.push_back(n);
        sizes.push_back(opt_.envs);
      }
      rep = profile_sweep(game, opt_.level, sizes, opt_.steps, opt_.seed, opt_.workers);
    } else {
      rep = profile_random(game, opt_.level, opt_.envs, opt_.steps, opt_.seed, opt_.workers);
    }
    const std::string text = opt_.csv ? throughput_to_csv(rep) : throughput_to_json(rep) + "\n";
    if (opt_.out.empty()) {
      out_ << text;
    } else {
      write_file(opt_.out, text);
    }
    note(std::to_string(rep.total_ticks) + " ticks in " + std::to_string(rep.elapsed_s) + " s (" +
         std::to_string(static_cast<int64_t>(rep.fps)) + " fps)");
    return kExitOk;
  }

  int render() {
    auto game = load(opt_.file);
    std::vector<int> actions;
    int level = opt_.level;
    if (!opt_.solution.empty()) {
      const Solution sol = load_solution();
      actions = sol.actions;
      if (level < 0) level = sol.level;
    }
    check_level(*game, level);
    for (int a : actions) {
      if (!action_from_code(a)) throw CliFailure("malformed action code " + std::to_string(a));
    }
    EngineLimits elimits;
    if (opt_.seed_given) elimits.rng_seed = opt_.seed;
    Engine engine(game, elimits);
    GridState state = engine.init_level(level);
    const fs::path dir = opt_.out.empty() ? default_out_dir() : opt_.out;
    fs::create_directories(dir);
    const std::string prefix = game_stem(opt_.file) + "_" + std::to_string(level) + "_";
    auto emit = [&](std::size_t step) {
      write_png(render_frame(*game, state, opt_.scale), (dir / (prefix + std::to_string(step) + ".png")).string());
    };
    emit(0);
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const StepOutcome o = engine.tick(state, static_cast<Action>(actions[i]));
      emit(i + 1);
      if (o.won) break;
    }
    note("wrote frames to " + dir.string());
    return kExitOk;
  }

  int corpus() {
    std::vector<std::string> files;
    for (const std::string& p : opt_.paths) {
      if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p)) {
          if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path().string());
          }
        }
      } else {
        files.push_back(p);
      }
    }
    std::sort(files.begin(), files.end());
    CorpusLimits limits;
    limits.search.max_env_steps = opt_.max_steps;
    limits.search.timeout_s = opt_.timeout;
    if (opt_.seed_given) limits.search.rng_seed = opt_.seed;
    limits.workers = opt_.workers;
    const Ledger ledger = validate_corpus(files, limits);
    const std::string text = opt_.csv ? ledger_to_csv(ledger) : ledger_to_json(ledger) + "\n";
    if (opt_.out.empty()) {
      out_ << text;
    } else {
      write_file(opt_.out, text);
    }
    std::ostringstream summary;
    for (const auto& [name, n] : ledger.counts()) summary << name << '=' << n << ' ';
    summary << "total=" << ledger.total();
    note(summary.str());
    return kExitOk;
  }

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Grid puzzle game engine, solver and tools", "pscript"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("-q,--quiet", opt_.quiet, "Suppress progress text");

    auto add_seed = [&](CLI::App* sub) {
      sub->add_option_function<uint64_t>(
          "--seed",
          [&](const uint64_t& v) {
            opt_.seed = v;
            opt_.seed_given = true;
          },
          "RNG seed");
    };

    auto* validate_sub = app.add_subcommand("validate", "Parse and compile a game");
    validate_sub->add_option("file", opt_.file)->required();

    auto* solve_sub = app.add_subcommand("solve", "Breadth-first search for level solutions");
    solve_sub->add_option("file", opt_.file)->required();
    auto* level_opt = solve_sub->add_option("--level", opt_.level)->check(CLI::NonNegativeNumber);
    auto* all_opt = solve_sub->add_flag("--all", opt_.all);
    level_opt->excludes(all_opt);
    solve_sub->add_option("--max-steps", opt_.max_steps)->check(CLI::PositiveNumber);
    solve_sub->add_option("--timeout", opt_.timeout)->check(CLI::PositiveNumber);
    solve_sub->add_option("--out", opt_.out, "Solution file, or directory with --all");
    solve_sub->add_option("--workers", opt_.workers)->check(CLI::NonNegativeNumber);
    add_seed(solve_sub);

    auto* replay_sub = app.add_subcommand("replay", "Replay a solution and classify it");
    replay_sub->add_option("file", opt_.file)->required();
    replay_sub->add_option("--level", opt_.level)->check(CLI::NonNegativeNumber);
    replay_sub->add_option("--solution", opt_.solution)->required();
    replay_sub->add_option("--expect-digest", opt_.expect_digest);
    add_seed(replay_sub);

    auto* play_sub = app.add_subcommand("play", "Play a level in the terminal");
    play_sub->add_option("file", opt_.file)->required();
    play_sub->add_option("--level", opt_.level)->required()->check(CLI::NonNegativeNumber);
    add_seed(play_sub);

    auto* profile_sub = app.add_subcommand("profile", "Random-rollout throughput");
    profile_sub->add_option("file", opt_.file)->required();
    profile_sub->add_option("--level", opt_.level)->required()->check(CLI::NonNegativeNumber);
    profile_sub->add_option("--envs", opt_.envs)->check(CLI::PositiveNumber);
    profile_sub->add_option("--steps", opt_.steps)->check(CLI::PositiveNumber);
    add_seed(profile_sub);
    profile_sub->add_flag("--sweep", opt_.sweep, "Sweep batch sizes 1, 8, 64, ... up to --envs");
    profile_sub->add_option("--sizes", opt_.sweep_sizes, "Explicit batch sizes for --sweep")
        ->check(CLI::PositiveNumber);
    profile_sub->add_option("--workers", opt_.workers)->check(CLI::NonNegativeNumber);
    profile_sub->add_flag("--csv", opt_.csv);
    profile_sub->add_option("--out", opt_.out);

    auto* render_sub = app.add_subcommand("render", "Render solution frames to PNG");
    render_sub->add_option("file", opt_.file)->required();
    render_sub->add_option("--level", opt_.level)->check(CLI::NonNegativeNumber);
    render_sub->add_option("--solution", opt_.solution);
    render_sub->add_option("--scale", opt_.scale)->check(CLI::PositiveNumber);
    render_sub->add_option("--out", opt_.out, "Output directory");
    add_seed(render_sub);

    auto* corpus_sub = app.add_subcommand("corpus", "Validate every level of a game corpus");
    corpus_sub->add_option("paths", opt_.paths, "Game files or directories")->required();
    opt_.max_steps = 1'000'000;
    corpus_sub->add_option("--max-steps", opt_.max_steps)->check(CLI::PositiveNumber);
    corpus_sub->add_option("--timeout", opt_.timeout)->check(CLI::PositiveNumber);
    corpus_sub->add_option("--workers", opt_.workers)->check(CLI::NonNegativeNumber);
    corpus_sub->add_flag("--csv", opt_.csv);
    corpus_sub->add_option("--out", opt_.out);
    add_seed(corpus_sub);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
      app.parse(argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << e.what() << "\n\n" << app.help();
      return kExitUsage;
    }
    if (solve_sub->parsed() && !opt_.all && opt_.level < 0) {
      err_ << "solve: one of --level or --all is required\n\n" << solve_sub->help();
      return kExitUsage;
    }
    if (corpus_sub->parsed() && corpus_sub->count("--max-steps") == 0) {
      opt_.max_steps = CorpusLimits{}.search.max_env_steps;
    }

    try {
      if (validate_sub->parsed()) return validate();
      if (solve_sub->parsed()) return solve();
      if (replay_sub->parsed()) return replay_level();
      if (play_sub->parsed()) return play();
      if (profile_sub->parsed()) return profile();
      if (render_sub->parsed()) return render();
      if (corpus_sub->parsed()) return corpus();
    } catch (const CompileError& e) {
      for (const Diagnostic& d : e.diagnostics()) err_ << format_diagnostic(d) << '\n';
      return kExitFailure;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitFailure;
    }
    return kExitUsage;
  }

 private:
  std::shared_ptr<const GameDef> load(const std::string& path) {
    if (!fs::exists(path)) throw CliFailure("no such file: " + path);
    return load_game(path);
  }

  Solution load_solution() {
    try {
      return solution_from_json(read_file(opt_.solution));
    } catch (const nlohmann::json::exception& e) {
      throw CliFailure("malformed solution file " + opt_.solution + ": " + e.what());
    }
  }

  template <class Fn>
  void run_pool(std::size_t n, Fn fn) {
    int workers = opt_.workers > 0 ? opt_.workers
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }

  void note(const std::string& text) {
    if (!opt_.quiet) err_ << text << '\n';
  }

  std::ostream& out_;
  std::ostream& err_;
  Options opt_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace pscript
