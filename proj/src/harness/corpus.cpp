#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pscript/harness.hpp"

namespace pscript {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ExternalSolution {
  std::vector<int> actions;
  std::optional<uint64_t> digest;
};

// `<stem>.solutions.json`: an array of solution objects, one per level.
std::map<int, ExternalSolution> load_sidecar(const fs::path& game_path) {
  fs::path side = game_path;
  side.replace_extension(".solutions.json");
  std::map<int, ExternalSolution> out;
  if (!fs::exists(side)) return out;
  std::ifstream f(side);
  if (!f) throw std::runtime_error("cannot read " + side.string());
  const json arr = json::parse(f);
  if (!arr.is_array()) throw std::runtime_error(side.string() + ": expected an array");
  for (const json& item : arr) {
    const Solution s = solution_from_json(item.dump());
    ExternalSolution e;
    e.actions = s.actions;
    if (item.contains("terminal_digest")) e.digest = s.terminal_digest;
    out[s.level] = std::move(e);
  }
  return out;
}

LedgerStatus from_replay(ReplayStatus s) {
  switch (s) {
    case ReplayStatus::kSuccess: return LedgerStatus::kSuccess;
    case ReplayStatus::kCompileError: return LedgerStatus::kCompileError;
    case ReplayStatus::kRuntimeError: return LedgerStatus::kRuntimeError;
    case ReplayStatus::kSolutionError: return LedgerStatus::kSolutionError;
    case ReplayStatus::kStateError: return LedgerStatus::kStateError;
  }
  return LedgerStatus::kUnvalidated;
}

struct LevelTask {
  std::shared_ptr<const GameDef> game;
  const std::map<int, ExternalSolution>* sidecar = nullptr;
  std::size_t row = 0;
};

void validate_level(const LevelTask& task, const CorpusLimits& limits, LedgerRow& row) {
  EngineLimits elimits = limits.engine;
  SearchLimits slimits = limits.search;
  if (task.game->uses_randomness()) {
    if (!slimits.rng_seed) slimits.rng_seed = elimits.rng_seed.value_or(0);
    elimits.rng_seed = slimits.rng_seed;
  }
  try {
    std::vector<int> actions;
    std::optional<uint64_t> digest;
    auto it = task.sidecar->find(row.level);
    if (it != task.sidecar->end()) {
      row.external_solution = true;
      actions = it->second.actions;
      digest = it->second.digest;
    } else {
      const Solution sol = solve_bfs(task.game, row.level, slimits, std::nullopt, elimits);
      row.env_steps = sol.env_steps;
      if (!sol.solved) {
        row.status = LedgerStatus::kUnvalidated;
        row.detail = "no solution within " + std::to_string(sol.env_steps) + " env steps";
        return;
      }
      actions = sol.actions;
      digest = sol.terminal_digest;
    }
    row.solution_length = static_cast<int>(actions.size());
    const ReplayReport rep = replay(task.game, row.level, actions, digest, nullptr, elimits);
    row.status = from_replay(rep.status);
    switch (rep.status) {
      case ReplayStatus::kSuccess: break;
      case ReplayStatus::kRuntimeError: row.detail = rep.error; break;
      case ReplayStatus::kSolutionError: row.detail = "replay did not reach a win"; break;
      case ReplayStatus::kStateError:
        row.detail = "final digest " + digest_hex(rep.final_digest) + " differs from expected " +
                     (digest ? digest_hex(*digest) : std::string("?"));
        break;
      default: break;
    }
  } catch (const EngineError& e) {
    row.status = LedgerStatus::kRuntimeError;
    row.detail = e.what();
  } catch (const std::exception& e) {
    row.status = LedgerStatus::kRuntimeError;
    row.detail = e.what();
  }
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

const char* ledger_status_name(LedgerStatus s) {
  switch (s) {
    case LedgerStatus::kSuccess: return "success";
    case LedgerStatus::kCompileError: return "compile_error";
    case LedgerStatus::kRuntimeError: return "runtime_error";
    case LedgerStatus::kSolutionError: return "solution_error";
    case LedgerStatus::kStateError: return "state_error";
    case LedgerStatus::kUnvalidated: return "unvalidated";
  }
  return "?";
}

std::map<std::string, int> Ledger::counts() const {
  std::map<std::string, int> c;
  for (int i = 0; i < kLedgerStatusCount; ++i) c[ledger_status_name(static_cast<LedgerStatus>(i))] = 0;
  for (const LedgerRow& r : rows) ++c[ledger_status_name(r.status)];
  return c;
}

Ledger validate_corpus(const std::vector<std::string>& game_paths, const CorpusLimits& limits) {
  Ledger ledger;
  std::vector<LevelTask> tasks;
  std::vector<std::shared_ptr<const GameDef>> games;
  std::vector<std::unique_ptr<std::map<int, ExternalSolution>>> sidecars;

  for (const std::string& path : game_paths) {
    const std::string name = fs::path(path).stem().string();
    LedgerRow base;
    base.game = name;
    base.path = path;
    std::shared_ptr<const GameDef> game;
    try {
      game = load_game(path);
    } catch (const CompileError& e) {
      base.status = LedgerStatus::kCompileError;
      base.detail = e.what();
    } catch (const std::exception& e) {
      base.status = LedgerStatus::kCompileError;
      base.detail = std::string("I/O: ") + e.what();
    }
    if (!game) {
      ledger.rows.push_back(base);
      continue;
    }
    auto sidecar = std::make_unique<std::map<int, ExternalSolution>>();
    try {
      *sidecar = load_sidecar(path);
    } catch (const std::exception& e) {
      base.status = LedgerStatus::kRuntimeError;
      base.detail = std::string("sidecar: ") + e.what();
      ledger.rows.push_back(base);
      continue;
    }
    for (int level : game->playable_levels()) {
      LedgerRow row = base;
      row.level = level;
      tasks.push_back({game, sidecar.get(), ledger.rows.size()});
      ledger.rows.push_back(row);
    }
    games.push_back(game);
    sidecars.push_back(std::move(sidecar));
  }

  int workers = limits.workers > 0 ? limits.workers
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      validate_level(tasks[i], limits, ledger.rows[tasks[i].row]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return ledger;
}

std::string ledger_to_json(const Ledger& ledger) {
  json rows = json::array();
  for (const LedgerRow& r : ledger.rows) {
    rows.push_back({{"game", r.game},
                    {"path", r.path},
                    {"level", r.level},
                    {"status", ledger_status_name(r.status)},
                    {"detail", r.detail},
                    {"env_steps", r.env_steps},
                    {"solution_length", r.solution_length},
                    {"external_solution", r.external_solution}});
  }
  json j = {{"total", ledger.total()}, {"counts", ledger.counts()}, {"rows", std::move(rows)}};
  return j.dump(2);
}

std::string ledger_to_csv(const Ledger& ledger) {
  std::ostringstream out;
  out << "game,level,status,env_steps,solution_length,external_solution,detail\n";
  for (const LedgerRow& r : ledger.rows) {
    out << csv_escape(r.game) << ',' << r.level << ',' << ledger_status_name(r.status) << ','
        << r.env_steps << ',' << r.solution_length << ',' << (r.external_solution ? 1 : 0) << ','
        << csv_escape(r.detail) << '\n';
  }
  return out.str();
}

}  // namespace pscript
