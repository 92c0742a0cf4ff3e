#include <stdexcept>

#include "pscript/solver.hpp"

namespace pscript {

const char* replay_status_name(ReplayStatus s) {
  switch (s) {
    case ReplayStatus::kSuccess: return "success";
    case ReplayStatus::kCompileError: return "compile_error";
    case ReplayStatus::kRuntimeError: return "runtime_error";
    case ReplayStatus::kSolutionError: return "solution_error";
    case ReplayStatus::kStateError: return "state_error";
  }
  return "?";
}

ReplayReport replay(std::shared_ptr<const GameDef> game, int level_index,
                    const std::vector<int>& actions, std::optional<uint64_t> expected_digest,
                    const std::vector<uint64_t>* expected_trajectory,
                    const EngineLimits& engine_limits) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!action_from_code(actions[i])) {
      throw std::invalid_argument("malformed action code " + std::to_string(actions[i]) +
                                  " at index " + std::to_string(i));
    }
  }
  const int n_objects = game->num_objects();
  ReplayReport report;
  try {
    Engine engine(game, engine_limits);
    StepOutcome start;
    GridState s = engine.init_level(level_index, &start);
    report.messages = start.messages;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      StepOutcome out = engine.tick(s, static_cast<Action>(actions[i]));
      ++report.steps_executed;
      report.messages.insert(report.messages.end(), out.messages.begin(), out.messages.end());
      if (expected_trajectory && i < expected_trajectory->size() && !report.divergence_step &&
          state_digest(s, n_objects) != (*expected_trajectory)[i]) {
        report.divergence_step = static_cast<int>(i);
      }
      if (out.won) {
        report.won = true;
        break;
      }
    }
    if (actions.empty()) report.won = engine.check_win(s);
    report.final_digest = state_digest(s, n_objects);
  } catch (const EngineError& e) {
    report.status = ReplayStatus::kRuntimeError;
    report.error = e.what();
    return report;
  }
  if (!report.won) {
    report.status = ReplayStatus::kSolutionError;
  } else if (expected_digest && *expected_digest != report.final_digest) {
    report.status = ReplayStatus::kStateError;
    if (!report.divergence_step) report.divergence_step = report.steps_executed;
  }
  return report;
}

}  // namespace pscript
