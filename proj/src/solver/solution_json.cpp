#include "json.hpp"
#include "pscript/solver.hpp"

namespace pscript {

using nlohmann::json;

std::optional<uint64_t> parse_digest_hex(const std::string& hex) {
  if (hex.empty() || hex.size() > 16) return std::nullopt;
  uint64_t v = 0;
  for (char c : hex) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else return std::nullopt;
    v = (v << 4) | static_cast<uint64_t>(d);
  }
  return v;
}

std::string solution_to_json(const Solution& s) {
  json j = {{"game", s.game},
            {"level", s.level},
            {"actions", s.actions},
            {"solved", s.solved},
            {"env_steps", s.env_steps},
            {"nodes_expanded", s.nodes_expanded},
            {"elapsed_s", s.elapsed_s},
            {"best_score", s.best_score},
            {"terminal_digest", digest_hex(s.terminal_digest)}};
  return j.dump(2);
}

Solution solution_from_json(const std::string& text) {
  const json j = json::parse(text);
  Solution s;
  s.game = j.value("game", "");
  s.level = j.at("level").get<int>();
  s.actions = j.at("actions").get<std::vector<int>>();
  s.solved = j.value("solved", false);
  s.env_steps = j.value("env_steps", int64_t{0});
  s.nodes_expanded = j.value("nodes_expanded", int64_t{0});
  s.elapsed_s = j.value("elapsed_s", 0.0);
  s.best_score = j.value("best_score", 0.0);
  if (j.contains("terminal_digest")) {
    auto d = parse_digest_hex(j.at("terminal_digest").get<std::string>());
    if (!d) throw std::invalid_argument("terminal_digest is not a hex digest");
    s.terminal_digest = *d;
  }
  return s;
}

std::string replay_report_to_json(const ReplayReport& r) {
  json j = {{"status", replay_status_name(r.status)},
            {"won", r.won},
            {"final_digest", digest_hex(r.final_digest)},
            {"steps_executed", r.steps_executed},
            {"messages", r.messages}};
  j["divergence_step"] = r.divergence_step ? json(*r.divergence_step) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2);
}

}  // namespace pscript
