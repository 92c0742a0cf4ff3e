#include <stdexcept>

#include "json.hpp"
#include "pscript/agentenv.hpp"

namespace pscript {

Observation observe(const GameDef& game, const GridState& s) {
  Observation obs;
  const int n = game.num_objects();
  obs.planes = n + 5 * s.layers + 1;
  obs.height = s.height;
  obs.width = s.width;
  const std::size_t plane_size = static_cast<std::size_t>(s.cells());
  obs.data.assign(plane_size * obs.planes, 0);
  for (int ci = 0; ci < s.cells(); ++ci) {
    for (ObjectId id = 0; id < n; ++id) {
      if (s.has(ci, id)) obs.data[id * plane_size + ci] = 1;
    }
    for (int l = 0; l < s.layers; ++l) {
      const uint8_t f = s.force(ci, l);
      for (int k = 0; k < 5; ++k) {
        if (f & (1u << k)) obs.data[(n + 5 * l + k) * plane_size + ci] = 1;
      }
    }
    if (s.last_input[ci]) obs.data[(obs.planes - 1) * plane_size + ci] = 1;
  }
  return obs;
}

GridState state_from_observation(const GameDef& game, const Observation& obs, int level_index) {
  const int n = game.num_objects();
  const int layers = game.num_layers();
  if (obs.planes != n + 5 * layers + 1) {
    throw std::invalid_argument("observation plane count does not match the game");
  }
  GridState s;
  s.level_index = level_index;
  s.width = obs.width;
  s.height = obs.height;
  s.words = std::max(1, game.object_words());
  s.layers = layers;
  s.objects.assign(static_cast<std::size_t>(s.cells()) * s.words, 0);
  s.forces.assign(static_cast<std::size_t>(s.cells()) * layers, 0);
  s.last_input.assign(s.cells(), 0);
  const std::size_t plane_size = static_cast<std::size_t>(s.cells());
  for (int ci = 0; ci < s.cells(); ++ci) {
    for (ObjectId id = 0; id < n; ++id) {
      if (obs.data[id * plane_size + ci]) s.cell(ci)[id >> 6] |= uint64_t{1} << (id & 63);
    }
    for (int l = 0; l < layers; ++l) {
      for (int k = 0; k < 5; ++k) {
        if (obs.data[(n + 5 * l + k) * plane_size + ci]) {
          s.forces[static_cast<std::size_t>(ci) * layers + l] |= static_cast<uint8_t>(1u << k);
        }
      }
    }
    s.last_input[ci] = obs.data[(obs.planes - 1) * plane_size + ci];
  }
  s.recount(n);
  return s;
}

std::vector<uint8_t> observation_to_binary(const Observation& obs) {
  std::vector<uint8_t> out = {'P', 'S', 'O', 'B'};
  for (uint32_t v : {static_cast<uint32_t>(obs.planes), static_cast<uint32_t>(obs.height),
                     static_cast<uint32_t>(obs.width)}) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  out.insert(out.end(), obs.data.begin(), obs.data.end());
  return out;
}

std::string observation_to_json(const GameDef& game, const Observation& obs) {
  using nlohmann::json;
  json names = json::array();
  for (const ObjectRecord& o : game.object_table.objects) names.push_back(o.name);
  static const char* kForceNames[5] = {"up", "down", "left", "right", "action"};
  for (int l = 0; l < game.num_layers(); ++l) {
    for (const char* f : kForceNames) names.push_back("layer" + std::to_string(l) + "_" + f);
  }
  names.push_back("last_input");
  json planes = json::array();
  for (int p = 0; p < obs.planes; ++p) {
    json rows = json::array();
    for (int y = 0; y < obs.height; ++y) {
      std::string row;
      for (int x = 0; x < obs.width; ++x) row.push_back(obs.at(p, y, x) ? '1' : '0');
      rows.push_back(std::move(row));
    }
    planes.push_back(std::move(rows));
  }
  json j = {{"planes", obs.planes},
            {"height", obs.height},
            {"width", obs.width},
            {"names", std::move(names)},
            {"data", std::move(planes)}};
  return j.dump();
}

Environment::Environment(std::shared_ptr<const GameDef> game, EnvConfig cfg)
    : cfg_(std::move(cfg)), engine_(std::move(game), cfg_.limits) {
  if (cfg_.horizon <= 0) throw std::invalid_argument("horizon must be positive");
}

std::pair<EnvState, Observation> Environment::reset(int level_index, uint64_t seed) {
  engine_.reseed(seed);
  EnvState env;
  env.grid = engine_.init_level(level_index);
  env.score = win_distance(engine_.game(), env.grid, cfg_.heuristic);
  Observation obs = observe(engine_.game(), env.grid);
  return {std::move(env), std::move(obs)};
}

StepResult Environment::step(EnvState& env, Action action) {
  if (env.done) throw std::logic_error("step called on a finished episode");
  StepResult r;
  r.info = engine_.tick(env.grid, action);
  ++env.steps;
  const double before = env.score;
  env.score = win_distance(engine_.game(), env.grid, cfg_.heuristic);
  r.reward = before - env.score;
  env.won = r.info.won;
  env.done = env.won || env.steps >= cfg_.horizon;
  r.done = env.done;
  r.observation = observe(engine_.game(), env.grid);
  return r;
}

}  // namespace pscript
