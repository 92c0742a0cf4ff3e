#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pscript/harness.hpp"

namespace pscript {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t env_seed(uint64_t seed, int index) {
  return splitmix64(seed ^ splitmix64(static_cast<uint64_t>(index) + 1));
}

struct EnvResult {
  uint64_t digest = 0;
  int64_t resets = 0;
};

EnvResult run_env(Engine& engine, int level_index, int steps, uint64_t seed,
                  const std::vector<Action>& actions) {
  engine.reseed(seed);
  std::mt19937_64 rng(seed);
  EnvResult r;
  GridState s = engine.init_level(level_index);
  for (int t = 0; t < steps; ++t) {
    const Action a = actions[rng() % actions.size()];
    bool reset = false;
    try {
      const StepOutcome out = engine.tick(s, a);
      reset = out.won || out.restarted;
    } catch (const EngineError&) {
      reset = true;
    }
    if (reset) {
      s = engine.init_level(level_index);
      ++r.resets;
    }
  }
  r.digest = state_digest(s, engine.game().num_objects());
  return r;
}

uint64_t fold_digest(const std::vector<uint64_t>& digests, int64_t resets) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  for (uint64_t d : digests) feed(d);
  feed(static_cast<uint64_t>(resets));
  return h;
}

}  // namespace

ThroughputReport profile_random(std::shared_ptr<const GameDef> game, int level_index,
                                int num_envs, int steps, uint64_t seed, int workers) {
  if (num_envs <= 0 || steps <= 0) throw std::invalid_argument("counts must be positive");
  std::vector<Action> actions = default_action_set(*game);
  actions.push_back(Action::kNone);

  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, num_envs);

  ThroughputReport rep;
  rep.game = game->prelude.title;
  rep.level = level_index;
  rep.num_envs = num_envs;
  rep.steps_per_env = steps;
  rep.seed = seed;
  rep.workers = workers;
  for (Action a : actions) rep.action_set.push_back(action_name(a));

  std::vector<EnvResult> results(num_envs);
  auto worker = [&](int w) {
    Engine engine(game);
    for (int i = w; i < num_envs; i += workers) {
      results[i] = run_env(engine, level_index, steps, env_seed(seed, i), actions);
    }
  };
  const auto start = std::chrono::steady_clock::now();
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          worker(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.total_ticks = static_cast<int64_t>(num_envs) * steps;
  rep.fps = rep.elapsed_s > 0 ? rep.total_ticks / rep.elapsed_s : 0.0;
  for (const EnvResult& r : results) {
    rep.final_digests.push_back(r.digest);
    rep.resets += r.resets;
  }
  rep.content_digest = fold_digest(rep.final_digests, rep.resets);
  return rep;
}

ThroughputReport profile_sweep(std::shared_ptr<const GameDef> game, int level_index,
                               const std::vector<int>& batch_sizes, int steps, uint64_t seed,
                               int workers) {
  if (batch_sizes.empty()) throw std::invalid_argument("empty batch-size list");
  std::vector<int> sizes = batch_sizes;
  std::sort(sizes.begin(), sizes.end());
  ThroughputReport last;
  std::vector<ThroughputPoint> series;
  for (int n : sizes) {
    last = profile_random(game, level_index, n, steps, seed, workers);
    series.push_back({n, last.total_ticks, last.elapsed_s, last.fps, last.content_digest});
  }
  last.sweep = std::move(series);
  return last;
}

std::string throughput_to_json(const ThroughputReport& r) {
  using nlohmann::json;
  json digests = json::array();
  for (uint64_t d : r.final_digests) digests.push_back(digest_hex(d));
  json sweep = json::array();
  for (const ThroughputPoint& p : r.sweep) {
    sweep.push_back({{"num_envs", p.num_envs},
                     {"total_ticks", p.total_ticks},
                     {"elapsed_s", p.elapsed_s},
                     {"fps", p.fps},
                     {"content_digest", digest_hex(p.content_digest)}});
  }
  json j = {{"game", r.game},
            {"level", r.level},
            {"num_envs", r.num_envs},
            {"steps_per_env", r.steps_per_env},
            {"seed", r.seed},
            {"workers", r.workers},
            {"action_set", r.action_set},
            {"total_ticks", r.total_ticks},
            {"resets", r.resets},
            {"elapsed_s", r.elapsed_s},
            {"fps", r.fps},
            {"content_digest", digest_hex(r.content_digest)},
            {"final_digests", std::move(digests)},
            {"sweep", std::move(sweep)}};
  return j.dump(2);
}

std::string throughput_to_csv(const ThroughputReport& r) {
  std::ostringstream out;
  out << "# actions:";
  for (const std::string& a : r.action_set) out << ' ' << a;
  out << "\ngame,level,num_envs,steps_per_env,seed,total_ticks,elapsed_s,fps,content_digest\n";
  auto row = [&](int envs, int64_t ticks, double elapsed, double fps, uint64_t digest) {
    out << '"' << r.game << "\"," << r.level << ',' << envs << ',' << r.steps_per_env << ','
        << r.seed << ',' << ticks << ',' << elapsed << ',' << fps << ',' << digest_hex(digest)
        << '\n';
  };
  if (r.sweep.empty()) {
    row(r.num_envs, r.total_ticks, r.elapsed_s, r.fps, r.content_digest);
  } else {
    for (const ThroughputPoint& p : r.sweep) {
      row(p.num_envs, p.total_ticks, p.elapsed_s, p.fps, p.content_digest);
    }
  }
  return out.str();
}

}  // namespace pscript
