#include "cosyn/qlearn.hpp"

#include "cosyn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace cosyn::qlearn {

QTable::QTable(std::size_t horizon, std::size_t cells, std::size_t states, std::size_t inputs)
    : horizon_(horizon), cells_(cells), states_(states), inputs_(inputs) {
  if (inputs == 0) throw ConfigError("qtable: no inputs");
  const double size = static_cast<double>(horizon) * static_cast<double>(cells) * static_cast<double>(states) *
                      static_cast<double>(inputs);
  if (size > 5e8) throw NumericError("qtable: table too large");
  q_.assign(static_cast<std::size_t>(size), 0.0);
  n_.assign(static_cast<std::size_t>(size), 0);
}

double QTable::max_value(std::size_t k, std::size_t cell, std::size_t q) const {
  if (k >= horizon_) return 0.0;
  const double* row = &q_[index(k, cell, q, 0)];
  return *std::max_element(row, row + inputs_);
}

std::size_t QTable::greedy(std::size_t k, std::size_t cell, std::size_t q) const {
  const double* row = &q_[index(k, cell, q, 0)];
  return static_cast<std::size_t>(std::max_element(row, row + inputs_) - row);
}

bool QTable::visited(std::size_t k, std::size_t cell, std::size_t q) const {
  const std::uint64_t* row = &n_[index(k, cell, q, 0)];
  return std::any_of(row, row + inputs_, [](std::uint64_t n) { return n > 0; });
}

void write_qtable_csv(const QTable& t, const std::string& path) {
  csv::Writer w(path);
  w.comment("format=qtable-v1");
  w.comment("horizon=" + std::to_string(t.horizon()));
  w.comment("cells=" + std::to_string(t.num_cells()));
  w.comment("states=" + std::to_string(t.num_states()));
  w.comment("inputs=" + std::to_string(t.num_inputs()));
  for (const auto& [key, value] : t.metadata) w.comment(key + "=" + value);
  w.header({"k", "cell", "q", "input", "value", "visits"});
  for (std::size_t k = 0; k < t.horizon(); ++k) {
    for (std::size_t c = 0; c < t.num_cells(); ++c) {
      for (std::size_t q = 0; q < t.num_states(); ++q) {
        for (std::size_t u = 0; u < t.num_inputs(); ++u) {
          const double v = t.value(k, c, q, u);
          const std::uint64_t n = t.visits(k, c, q, u);
          if (v != 0.0 || n != 0) w.row(k, c, q, u, v, n);
        }
      }
    }
  }
}

QTable read_qtable_csv(const std::string& path) {
  const csv::Table in = csv::read(path);
  std::map<std::string, std::string> meta;
  for (const auto& line : in.comments) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (meta["format"] != "qtable-v1") throw ConfigError(path + ": not a Q-table file");
  auto size = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ConfigError(path + ": missing '" + key + "' header");
    const long long v = csv::to_int(it->second);
    if (v < 0) throw ConfigError(path + ": negative '" + key + "'");
    meta.erase(it);
    return static_cast<std::size_t>(v);
  };
  meta.erase("format");
  const std::size_t horizon = size("horizon"), cells = size("cells"), states = size("states"), inputs = size("inputs");
  QTable t(horizon, cells, states, inputs);
  t.metadata = std::move(meta);

  const std::size_t ck = in.column("k"), cc = in.column("cell"), cq = in.column("q"), cu = in.column("input"),
                    cv = in.column("value"), cn = in.column("visits");
  for (const auto& row : in.rows) {
    const auto k = static_cast<std::size_t>(csv::to_int(row[ck]));
    const auto c = static_cast<std::size_t>(csv::to_int(row[cc]));
    const auto q = static_cast<std::size_t>(csv::to_int(row[cq]));
    const auto u = static_cast<std::size_t>(csv::to_int(row[cu]));
    if (k >= horizon || c >= cells || q >= states || u >= inputs) throw ConfigError(path + ": index out of range");
    t.value(k, c, q, u) = csv::to_double(row[cv]);
    t.visits(k, c, q, u) = static_cast<std::uint64_t>(csv::to_int(row[cn]));
  }
  return t;
}

void TrainConfig::validate() const {
  reward.validate();
  if (episodes < 1) throw ConfigError("train: episodes must be >= 1");
  // Robbins-Monro: sum alpha diverges and sum alpha^2 converges.
  if (!(alpha_exponent > 0.5 && alpha_exponent <= 1.0)) throw ConfigError("train: alpha exponent must be in (0.5, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("train: exploration rates must lie in [0, 1]");
  }
  if (epsilon_end > epsilon_start) throw ConfigError("train: exploration rate must not increase");
  if (!(decay_fraction >= 0.0 && decay_fraction <= 1.0)) throw ConfigError("train: decay fraction must lie in [0, 1]");
}

double TrainConfig::epsilon(std::uint64_t episode) const {
  const double span = decay_fraction * static_cast<double>(episodes);
  if (span <= 0.0) return epsilon_end;
  const double frac = static_cast<double>(episode) / span;
  if (frac >= 1.0) return epsilon_end;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

QTable train(Environment& env, const Dfa& dfa, std::size_t horizon, const TrainConfig& config) {
  config.validate();
  QTable table(horizon, env.num_cells(), dfa.num_states(), env.num_inputs());
  Interpreter interp(env, dfa, horizon, config.reward);

  std::mt19937_64 explore = stream_rng(config.seed, 1);
  std::mt19937_64 world = stream_rng(config.seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_input(0, env.num_inputs() - 1);

  auto backup = [&](const EpisodeStep& step) {
    const ProductState& s = step.prior;
    const double target =
        step.reward + (step.terminal ? 0.0 : table.max_value(step.next.k, step.next.cell, step.next.q));
    std::uint64_t& n = table.visits(s.k, s.cell, s.q, step.input);
    const double alpha = std::pow(1.0 + static_cast<double>(n), -config.alpha_exponent);
    ++n;
    double& q = table.value(s.k, s.cell, s.q, step.input);
    q += alpha * (target - q);
  };

  std::vector<EpisodeStep> episode;
  episode.reserve(horizon);
  for (std::uint64_t e = 0; e < config.episodes; ++e) {
    const double eps = config.epsilon(e);
    interp.reset(world);
    episode.clear();
    while (!interp.terminal()) {
      const ProductState& s = interp.state();
      const std::size_t u = unit(explore) < eps ? any_input(explore) : table.greedy(s.k, s.cell, s.q);
      const EpisodeStep step = interp.step(u, world);
      if (config.backward_updates) {
        episode.push_back(step);
      } else {
        backup(step);
      }
    }
    for (auto it = episode.rbegin(); it != episode.rend(); ++it) backup(*it);
  }

  table.metadata["seed"] = std::to_string(config.seed);
  table.metadata["episodes"] = std::to_string(config.episodes);
  table.metadata["reward"] = to_string(config.reward.mode);
  table.metadata["kappa"] = csv::format(config.reward.kappa);
  table.metadata["updates"] = config.backward_updates ? "backward" : "forward";
  return table;
}

Policy extract_policy(const QTable& table) {
  Policy p(table.horizon(), table.num_cells(), table.num_states());
  for (std::size_t k = 0; k < table.horizon(); ++k) {
    for (std::size_t c = 0; c < table.num_cells(); ++c) {
      for (std::size_t q = 0; q < table.num_states(); ++q) {
        if (table.visited(k, c, q)) p.set(k, c, q, static_cast<std::uint32_t>(table.greedy(k, c, q)));
      }
    }
  }
  return p;
}

double reported_value(const QTable& table, Environment& env, const Dfa& dfa, const RewardConfig& reward) {
  std::mt19937_64 rng(0);
  Interpreter interp(env, dfa, table.horizon(), reward);
  const ResetResult r = interp.reset(rng);
  if (r.terminal) return r.reward;
  return r.reward + table.max_value(0, r.state.cell, r.state.q);
}

double hoeffding_half_width(std::uint64_t rollouts, double confidence) {
  if (rollouts == 0) throw ConfigError("evaluate: need at least one rollout");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(rollouts)));
}

Evaluation evaluate(const Environment& env, const Dfa& dfa, std::size_t horizon, const Policy& policy,
                    std::uint64_t rollouts, std::uint64_t seed, unsigned threads) {
  const double half_width = hoeffding_half_width(rollouts);
  if (policy.horizon() < horizon || policy.num_cells() != env.num_cells() || policy.num_states() != dfa.num_states()) {
    throw ConfigError("evaluate: policy shape does not match the environment");
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, rollouts));

  std::vector<std::uint64_t> accepted(threads, 0);
  auto worker = [&](unsigned t) {
    const auto local = env.clone();
    Interpreter interp(*local, dfa, horizon, {RewardMode::Sparse, 0.1});
    for (std::uint64_t i = t; i < rollouts; i += threads) {
      std::mt19937_64 rng = stream_rng(seed, i);
      double total = interp.reset(rng).reward;
      while (!interp.terminal()) {
        const ProductState& s = interp.state();
        total += interp.step(policy(s.k, s.cell, s.q), rng).reward;
      }
      if (total > 0.5) ++accepted[t];
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& th : pool) th.join();

  Evaluation ev;
  ev.rollouts = rollouts;
  ev.accepted = 0;
  for (std::uint64_t a : accepted) ev.accepted += a;
  ev.p_hat = static_cast<double>(ev.accepted) / static_cast<double>(rollouts);
  ev.half_width = half_width;
  return ev;
}

}  // namespace cosyn::qlearn
