#pragma once

// Finite-horizon tabular Q-learning over interpreter observations and
// Monte-Carlo evaluation of the resulting greedy policy.

#include "cosyn/product.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cosyn::qlearn {

/// Q[k](cell, q, input) for k = 0..T-1 with visit counters; Q[T] is 0.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t horizon, std::size_t cells, std::size_t states, std::size_t inputs);

  double& value(std::size_t k, std::size_t cell, std::size_t q, std::size_t u) { return q_[index(k, cell, q, u)]; }
  double value(std::size_t k, std::size_t cell, std::size_t q, std::size_t u) const { return q_[index(k, cell, q, u)]; }
  std::uint64_t& visits(std::size_t k, std::size_t cell, std::size_t q, std::size_t u) { return n_[index(k, cell, q, u)]; }
  std::uint64_t visits(std::size_t k, std::size_t cell, std::size_t q, std::size_t u) const { return n_[index(k, cell, q, u)]; }

  /// max_u Q[k](cell, q, u); 0 for k = T.
  double max_value(std::size_t k, std::size_t cell, std::size_t q) const;
  /// Lowest-index argmax.
  std::size_t greedy(std::size_t k, std::size_t cell, std::size_t q) const;
  bool visited(std::size_t k, std::size_t cell, std::size_t q) const;

  std::size_t horizon() const { return horizon_; }
  std::size_t num_cells() const { return cells_; }
  std::size_t num_states() const { return states_; }
  std::size_t num_inputs() const { return inputs_; }

  /// Free-form provenance (seed, episodes, kappa, delta, ...), persisted as
  /// `# key=value` lines.
  std::map<std::string, std::string> metadata;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t index(std::size_t k, std::size_t cell, std::size_t q, std::size_t u) const {
    return ((k * cells_ + cell) * states_ + q) * inputs_ + u;
  }

  std::size_t horizon_ = 0;
  std::size_t cells_ = 0;
  std::size_t states_ = 0;
  std::size_t inputs_ = 0;
  std::vector<double> q_;
  std::vector<std::uint64_t> n_;
};

/// CSV `k,cell,q,input,value,visits` with shape and metadata in `#` lines.
/// Only entries with visits or non-zero values are written.
void write_qtable_csv(const QTable& table, const std::string& path);
QTable read_qtable_csv(const std::string& path);

struct TrainConfig {
  std::uint64_t episodes = 1'000'000;
  std::uint64_t seed = 1;
  RewardConfig reward;
  /// alpha_n = 1 / (1 + n)^alpha_exponent with n the prior visit count.
  double alpha_exponent = 0.85;
  /// Exploration rate decays linearly from epsilon_start to epsilon_end over
  /// the first decay_fraction of the episodes.
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double decay_fraction = 0.8;
  /// Apply an episode's backups after it ends, last transition first, so a
  /// reward propagates through the whole episode at once. The backup rule and
  /// step sizes are unchanged; only their order differs.
  bool backward_updates = true;

  /// Throws ConfigError for schedules outside their valid ranges.
  void validate() const;
  double epsilon(std::uint64_t episode) const;
};

/// Episodic Q-learning with backups
///   Q[k](s, u) += alpha (r + max_u' Q[k+1](s', u') - Q[k](s, u)),
/// bootstrapping 0 on terminal transitions. Deterministic given the seed.
QTable train(Environment& env, const Dfa& dfa, std::size_t horizon, const TrainConfig& config);

/// Greedy policy with lowest-index ties; unvisited tuples take input 0.
Policy extract_policy(const QTable& table);

/// Reset reward plus max_u Q[0] at the reset state of the environment.
double reported_value(const QTable& table, Environment& env, const Dfa& dfa, const RewardConfig& reward);

struct Evaluation {
  double p_hat;
  double half_width;
  std::uint64_t rollouts;
  std::uint64_t accepted;
};

/// 99% Hoeffding half-width sqrt(ln(2 / 0.01) / (2 N)).
double hoeffding_half_width(std::uint64_t rollouts, double confidence = 0.99);

/// Fraction of `rollouts` episodes whose label word is accepted. Rollout i
/// draws from stream_rng(seed, i), so the result is independent of `threads`
/// (0 = hardware concurrency).
Evaluation evaluate(const Environment& env, const Dfa& dfa, std::size_t horizon, const Policy& policy,
                    std::uint64_t rollouts, std::uint64_t seed, unsigned threads = 0);

}  // namespace cosyn::qlearn
