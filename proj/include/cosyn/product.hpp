#pragma once

// The interpreter that runs a system through the quantiser and the automaton:
// the learner observes (cell, automaton state, step) and receives sparse or
// potential-shaped rewards. The product MDP is never materialised.

#include "cosyn/csv.hpp"
#include "cosyn/quantize.hpp"
#include "cosyn/scltl.hpp"
#include "cosyn/system.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace cosyn {

/// Independent generator for stream `stream` of a run seeded with `seed`.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// What the learner sees of the environment after each transition.
struct Observation {
  std::size_t cell;
  Letter label;
};

/// A finite-observation environment: a continuous system seen through a
/// quantiser, or an explicit finite MDP.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Observation count, including the out-of-domain cell if any.
  virtual std::size_t num_cells() const = 0;
  virtual std::size_t num_inputs() const = 0;

  virtual Observation reset(std::mt19937_64& rng) = 0;
  virtual Observation step(std::size_t input, std::mt19937_64& rng) = 0;

  /// Independent copy for use on another thread.
  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// Continuous system behind the quantiser Pi_x. The true state is tracked
/// privately; labels are evaluated at the representative point. Leaving the
/// domain is absorbing.
class ContinuousEnvironment : public Environment {
 public:
  /// Throws ConfigError if x0 lies outside the domain.
  ContinuousEnvironment(const SystemModel& model, const Grid& grid, Vector x0);

  /// Draw the initial state uniformly over the domain instead of using x0.
  void set_uniform_restarts(bool on) { uniform_restarts_ = on; }

  std::size_t num_cells() const override { return grid_->num_cells() + 1; }
  std::size_t num_inputs() const override { return model_->num_inputs(); }
  Observation reset(std::mt19937_64& rng) override;
  Observation step(std::size_t input, std::mt19937_64& rng) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ContinuousEnvironment>(*this); }

  const Vector& state() const { return x_; }
  bool out() const { return out_; }

 private:
  Observation observe();

  const SystemModel* model_;
  const Grid* grid_;
  Vector x0_;
  Vector x_;
  bool out_ = false;
  bool uniform_restarts_ = false;
};

/// Explicit finite MDP started from a fixed state.
class FiniteMdpEnvironment : public Environment {
 public:
  FiniteMdpEnvironment(const FiniteMdp& mdp, std::size_t initial);

  std::size_t num_cells() const override { return mdp_->num_states(); }
  std::size_t num_inputs() const override { return mdp_->num_inputs(); }
  Observation reset(std::mt19937_64& rng) override;
  Observation step(std::size_t input, std::mt19937_64& rng) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<FiniteMdpEnvironment>(*this); }

 private:
  const FiniteMdp* mdp_;
  std::size_t initial_;
  std::size_t state_;
};

/// Time-dependent deterministic policy over (k, cell, q).
class Policy {
 public:
  Policy() = default;
  Policy(std::size_t horizon, std::size_t cells, std::size_t states, std::uint32_t fill = 0)
      : horizon_(horizon), cells_(cells), states_(states), table_(horizon * cells * states, fill) {}

  std::uint32_t operator()(std::size_t k, std::size_t cell, std::size_t q) const { return table_[index(k, cell, q)]; }
  void set(std::size_t k, std::size_t cell, std::size_t q, std::uint32_t input) { table_[index(k, cell, q)] = input; }

  std::size_t horizon() const { return horizon_; }
  std::size_t num_cells() const { return cells_; }
  std::size_t num_states() const { return states_; }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::size_t index(std::size_t k, std::size_t cell, std::size_t q) const { return (k * cells_ + cell) * states_ + q; }

  std::size_t horizon_ = 0;
  std::size_t cells_ = 0;
  std::size_t states_ = 0;
  std::vector<std::uint32_t> table_;
};

enum class RewardMode { Sparse, Shaped };

struct RewardConfig {
  RewardMode mode = RewardMode::Sparse;
  double kappa = 0.1;

  /// Throws ConfigError unless kappa > 0 in shaped mode.
  void validate() const;
};

RewardMode parse_reward_mode(const std::string& text);
std::string to_string(RewardMode mode);

/// P(0) = 1 and P(d) = kappa (d - d(q0)) / (1 - d_max) otherwise; 0 when
/// d_max = 1.
double potential(const Dfa& dfa, unsigned d, double kappa);

/// Sparse: 1 on first entry into acceptance. Shaped: P(d(q')) - P(d(q)).
double reward(const Dfa& dfa, Dfa::State q, Dfa::State next, const RewardConfig& config);

struct ProductState {
  std::size_t cell = 0;
  Dfa::State q = 0;
  std::size_t k = 0;
};

struct EpisodeStep {
  ProductState prior;
  std::size_t input;
  ProductState next;
  double reward;
  bool terminal;
};

struct ResetResult {
  ProductState state;
  /// Reward for consuming the initial label, i.e. for the virtual transition
  /// from q0 to the reset automaton state.
  double reward;
  bool terminal;
};

/// Runs episodes of at most `horizon` transitions. The label of the initial
/// observation is consumed at reset, then one label per transition, so a
/// full episode reads horizon + 1 letters.
class Interpreter {
 public:
  Interpreter(Environment& env, const Dfa& dfa, std::size_t horizon, RewardConfig config);

  ResetResult reset(std::mt19937_64& rng);
  /// Throws ConfigError when called on a terminal state or with an input out
  /// of range.
  EpisodeStep step(std::size_t input, std::mt19937_64& rng);

  const ProductState& state() const { return state_; }
  bool terminal() const { return terminal_; }
  std::size_t horizon() const { return horizon_; }
  const Dfa& dfa() const { return *dfa_; }
  const RewardConfig& config() const { return config_; }

  /// Terminal test shared by reset and step.
  bool is_terminal(const ProductState& s) const;

 private:
  Environment* env_;
  const Dfa* dfa_;
  std::size_t horizon_;
  RewardConfig config_;
  ProductState state_;
  bool terminal_ = true;
};

/// CSV `episode,k,cell,q,input,reward,terminal`, one row per transition.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void write(std::size_t episode, const EpisodeStep& step);

 private:
  csv::Writer out_;
};

}  // namespace cosyn
