#pragma once

// Ground truth on explicit finite MDPs: finite-horizon value iteration over
// the product with a co-safety automaton, exact policy evaluation, and
// exhaustive positional-policy enumeration for the reward-shaping theorem.

#include "cosyn/product.hpp"
#include "cosyn/quantize.hpp"
#include "cosyn/scltl.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cosyn::dp {

/// value[k](s, q) for k = 0..T; accepting columns are pinned to 1.
struct ValueTable {
  std::vector<Matrix> value;
};

struct Result {
  /// Optimal probability of acceptance from the initial state, after its
  /// label has been consumed.
  double p_star = 0.0;
  std::size_t initial = 0;
  Dfa::State start_q = 0;
  ValueTable table;
  /// Greedy time-dependent policy, lowest input index on ties.
  Policy policy;
};

/// V[k](s, q) = max_u sum_s' T(s' | s, u) V[k+1](s', t(q, L(s'))), with
/// V[T](s, q) = [q accepting]. Throws ConfigError on invalid rows.
Result value_iteration(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial);

/// Exact expected total reward of a time-dependent policy, including the
/// reward for consuming the initial label, by forward propagation of the
/// product-state distribution.
double evaluate_policy(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial,
                       const Policy& policy, const RewardConfig& config);

/// CSV `k,cell,q,value,greedy_input` for k = 0..T-1.
void write_value_csv(const Result& result, const std::string& path);

/// The (state, automaton state) pairs at which a positional policy chooses:
/// those reachable before the horizon, excluding the out state and the
/// accepting and rejecting automaton states.
struct DecisionState {
  std::size_t state;
  Dfa::State q;
};

std::vector<DecisionState> decision_states(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon,
                                           std::size_t initial);

struct Enumeration {
  std::vector<DecisionState> states;
  /// choices[i][j] is the input of policy i at states[j].
  std::vector<std::vector<std::uint32_t>> choices;
  std::vector<double> values;

  /// Positional policy i as a time-dependent table (input 0 elsewhere).
  Policy policy(std::size_t i, std::size_t horizon, std::size_t num_states, std::size_t num_q) const;
};

/// Guard on the number of enumerated positional policies.
inline constexpr double kMaxPolicies = 1e6;

/// Every positional policy with its exact expected total reward. Throws
/// NumericError beyond kMaxPolicies.
Enumeration enumerate_policies(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial,
                               const RewardConfig& config);

struct ShapingCheck {
  bool equivalent = false;
  /// Indices of the argmax sets under sparse and shaped rewards.
  std::vector<std::size_t> sparse_optimal;
  std::vector<std::size_t> shaped_optimal;
  /// A policy optimal under exactly one of the two rewards, if any.
  std::optional<std::size_t> witness;
  /// Best and second-best distinct reach probabilities (p2 = p1 if all equal).
  double p1 = 0.0;
  double p2 = 0.0;
  /// Smallest shaped value in the p1 class minus the largest in the p2 class.
  double shaped_margin = 0.0;
};

/// Values within this distance count as ties.
inline constexpr double kTieTolerance = 1e-12;

/// Compares the optimal positional-policy sets under sparse and shaped
/// (kappa) rewards.
ShapingCheck shaping_equivalence_check(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon,
                                       std::size_t initial, double kappa);

struct RandomInstanceOptions {
  std::size_t min_states = 2;
  std::size_t max_states = 5;
  std::size_t min_q = 3;
  std::size_t max_q = 5;
  std::size_t inputs = 2;
  std::size_t max_horizon = 5;
  /// Redraw until the positional-policy count is at most this.
  double max_policies = 4096;
};

struct RandomInstance {
  FiniteMdp mdp;
  Dfa dfa;
  std::size_t horizon;
  std::size_t initial;
};

/// Seeded instance: Dirichlet(1, ..., 1) rows, random labels over one or two
/// propositions, and a random automaton with an absorbing accepting state
/// (and, on a coin flip, a rejecting sink).
RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& options = {});

}  // namespace cosyn::dp
