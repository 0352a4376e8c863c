#include "cosyn/dp.hpp"

#include "cosyn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cosyn::dp {

namespace {

bool stops(const Dfa& dfa, Dfa::State q) { return dfa.is_accepting(q) || dfa.is_rejecting(q); }

void check_compatible(const FiniteMdp& mdp, const Dfa& dfa, std::size_t initial) {
  mdp.validate();
  if (initial >= mdp.num_states()) throw ConfigError("dp: initial state out of range");
  for (Letter a : mdp.labels) {
    if (a >= dfa.num_letters()) throw ConfigError("dp: label outside the automaton alphabet");
  }
}

}  // namespace

Result value_iteration(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial) {
  check_compatible(mdp, dfa, initial);
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  const auto nq = static_cast<Eigen::Index>(dfa.num_states());
  const auto acc = static_cast<Eigen::Index>(dfa.accepting());

  Result r;
  r.initial = initial;
  r.start_q = dfa.step(dfa.initial(), mdp.labels[initial]);
  r.policy = Policy(horizon, mdp.num_states(), dfa.num_states());
  r.table.value.assign(horizon + 1, Matrix::Zero(n, nq));
  r.table.value[horizon].col(acc).setOnes();

  Matrix w(n, nq);
  for (std::size_t k = horizon; k-- > 0;) {
    const Matrix& next = r.table.value[k + 1];
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index q = 0; q < nq; ++q) {
        w(s, q) = next(s, static_cast<Eigen::Index>(dfa.step(static_cast<Dfa::State>(q), mdp.labels[s])));
      }
    }
    Matrix& v = r.table.value[k];
    for (std::size_t u = 0; u < mdp.num_inputs(); ++u) {
      const Matrix m = mdp[u] * w;
      for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index q = 0; q < nq; ++q) {
          if (u == 0 || m(s, q) > v(s, q)) {
            v(s, q) = m(s, q);
            r.policy.set(k, s, q, static_cast<std::uint32_t>(u));
          }
        }
      }
    }
    v.col(acc).setOnes();
  }
  r.p_star = r.table.value[0](static_cast<Eigen::Index>(initial), static_cast<Eigen::Index>(r.start_q));
  return r;
}

double evaluate_policy(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial,
                       const Policy& policy, const RewardConfig& config) {
  check_compatible(mdp, dfa, initial);
  config.validate();
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  const auto nq = static_cast<Eigen::Index>(dfa.num_states());

  const Dfa::State q_start = dfa.step(dfa.initial(), mdp.labels[initial]);
  double total;
  if (config.mode == RewardMode::Sparse) {
    total = dfa.is_accepting(q_start) ? 1.0 : 0.0;
  } else {
    total = reward(dfa, dfa.initial(), q_start, config);
  }

  Matrix mass = Matrix::Zero(n, nq);
  mass(static_cast<Eigen::Index>(initial), static_cast<Eigen::Index>(q_start)) = 1.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    Matrix next = Matrix::Zero(n, nq);
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index q = 0; q < nq; ++q) {
        const double m = mass(s, q);
        if (m == 0.0 || stops(dfa, static_cast<Dfa::State>(q))) continue;
        const Matrix& t = mdp[policy(k, s, q)];
        for (Eigen::Index s2 = 0; s2 < n; ++s2) {
          const double p = t(s, s2);
          if (p == 0.0) continue;
          const Dfa::State q2 = dfa.step(static_cast<Dfa::State>(q), mdp.labels[s2]);
          total += m * p * reward(dfa, static_cast<Dfa::State>(q), q2, config);
          next(s2, static_cast<Eigen::Index>(q2)) += m * p;
        }
      }
    }
    mass = std::move(next);
  }
  return total;
}

void write_value_csv(const Result& result, const std::string& path) {
  csv::Writer w(path);
  w.header({"k", "cell", "q", "value", "greedy_input"});
  for (std::size_t k = 0; k + 1 < result.table.value.size(); ++k) {
    const Matrix& v = result.table.value[k];
    for (Eigen::Index s = 0; s < v.rows(); ++s) {
      for (Eigen::Index q = 0; q < v.cols(); ++q) w.row(k, s, q, v(s, q), result.policy(k, s, q));
    }
  }
}

std::vector<DecisionState> decision_states(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon,
                                           std::size_t initial) {
  check_compatible(mdp, dfa, initial);
  const std::size_t n = mdp.num_states(), nq = dfa.num_states();
  std::vector<char> chosen(n * nq, 0);
  std::vector<char> frontier(n * nq, 0);
  frontier[initial * nq + dfa.step(dfa.initial(), mdp.labels[initial])] = 1;
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<char> next(n * nq, 0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t q = 0; q < nq; ++q) {
        if (!frontier[s * nq + q] || stops(dfa, q) || (mdp.out_state && *mdp.out_state == s)) continue;
        chosen[s * nq + q] = 1;
        for (std::size_t u = 0; u < mdp.num_inputs(); ++u) {
          for (std::size_t s2 = 0; s2 < n; ++s2) {
            if (mdp[u](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) > 0.0) {
              next[s2 * nq + dfa.step(q, mdp.labels[s2])] = 1;
            }
          }
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<DecisionState> out;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t q = 0; q < nq; ++q) {
      if (chosen[s * nq + q]) out.push_back({s, q});
    }
  }
  return out;
}

Policy Enumeration::policy(std::size_t i, std::size_t horizon, std::size_t num_states, std::size_t num_q) const {
  Policy p(horizon, num_states, num_q);
  for (std::size_t j = 0; j < states.size(); ++j) {
    for (std::size_t k = 0; k < horizon; ++k) p.set(k, states[j].state, states[j].q, choices[i][j]);
  }
  return p;
}

Enumeration enumerate_policies(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon, std::size_t initial,
                               const RewardConfig& config) {
  Enumeration e;
  e.states = decision_states(mdp, dfa, horizon, initial);
  const double count = std::pow(static_cast<double>(mdp.num_inputs()), static_cast<double>(e.states.size()));
  if (count > kMaxPolicies) throw NumericError("dp: too many positional policies to enumerate");

  std::vector<std::uint32_t> choice(e.states.size(), 0);
  const auto inputs = static_cast<std::uint32_t>(mdp.num_inputs());
  while (true) {
    e.choices.push_back(choice);
    Policy p(horizon, mdp.num_states(), dfa.num_states());
    for (std::size_t j = 0; j < e.states.size(); ++j) {
      for (std::size_t k = 0; k < horizon; ++k) p.set(k, e.states[j].state, e.states[j].q, choice[j]);
    }
    e.values.push_back(evaluate_policy(mdp, dfa, horizon, initial, p, config));
    // Odometer increment, first decision state fastest.
    std::size_t j = 0;
    while (j < choice.size() && ++choice[j] == inputs) choice[j++] = 0;
    if (j == choice.size()) break;
  }
  return e;
}

namespace {

std::vector<std::size_t> argmax_set(const std::vector<double>& values) {
  const double best = *std::max_element(values.begin(), values.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - kTieTolerance) out.push_back(i);
  }
  return out;
}

}  // namespace

ShapingCheck shaping_equivalence_check(const FiniteMdp& mdp, const Dfa& dfa, std::size_t horizon,
                                       std::size_t initial, double kappa) {
  const Enumeration sparse = enumerate_policies(mdp, dfa, horizon, initial, {RewardMode::Sparse, kappa});
  const Enumeration shaped = enumerate_policies(mdp, dfa, horizon, initial, {RewardMode::Shaped, kappa});

  ShapingCheck c;
  c.sparse_optimal = argmax_set(sparse.values);
  c.shaped_optimal = argmax_set(shaped.values);
  c.equivalent = c.sparse_optimal == c.shaped_optimal;
  if (!c.equivalent) {
    std::vector<std::size_t> diff;
    std::set_symmetric_difference(c.sparse_optimal.begin(), c.sparse_optimal.end(), c.shaped_optimal.begin(),
                                  c.shaped_optimal.end(), std::back_inserter(diff));
    c.witness = diff.front();
  }

  c.p1 = sparse.values[c.sparse_optimal.front()];
  c.p2 = c.p1;
  bool have_second = false;
  for (double p : sparse.values) {
    if (p < c.p1 - kTieTolerance && (!have_second || p > c.p2)) {
      c.p2 = p;
      have_second = true;
    }
  }
  if (have_second) {
    double min_top = INFINITY, max_second = -INFINITY;
    for (std::size_t i = 0; i < sparse.values.size(); ++i) {
      const double p = sparse.values[i];
      if (p >= c.p1 - kTieTolerance) min_top = std::min(min_top, shaped.values[i]);
      if (std::abs(p - c.p2) <= kTieTolerance) max_second = std::max(max_second, shaped.values[i]);
    }
    c.shaped_margin = min_top - max_second;
  }
  return c;
}

RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& o) {
  if (o.min_states < 1 || o.min_states > o.max_states || o.min_q < 2 || o.min_q > o.max_q || o.inputs < 1 ||
      o.max_horizon < 1) {
    throw ConfigError("random instance: inconsistent size options");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::exponential_distribution<double> gamma1(1.0);

  for (int attempt = 0; attempt < 10000; ++attempt) {
    const std::size_t n = uniform(o.min_states, o.max_states);
    const std::size_t nq = uniform(o.min_q, o.max_q);
    const std::size_t props = uniform(1, 2);
    const std::size_t letters = std::size_t{1} << props;
    const std::size_t horizon = uniform(1, o.max_horizon);

    FiniteMdp mdp;
    for (std::size_t s = 0; s < n; ++s) mdp.labels.push_back(static_cast<Letter>(uniform(0, letters - 1)));
    for (std::size_t u = 0; u < o.inputs; ++u) {
      Matrix t(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (Eigen::Index s = 0; s < t.rows(); ++s) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) t(s, j) = gamma1(rng);
        t.row(s) /= t.row(s).sum();
      }
      mdp.transitions.push_back(std::move(t));
    }

    // State nq-1 accepts; state nq-2 is a rejecting sink on a coin flip.
    const std::size_t acc = nq - 1;
    const bool with_sink = uniform(0, 1) == 1;
    std::vector<Dfa::State> table(nq * letters);
    for (std::size_t q = 0; q < nq; ++q) {
      for (std::size_t a = 0; a < letters; ++a) {
        const bool absorbing = q == acc || (with_sink && q == nq - 2);
        table[q * letters + a] = absorbing ? q : uniform(0, nq - 1);
      }
    }
    std::vector<std::string> ap = props == 1 ? std::vector<std::string>{"a"} : std::vector<std::string>{"a", "b"};
    Dfa dfa = Dfa::from_table(std::move(ap), std::move(table), 0, acc);

    const std::size_t initial = uniform(0, n - 1);
    const auto states = decision_states(mdp, dfa, horizon, initial);
    const double count = std::pow(static_cast<double>(o.inputs), static_cast<double>(states.size()));
    if (count <= o.max_policies) return {std::move(mdp), std::move(dfa), horizon, initial};
  }
  throw ConfigError("random instance: size options admit no instance");
}

}  // namespace cosyn::dp
