#pragma once

// Uniform quantisation of the state box, the closeness bounds between a
// system and its finite abstraction, and (for the oracle path) the explicit
// finite MDP over cell representatives.

#include "cosyn/system.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cosyn {

/// Uniform partition of a box into half-open cells; the upper face of the box
/// belongs to the last cell of each axis. Cells are numbered with the first
/// axis varying fastest; index `num_cells()` is the out-of-domain cell.
struct Grid {
  Box box;
  std::vector<std::size_t> counts;
  Vector width;
  /// Requested and realised cell diameters.
  double delta_target = 0.0;
  double delta = 0.0;

  Eigen::Index dim() const { return box.dim(); }
  std::size_t num_cells() const;
  std::size_t out_cell() const { return num_cells(); }
  bool is_out(std::size_t cell) const { return cell >= num_cells(); }

  /// Representative point (centre) of an in-domain cell.
  Vector center(std::size_t cell) const;
  /// Cell bounds of an in-domain cell.
  Box bounds(std::size_t cell) const;
};

/// Largest grid exceeding the per-axis width delta / sqrt(n) nowhere.
/// Throws ConfigError for non-positive delta and NumericError beyond 1e8 cells.
Grid build_grid(const Box& box, double delta_target);

struct Quantized {
  std::size_t cell;
  /// Cell centre; empty for the out-of-domain cell.
  Vector point;

  bool out() const { return point.size() == 0; }
};

/// Pi_x: the cell containing x and its representative point.
Quantized quantize(const Grid& grid, const Vector& x);

/// epsilon = T delta H L.
double epsilon_bound(double horizon, double delta, double lipschitz, double lebesgue = 1.0);
/// delta = epsilon / (T H L).
double delta_for_epsilon(double epsilon, double horizon, double lipschitz, double lebesgue = 1.0);

struct Interval {
  double lo;
  double hi;
};

/// [max(0, p - eps), min(1, p + eps)].
Interval policy_interval(double p, double epsilon);
/// Distance between the optimal values of the system and its abstraction.
inline double optimal_gap(double epsilon) { return 2.0 * epsilon; }

/// Explicit finite MDP: one dense row-stochastic matrix per input and a label
/// per state.
struct FiniteMdp {
  std::vector<Matrix> transitions;
  std::vector<Letter> labels;
  /// Absorbing unlabelled state collecting mass that leaves the domain.
  std::optional<std::size_t> out_state;

  std::size_t num_states() const { return labels.size(); }
  std::size_t num_inputs() const { return transitions.size(); }
  const Matrix& operator[](std::size_t input) const { return transitions[input]; }

  /// Throws ConfigError on shape mismatch, negative entries or rows whose
  /// sum differs from 1 by more than 1e-9.
  void validate() const;

  /// Samples a successor by inverse-CDF lookup of a uniform draw.
  std::size_t sample(std::size_t state, std::size_t input, std::mt19937_64& rng) const;
};

/// Standard normal cumulative distribution function.
double normal_cdf(double z);

/// Transition probabilities from an arbitrary state x under `input` into the
/// grid cells, with the out-of-domain remainder as the last entry. Only for
/// one-dimensional linear-Gaussian models.
Vector kernel_row(const SystemModel& model, const Grid& grid, const Vector& x, std::size_t input);

/// Abstraction over cell centres plus an absorbing out state (index
/// `grid.out_cell()`). Throws UnsupportedError for models other than 1-D
/// linear-Gaussian ones.
FiniteMdp build_finite_mdp(const SystemModel& model, const Grid& grid);

/// CSV `state,input,next_state,prob` listing non-zero entries.
void write_mdp_csv(const FiniteMdp& mdp, const std::string& path);

}  // namespace cosyn
