#pragma once

// Nadaraya-Watson conditional kernel density estimate of the transition
// density, and a numerical Lipschitz estimate derived from it.

#include "cosyn/system.hpp"

#include <cstdint>
#include <string>

namespace cosyn {

/// Observed transitions, one per row: state, input, successor.
struct TrajectorySample {
  Matrix x;
  Matrix u;
  Matrix xp;

  Eigen::Index size() const { return x.rows(); }
};

/// Simulates `count` transitions with states and inputs drawn uniformly from
/// the domain and the input set.
TrajectorySample simulate_transitions(const SystemModel& model, std::size_t count, std::uint64_t seed);

/// Sum_i K_h1(xp - xp_i) K_h2(|x - x_i|) / Sum_i K_h2(|x - x_i|) over the
/// samples whose input equals `u`, with K the standard normal kernel and
/// K_h(y) = h^-n K(y / h).
/// Throws EstimationError if no sample has input `u` or the denominator
/// underflows to zero.
double ckde_density(const TrajectorySample& samples, double h1, double h2, const Vector& xp, const Vector& x,
                    const Vector& u);

/// 1.06 * sd * N^(-1/5), averaged over the columns of `data`.
double silverman_bandwidth(const Matrix& data);

struct LipschitzOptions {
  /// Intervals per axis of the evaluation grid; doubling it refines the grid
  /// to a superset.
  int resolution = 40;
  /// Central-difference step; defaults to h2 / 10.
  double fd_step = 0.0;
  /// Bandwidths; default to the Silverman rule on the successors and states.
  double h1 = 0.0;
  double h2 = 0.0;
};

/// An estimate, not a bound, together with the grid it was taken over.
struct LipschitzEstimate {
  double value = 0.0;
  int resolution = 0;
  double fd_step = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

/// Maximum over a grid of (x', x, u) of the norm of the central-difference
/// gradient of the estimated density with respect to x. The x grid spans the
/// sampled states shrunk by h2 at each end; the x' grid spans the sampled
/// successors.
LipschitzEstimate lipschitz_estimate(const TrajectorySample& samples, const LipschitzOptions& options = {});

/// CSV with header `x_1..x_n,nu_1..nu_m,xp_1..xp_n`.
void write_samples_csv(const TrajectorySample& samples, const std::string& path);
TrajectorySample read_samples_csv(const std::string& path);

}  // namespace cosyn
