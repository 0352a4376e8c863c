#pragma once

// Discrete-time stochastic control systems x' = f(x, u, w) with finite input
// sets, plus the room-temperature and road-traffic benchmarks.

#include "cosyn/error.hpp"
#include "cosyn/scltl.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cosyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box prod_i [lo_i, hi_i].
struct Box {
  Vector lo;
  Vector hi;

  Eigen::Index dim() const { return lo.size(); }
  bool contains(const Vector& x) const {
    return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  double volume() const { return (hi - lo).prod(); }
};

/// Entry-wise upper bounds of the state matrix and per-dimension noise
/// standard deviations of a linear system with additive Gaussian noise.
struct LinearGaussian {
  Matrix a_upper;
  Vector sigma;
};

/// Finite-input stochastic system with additive, per-dimension scaled,
/// standard-normal noise: x' = drift(x, u) + noise_scale .* w.
struct SystemModel {
  using Drift = std::function<Vector(const Vector& x, const Vector& u)>;
  using Labeler = std::function<Letter(const Vector& x)>;

  std::string name;
  Box domain;
  std::vector<Vector> inputs;
  Vector noise_scale;
  std::vector<std::string> ap;
  Drift drift;
  /// Called only for states inside the domain.
  Labeler labeler;
  /// Label of the synthetic out-of-domain state.
  Letter out_label = 0;
  std::optional<LinearGaussian> linear_gaussian;

  Eigen::Index dim() const { return domain.dim(); }
  std::size_t num_inputs() const { return inputs.size(); }

  Letter label(const Vector& x) const { return domain.contains(x) ? labeler(x) : out_label; }

  /// Throws ConfigError when an invariant of the descriptor is violated.
  void validate() const;
};

/// One transition x' = drift(x, u) + noise_scale .* w for a standard-normal
/// sample w. The raw successor is returned even when it leaves the domain.
/// Throws NumericError on a non-finite result.
Vector step(const SystemModel& model, const Vector& x, const Vector& u, const Vector& w);

/// Draws w ~ N(0, I) of the model's dimension.
Vector sample_noise(const SystemModel& model, std::mt19937_64& rng);

struct RoomParams {
  double eta = 0.0;
  double beta = 0.022;
  double gamma = 0.05;
  double t_e = -1.0;
  double t_h = 50.0;
  double sigma = 0.3162;
  double lo = 19.0;
  double hi = 21.0;
  std::vector<double> inputs{0.03, 0.09, 0.15, 0.21, 0.27, 0.33, 0.39, 0.45, 0.51, 0.57};
};

/// x' = (1 - 2 eta - beta - gamma u) x + gamma T_h u + beta T_e + sigma w,
/// AP = {safe} holding on the whole domain.
SystemModel make_room(const RoomParams& p = {});

struct TrafficParams {
  double tau_hours = 6.48 / 3600.0;
  double speed = 100.0;   // km/h
  double length = 0.5;    // km
  double exit_ratio = 0.25;
  double light_flow = 6.0;
  double entry_flow = 3.0;
  double sigma = 1.9494;
  double lo = 0.0;
  double hi = 20.0;
};

/// x' = (1 - tau v / l - q) x + 6 u + 3 + sigma w with u in {0, 1}.
SystemModel make_traffic(const TrafficParams& p = {});

/// Sum over entries of 2 |a_ij| / (sigma_i sqrt(2 pi)): the Lipschitz constant
/// of the transition density of a linear system with additive Gaussian noise.
template <typename Derived>
double lipschitz_linear_gaussian(const Eigen::MatrixBase<Derived>& a_upper, const Vector& sigma) {
  if (a_upper.rows() != sigma.size()) throw ConfigError("A and sigma dimensions differ");
  if ((sigma.array() <= 0.0).any()) throw ConfigError("noise standard deviations must be positive");
  const double root_two_pi = std::sqrt(2.0 * std::numbers::pi);
  double h = 0.0;
  for (Eigen::Index i = 0; i < a_upper.rows(); ++i) {
    for (Eigen::Index j = 0; j < a_upper.cols(); ++j) h += 2.0 * std::abs(a_upper(i, j)) / (sigma(i) * root_two_pi);
  }
  return h;
}

inline double lipschitz_linear_gaussian(const LinearGaussian& lg) {
  return lipschitz_linear_gaussian(lg.a_upper, lg.sigma);
}

}  // namespace cosyn
