#include "cosyn/ckde.hpp"

#include "cosyn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cosyn {

namespace {

double gaussian_norm(Eigen::Index n, double h) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(n)) * std::pow(h, -static_cast<double>(n));
}

std::vector<Eigen::Index> rows_with_input(const TrajectorySample& s, const Vector& u) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s.u.row(i).transpose() == u) rows.push_back(i);
  }
  return rows;
}

// Cartesian grid with resolution + 1 points per axis over [lo, hi].
Matrix grid_points(const Vector& lo, const Vector& hi, int resolution) {
  const Eigen::Index n = lo.size();
  const Eigen::Index per_axis = resolution + 1;
  double total = std::pow(static_cast<double>(per_axis), static_cast<double>(n));
  if (total > 1e6) throw NumericError("lipschitz_estimate: evaluation grid too large");
  const auto count = static_cast<Eigen::Index>(total);
  Matrix pts(count, n);
  for (Eigen::Index k = 0; k < count; ++k) {
    Eigen::Index rem = k;
    for (Eigen::Index d = 0; d < n; ++d) {
      const Eigen::Index i = rem % per_axis;
      rem /= per_axis;
      pts(k, d) = lo(d) + (hi(d) - lo(d)) * static_cast<double>(i) / resolution;
    }
  }
  return pts;
}

}  // namespace

TrajectorySample simulate_transitions(const SystemModel& model, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, model.num_inputs() - 1);
  const Eigen::Index n = model.dim();
  const auto m = model.inputs.front().size();
  TrajectorySample s{Matrix(count, n), Matrix(count, m), Matrix(count, n)};
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(n);
    for (Eigen::Index d = 0; d < n; ++d) x(d) = model.domain.lo(d) + unit(rng) * (model.domain.hi(d) - model.domain.lo(d));
    const Vector& u = model.inputs[pick(rng)];
    const Vector w = sample_noise(model, rng);
    const auto r = static_cast<Eigen::Index>(i);
    s.x.row(r) = x.transpose();
    s.u.row(r) = u.transpose();
    s.xp.row(r) = step(model, x, u, w).transpose();
  }
  return s;
}

double ckde_density(const TrajectorySample& samples, double h1, double h2, const Vector& xp, const Vector& x,
                    const Vector& u) {
  if (h1 <= 0.0 || h2 <= 0.0) throw ConfigError("ckde: bandwidths must be positive");
  const auto rows = rows_with_input(samples, u);
  if (rows.empty()) throw EstimationError("ckde: no samples for the requested input");
  const Eigen::Index n = samples.x.cols();
  const double c1 = gaussian_norm(n, h1);
  const double c2 = gaussian_norm(n, h2);
  double num = 0.0, den = 0.0;
  for (Eigen::Index i : rows) {
    const double r2 = (x - samples.x.row(i).transpose()).squaredNorm();
    const double w = c2 * std::exp(-0.5 * r2 / (h2 * h2));
    const double y2 = (xp - samples.xp.row(i).transpose()).squaredNorm();
    num += c1 * std::exp(-0.5 * y2 / (h1 * h1)) * w;
    den += w;
  }
  if (den == 0.0) throw EstimationError("ckde: degenerate query, kernel weights underflow");
  return num / den;
}

double silverman_bandwidth(const Matrix& data) {
  const auto n = static_cast<double>(data.rows());
  if (data.rows() < 2) throw EstimationError("bandwidth: need at least two samples");
  double sum = 0.0;
  for (Eigen::Index d = 0; d < data.cols(); ++d) {
    const auto col = data.col(d).array();
    const double sd = std::sqrt((col - col.mean()).square().sum() / (n - 1.0));
    sum += 1.06 * sd * std::pow(n, -0.2);
  }
  const double h = sum / static_cast<double>(data.cols());
  if (!(h > 0.0)) throw EstimationError("bandwidth: samples have zero spread");
  return h;
}

LipschitzEstimate lipschitz_estimate(const TrajectorySample& samples, const LipschitzOptions& options) {
  if (samples.size() == 0) throw EstimationError("lipschitz_estimate: no samples");
  if (options.resolution < 1) throw ConfigError("lipschitz_estimate: resolution must be >= 1");
  LipschitzEstimate est;
  est.resolution = options.resolution;
  est.h1 = options.h1 > 0.0 ? options.h1 : silverman_bandwidth(samples.xp);
  est.h2 = options.h2 > 0.0 ? options.h2 : silverman_bandwidth(samples.x);
  est.fd_step = options.fd_step > 0.0 ? options.fd_step : est.h2 / 10.0;
  if (options.fd_step < 0.0) throw ConfigError("lipschitz_estimate: finite-difference step must be positive");

  const Eigen::Index n = samples.x.cols();
  const double c1 = gaussian_norm(n, est.h1);

  std::vector<Vector> inputs;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const Vector u = samples.u.row(i).transpose();
    if (std::find(inputs.begin(), inputs.end(), u) == inputs.end()) inputs.push_back(u);
  }

  for (const Vector& u : inputs) {
    const auto rows = rows_with_input(samples, u);
    const auto count = static_cast<Eigen::Index>(rows.size());
    Matrix xs(count, n), xps(count, n);
    for (Eigen::Index k = 0; k < count; ++k) {
      xs.row(k) = samples.x.row(rows[k]);
      xps.row(k) = samples.xp.row(rows[k]);
    }
    Vector x_lo = xs.colwise().minCoeff().transpose(), x_hi = xs.colwise().maxCoeff().transpose();
    for (Eigen::Index d = 0; d < n; ++d) {
      if (x_hi(d) - x_lo(d) > 2.0 * est.h2) {
        x_lo(d) += est.h2;
        x_hi(d) -= est.h2;
      }
    }
    const Matrix x_grid = grid_points(x_lo, x_hi, options.resolution);
    const Matrix xp_grid = grid_points(xps.colwise().minCoeff().transpose(), xps.colwise().maxCoeff().transpose(),
                                       options.resolution);

    // Successor kernel values, one row per grid point.
    Matrix k1(xp_grid.rows(), count);
    for (Eigen::Index g = 0; g < xp_grid.rows(); ++g) {
      for (Eigen::Index k = 0; k < count; ++k) {
        k1(g, k) = c1 * std::exp(-0.5 * (xp_grid.row(g) - xps.row(k)).squaredNorm() / (est.h1 * est.h1));
      }
    }

    auto density_at = [&](const Vector& x) -> Vector {
      Vector w(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        w(k) = std::exp(-0.5 * (x.transpose() - xs.row(k)).squaredNorm() / (est.h2 * est.h2));
      }
      const double den = w.sum();
      if (den == 0.0) throw EstimationError("lipschitz_estimate: degenerate query, kernel weights underflow");
      return k1 * w / den;
    };

    for (Eigen::Index g = 0; g < x_grid.rows(); ++g) {
      const Vector x = x_grid.row(g).transpose();
      Matrix grad(xp_grid.rows(), n);
      for (Eigen::Index d = 0; d < n; ++d) {
        Vector lo = x, hi = x;
        lo(d) -= est.fd_step;
        hi(d) += est.fd_step;
        grad.col(d) = (density_at(hi) - density_at(lo)) / (2.0 * est.fd_step);
      }
      est.value = std::max(est.value, grad.rowwise().norm().maxCoeff());
    }
  }
  return est;
}

void write_samples_csv(const TrajectorySample& s, const std::string& path) {
  csv::Writer w(path);
  std::vector<std::string> head;
  for (Eigen::Index d = 0; d < s.x.cols(); ++d) head.push_back("x_" + std::to_string(d + 1));
  for (Eigen::Index d = 0; d < s.u.cols(); ++d) head.push_back("nu_" + std::to_string(d + 1));
  for (Eigen::Index d = 0; d < s.xp.cols(); ++d) head.push_back("xp_" + std::to_string(d + 1));
  w.header(head);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    std::vector<std::string> cells;
    for (Eigen::Index d = 0; d < s.x.cols(); ++d) cells.push_back(csv::format(s.x(i, d)));
    for (Eigen::Index d = 0; d < s.u.cols(); ++d) cells.push_back(csv::format(s.u(i, d)));
    for (Eigen::Index d = 0; d < s.xp.cols(); ++d) cells.push_back(csv::format(s.xp(i, d)));
    w.fields(cells);
  }
}

TrajectorySample read_samples_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  Eigen::Index n = 0, m = 0, np = 0;
  for (const auto& h : t.header) {
    if (h.starts_with("xp_")) ++np;
    else if (h.starts_with("x_")) ++n;
    else if (h.starts_with("nu_")) ++m;
    else throw ConfigError(path + ": unexpected column '" + h + "'");
  }
  if (n == 0 || m == 0 || n != np) throw ConfigError(path + ": header must be x_1..x_n,nu_1..nu_m,xp_1..xp_n");
  const auto rows = static_cast<Eigen::Index>(t.rows.size());
  TrajectorySample s{Matrix(rows, n), Matrix(rows, m), Matrix(rows, n)};
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index d = 0; d < n; ++d) s.x(i, d) = csv::to_double(t.rows[i][t.column("x_" + std::to_string(d + 1))]);
    for (Eigen::Index d = 0; d < m; ++d) s.u(i, d) = csv::to_double(t.rows[i][t.column("nu_" + std::to_string(d + 1))]);
    for (Eigen::Index d = 0; d < n; ++d) s.xp(i, d) = csv::to_double(t.rows[i][t.column("xp_" + std::to_string(d + 1))]);
  }
  return s;
}

}  // namespace cosyn
