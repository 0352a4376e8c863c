#include "cosyn/quantize.hpp"

#include "cosyn/csv.hpp"

#include <algorithm>
#include <cmath>

namespace cosyn {

std::size_t Grid::num_cells() const {
  std::size_t n = 1;
  for (std::size_t c : counts) n *= c;
  return n;
}

Vector Grid::center(std::size_t cell) const {
  if (is_out(cell)) throw ConfigError("grid: the out cell has no centre");
  Vector c(dim());
  for (Eigen::Index d = 0; d < dim(); ++d) {
    const std::size_t i = cell % counts[d];
    cell /= counts[d];
    c(d) = box.lo(d) + (static_cast<double>(i) + 0.5) * width(d);
  }
  return c;
}

Box Grid::bounds(std::size_t cell) const {
  const Vector c = center(cell);
  return {c - 0.5 * width, c + 0.5 * width};
}

Grid build_grid(const Box& box, double delta_target) {
  if (!(delta_target > 0.0) || !std::isfinite(delta_target)) throw ConfigError("grid: delta must be positive");
  if (box.dim() == 0 || (box.hi.array() <= box.lo.array()).any()) throw ConfigError("grid: empty box");
  Grid g;
  g.box = box;
  g.delta_target = delta_target;
  g.width.resize(box.dim());
  const double per_axis = delta_target / std::sqrt(static_cast<double>(box.dim()));
  double total = 1.0;
  for (Eigen::Index d = 0; d < box.dim(); ++d) {
    const double extent = box.hi(d) - box.lo(d);
    // Tolerance keeps exact ratios such as 2 / 0.01 from rounding up a cell.
    const double cells = std::max(1.0, std::ceil(extent / per_axis - 1e-9));
    total *= cells;
    if (total > 1e8) throw NumericError("grid: more than 1e8 cells");
    g.counts.push_back(static_cast<std::size_t>(cells));
    g.width(d) = extent / cells;
  }
  g.delta = g.width.norm();
  return g;
}

Quantized quantize(const Grid& grid, const Vector& x) {
  if (!grid.box.contains(x)) return {grid.out_cell(), Vector()};
  std::size_t cell = 0, stride = 1;
  for (Eigen::Index d = 0; d < grid.dim(); ++d) {
    const auto i = std::min(static_cast<std::size_t>((x(d) - grid.box.lo(d)) / grid.width(d)), grid.counts[d] - 1);
    cell += i * stride;
    stride *= grid.counts[d];
  }
  return {cell, grid.center(cell)};
}

double epsilon_bound(double horizon, double delta, double lipschitz, double lebesgue) {
  return horizon * delta * lipschitz * lebesgue;
}

double delta_for_epsilon(double epsilon, double horizon, double lipschitz, double lebesgue) {
  const double denom = horizon * lipschitz * lebesgue;
  if (!(denom > 0.0)) throw ConfigError("delta_for_epsilon: T, H and L must be positive");
  return epsilon / denom;
}

Interval policy_interval(double p, double epsilon) {
  return {std::max(0.0, p - epsilon), std::min(1.0, p + epsilon)};
}

void FiniteMdp::validate() const {
  if (transitions.empty()) throw ConfigError("mdp: no inputs");
  const auto n = static_cast<Eigen::Index>(num_states());
  if (n == 0) throw ConfigError("mdp: no states");
  if (out_state && *out_state >= num_states()) throw ConfigError("mdp: out state index out of range");
  for (const Matrix& t : transitions) {
    if (t.rows() != n || t.cols() != n) throw ConfigError("mdp: transition matrix shape mismatch");
    if ((t.array() < 0.0).any() || !t.allFinite()) throw ConfigError("mdp: invalid transition probability");
    if (((t.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) throw ConfigError("mdp: unnormalised row");
  }
}

std::size_t FiniteMdp::sample(std::size_t state, std::size_t input, std::mt19937_64& rng) const {
  const Matrix& t = transitions[input];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last = state;
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    const double p = t(static_cast<Eigen::Index>(state), j);
    if (p <= 0.0) continue;
    acc += p;
    last = static_cast<std::size_t>(j);
    if (u < acc) return last;
  }
  return last;  // rounding left u beyond the accumulated mass
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Vector kernel_row(const SystemModel& model, const Grid& grid, const Vector& x, std::size_t input) {
  if (!model.linear_gaussian || model.dim() != 1) {
    throw UnsupportedError(model.name + ": explicit abstraction needs a 1-D linear-Gaussian model");
  }
  const auto cells = static_cast<Eigen::Index>(grid.num_cells());
  const double mean = model.drift(x, model.inputs.at(input))(0);
  const double sigma = model.noise_scale(0);
  Vector row(cells + 1);
  // Telescoping differences of the CDF at the cell boundaries.
  double below = normal_cdf((grid.box.lo(0) - mean) / sigma);
  const double first = below;
  for (Eigen::Index j = 0; j < cells; ++j) {
    const double edge = j + 1 == cells ? grid.box.hi(0) : grid.box.lo(0) + static_cast<double>(j + 1) * grid.width(0);
    const double cdf = normal_cdf((edge - mean) / sigma);
    row(j) = cdf - below;
    below = cdf;
  }
  row(cells) = first + (1.0 - below);
  return row;
}

FiniteMdp build_finite_mdp(const SystemModel& model, const Grid& grid) {
  if (!model.linear_gaussian || model.dim() != 1) {
    throw UnsupportedError(model.name + ": explicit abstraction needs a 1-D linear-Gaussian model");
  }
  const std::size_t cells = grid.num_cells();
  const auto n = static_cast<Eigen::Index>(cells + 1);
  FiniteMdp mdp;
  mdp.out_state = cells;
  for (std::size_t s = 0; s < cells; ++s) mdp.labels.push_back(model.label(grid.center(s)));
  mdp.labels.push_back(model.out_label);
  for (std::size_t u = 0; u < model.num_inputs(); ++u) {
    Matrix t = Matrix::Zero(n, n);
    for (std::size_t s = 0; s < cells; ++s) {
      t.row(static_cast<Eigen::Index>(s)) = kernel_row(model, grid, grid.center(s), u).transpose();
    }
    t(n - 1, n - 1) = 1.0;
    mdp.transitions.push_back(std::move(t));
  }
  mdp.validate();
  return mdp;
}

void write_mdp_csv(const FiniteMdp& mdp, const std::string& path) {
  csv::Writer w(path);
  w.header({"state", "input", "next_state", "prob"});
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t u = 0; u < mdp.num_inputs(); ++u) {
      for (std::size_t j = 0; j < mdp.num_states(); ++j) {
        const double p = mdp[u](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
        if (p != 0.0) w.row(s, u, j, p);
      }
    }
  }
}

}  // namespace cosyn
