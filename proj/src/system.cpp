#include "cosyn/system.hpp"

namespace cosyn {

void SystemModel::validate() const {
  if (domain.lo.size() == 0 || domain.lo.size() != domain.hi.size()) throw ConfigError(name + ": malformed domain");
  if ((domain.hi.array() <= domain.lo.array()).any()) throw ConfigError(name + ": empty domain");
  if (inputs.empty()) throw ConfigError(name + ": input set is empty");
  if (noise_scale.size() != domain.dim()) throw ConfigError(name + ": noise scale dimension mismatch");
  if ((noise_scale.array() <= 0.0).any()) throw ConfigError(name + ": noise scales must be positive");
  if (!drift || !labeler) throw ConfigError(name + ": missing drift or labeler");
  if (ap.size() > kMaxPropositions) throw ConfigError(name + ": too many propositions");
}

Vector step(const SystemModel& model, const Vector& x, const Vector& u, const Vector& w) {
  Vector next = model.drift(x, u) + model.noise_scale.cwiseProduct(w);
  if (!next.allFinite()) throw NumericError(model.name + ": non-finite successor state");
  return next;
}

Vector sample_noise(const SystemModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector w(model.dim());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  return w;
}

namespace {
Vector scalar(double v) { return Vector::Constant(1, v); }
}  // namespace

SystemModel make_room(const RoomParams& p) {
  SystemModel m;
  m.name = "room";
  m.domain = {scalar(p.lo), scalar(p.hi)};
  for (double u : p.inputs) m.inputs.push_back(scalar(u));
  m.noise_scale = scalar(p.sigma);
  m.ap = {"safe"};
  m.drift = [p](const Vector& x, const Vector& u) {
    const double a = 1.0 - 2.0 * p.eta - p.beta - p.gamma * u(0);
    return scalar(a * x(0) + p.gamma * p.t_h * u(0) + p.beta * p.t_e);
  };
  m.labeler = [](const Vector&) { return Letter{1}; };
  // Coefficient at u = 0 bounds |a(u)| for every non-negative input.
  m.linear_gaussian = LinearGaussian{Matrix::Constant(1, 1, std::abs(1.0 - 2.0 * p.eta - p.beta)), scalar(p.sigma)};
  m.validate();
  return m;
}

SystemModel make_traffic(const TrafficParams& p) {
  const double a = 1.0 - p.tau_hours * p.speed / p.length - p.exit_ratio;
  SystemModel m;
  m.name = "traffic";
  m.domain = {scalar(p.lo), scalar(p.hi)};
  m.inputs = {scalar(0.0), scalar(1.0)};
  m.noise_scale = scalar(p.sigma);
  m.ap = {"safe"};
  m.drift = [a, p](const Vector& x, const Vector& u) {
    return scalar(a * x(0) + p.light_flow * u(0) + p.entry_flow);
  };
  m.labeler = [](const Vector&) { return Letter{1}; };
  m.linear_gaussian = LinearGaussian{Matrix::Constant(1, 1, std::abs(a)), scalar(p.sigma)};
  m.validate();
  return m;
}

}  // namespace cosyn
