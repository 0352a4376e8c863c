#include "cosyn/bmw.hpp"

#include <algorithm>
#include <cmath>

namespace cosyn {

Vector bmw_drift(const BmwParams& p, const Vector& x, const Vector& u) {
  const double steer = x(2), v = x(3), yaw = x(4), yaw_rate = x(5), slip = x(6);
  const double u1 = u(0), u2 = u(1);
  const double sat1 = std::clamp(u1, -p.steer_rate_max, p.steer_rate_max);
  const double sat2 = std::clamp(u2, -p.accel_max, p.accel_max);

  Vector rate = Vector::Zero(7);
  rate(2) = sat1;
  rate(3) = sat2;
  if (bmw_low_speed(x)) {
    const double c = std::cos(steer);
    rate(0) = v * std::cos(yaw);
    rate(1) = v * std::sin(yaw);
    rate(4) = v / p.l_wb * std::tan(steer);
    rate(5) = u2 / p.l_wb * std::tan(steer) + v / (p.l_wb * c * c) * u1;
    rate(6) = 0.0;
  } else {
    const double front = p.c_sf * (p.g * p.l_r - u2 * p.h_cg);
    const double rear = p.c_sr * (p.g * p.l_f + u2 * p.h_cg);
    const double wheelbase = p.l_r + p.l_f;
    rate(0) = v * std::cos(yaw + slip);
    rate(1) = v * std::sin(yaw + slip);
    rate(4) = yaw_rate;
    rate(5) = p.mu * p.mass / (p.i_z * wheelbase) *
              (p.l_f * front * steer + (p.l_r * rear - p.l_f * front) * slip -
               (p.l_f * p.l_f * front + p.l_r * p.l_r * rear) * yaw_rate / v);
    // Slip term sign as in the standard single-track benchmark model.
    rate(6) = p.mu / (v * wheelbase) *
                  (front * steer + (rear + front) * slip - (p.l_f * front - p.l_r * rear) * yaw_rate / v) -
              yaw_rate;
  }
  return x + p.tau * rate;
}

std::array<Eigen::Vector2d, 4> car_footprint(const Vector& x, double length, double width) {
  const Eigen::Vector2d center(x(0), x(1));
  const Eigen::Vector2d along(std::cos(x(4)), std::sin(x(4)));
  const Eigen::Vector2d across(-along.y(), along.x());
  const Eigen::Vector2d hl = 0.5 * length * along;
  const Eigen::Vector2d hw = 0.5 * width * across;
  return {center - hl - hw, center + hl - hw, center + hl + hw, center - hl + hw};
}

bool footprint_intersects(const Vector& x, double length, double width, const Rect& r) {
  const auto body = car_footprint(x, length, width);
  const std::array<Eigen::Vector2d, 4> box{Eigen::Vector2d(r.x_lo, r.y_lo), Eigen::Vector2d(r.x_hi, r.y_lo),
                                           Eigen::Vector2d(r.x_hi, r.y_hi), Eigen::Vector2d(r.x_lo, r.y_hi)};
  const std::array<Eigen::Vector2d, 4> axes{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), body[1] - body[0],
                                            body[3] - body[0]};
  for (const Eigen::Vector2d& axis : axes) {
    double b_lo = INFINITY, b_hi = -INFINITY, r_lo = INFINITY, r_hi = -INFINITY;
    for (const auto& p : body) {
      b_lo = std::min(b_lo, p.dot(axis));
      b_hi = std::max(b_hi, p.dot(axis));
    }
    for (const auto& p : box) {
      r_lo = std::min(r_lo, p.dot(axis));
      r_hi = std::max(r_hi, p.dot(axis));
    }
    if (b_hi < r_lo || r_hi < b_lo) return false;
  }
  return true;
}

SystemModel make_bmw(const BmwScenario& s, const BmwParams& p) {
  Vector lo(7), hi(7);
  lo << 0.0, 0.0, -0.18, 12.0, -0.5, -0.8, -0.1;
  hi << 84.0, 6.0, 0.18, 21.0, 0.5, 0.8, 0.1;

  auto inside_road = [&](const Rect& r) {
    return r.x_lo < r.x_hi && r.y_lo < r.y_hi && r.x_lo >= lo(0) && r.x_hi <= hi(0) && r.y_lo >= lo(1) &&
           r.y_hi <= hi(1);
  };
  if (!inside_road(s.obstacle) || !inside_road(s.goal)) throw ConfigError("bmw: goal/obstacle must lie on the road");
  if (s.obstacle.overlaps(s.goal)) throw ConfigError("bmw: goal and obstacle overlap");
  if (s.steer_levels < 1 || s.accel_levels < 1) throw ConfigError("bmw: input quantisation needs >= 1 level");

  auto levels = [](double max, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? 0.0 : -max + 2.0 * max * i / (n - 1));
    return v;
  };

  SystemModel m;
  m.name = "bmw";
  m.domain = {lo, hi};
  for (double u1 : levels(p.steer_rate_max, s.steer_levels)) {
    for (double u2 : levels(p.accel_max, s.accel_levels)) {
      Vector u(2);
      u << u1, u2;
      m.inputs.push_back(u);
    }
  }
  m.noise_scale = Vector::Constant(7, s.noise);
  m.ap = {"goal", "hit"};
  m.drift = [p](const Vector& x, const Vector& u) { return bmw_drift(p, x, u); };
  m.labeler = [s](const Vector& x) {
    Letter a = 0;
    if (footprint_intersects(x, s.car_length, s.car_width, s.goal)) a |= 1u;
    if (footprint_intersects(x, s.car_length, s.car_width, s.obstacle)) a |= 2u;
    return a;
  };
  m.validate();
  return m;
}

}  // namespace cosyn
