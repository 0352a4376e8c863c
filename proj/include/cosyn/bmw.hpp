#pragma once

// Seven-state single-track vehicle model (BMW 320i parameters) with a
// reach-avoid labelling over the car body footprint.
//
// State: x1, x2 position; x3 steering angle; x4 heading velocity; x5 yaw
// angle; x6 yaw rate; x7 slip angle. Inputs: u1 steering velocity, u2
// longitudinal acceleration.

#include "cosyn/system.hpp"

#include <Eigen/Core>

#include <array>

namespace cosyn {

struct Rect {
  double x_lo, x_hi, y_lo, y_hi;

  bool overlaps(const Rect& o) const { return x_lo < o.x_hi && o.x_lo < x_hi && y_lo < o.y_hi && o.y_lo < y_hi; }
};

struct BmwParams {
  double tau = 0.001;
  double l_wb = 2.5789;
  double mass = 1093.3;
  double mu = 1.0489;
  double l_f = 1.156;
  double l_r = 1.422;
  double h_cg = 0.574;
  double i_z = 1791.6;
  double c_sf = 20.89;
  double c_sr = 20.89;
  double g = 9.81;
  double steer_rate_max = 0.4;
  double accel_max = 4.0;
};

struct BmwScenario {
  Rect obstacle{30.0, 34.0, 0.0, 3.0};
  Rect goal{44.0, 50.0, 3.0, 6.0};
  double car_length = 4.508;
  double car_width = 1.610;
  double noise = 0.5;
  int steer_levels = 5;
  int accel_levels = 5;
};

/// Branch predicate of the two-regime dynamics.
inline bool bmw_low_speed(const Vector& x) { return std::abs(x(3)) < 0.1; }

/// Noise-free successor.
Vector bmw_drift(const BmwParams& p, const Vector& x, const Vector& u);

/// Corners of the car body centred at (x1, x2) and rotated by the yaw x5,
/// counter-clockwise from rear-right.
std::array<Eigen::Vector2d, 4> car_footprint(const Vector& x, double length, double width);

/// Separating-axis test between the oriented car body and an axis-aligned
/// rectangle. Touching boundaries count as intersecting.
bool footprint_intersects(const Vector& x, double length, double width, const Rect& r);

/// AP = {goal, hit}. Throws ConfigError when goal and obstacle overlap or lie
/// outside the road.
SystemModel make_bmw(const BmwScenario& scenario = {}, const BmwParams& params = {});

}  // namespace cosyn
