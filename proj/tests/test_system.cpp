#include "oracles/geometry.hpp"

#include "cosyn/bmw.hpp"
#include "cosyn/system.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace cosyn;
using doctest::Approx;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

Vector bmw_state(double x1, double x2, double steer, double v, double yaw, double yaw_rate, double slip) {
  Vector x(7);
  x << x1, x2, steer, v, yaw, yaw_rate, slip;
  return x;
}

Vector bmw_input(double u1, double u2) {
  Vector u(2);
  u << u1, u2;
  return u;
}

}  // namespace

TEST_CASE("room step matches the affine hand computation") {
  const SystemModel room = make_room();
  CHECK(room.num_inputs() == 10);
  const Vector next = step(room, scalar(20.0), scalar(0.03), scalar(0.0));
  CHECK(next(0) == Approx(19.583).epsilon(1e-12));
  // Noise enters additively with coefficient 0.3162.
  CHECK(step(room, scalar(20.0), scalar(0.03), scalar(1.0))(0) == Approx(19.583 + 0.3162).epsilon(1e-12));
}

TEST_CASE("traffic step and coefficients") {
  const SystemModel traffic = make_traffic();
  CHECK(step(traffic, scalar(10.0), scalar(1.0), scalar(0.0))(0) == Approx(12.9).epsilon(1e-12));
  CHECK(step(traffic, scalar(0.0), scalar(0.0), scalar(0.0))(0) == Approx(3.0).epsilon(1e-12));
  REQUIRE(traffic.linear_gaussian.has_value());
  CHECK(traffic.linear_gaussian->a_upper(0, 0) == Approx(0.39).epsilon(1e-12));
}

TEST_CASE("Lipschitz constant of linear-Gaussian kernels") {
  CHECK(lipschitz_linear_gaussian(*make_room().linear_gaussian) == Approx(2.4678).epsilon(1e-4));
  CHECK(lipschitz_linear_gaussian(*make_traffic().linear_gaussian) == Approx(0.15963).epsilon(1e-4));
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(lipschitz_linear_gaussian(eye, Vector::Ones(2)) == Approx(1.59577).epsilon(1e-5));

  // Homogeneity in |a_ij| and 1 / sigma_i.
  Matrix a(2, 2);
  a << 0.3, -0.2, 0.1, 0.7;
  Vector sigma(2);
  sigma << 0.5, 1.5;
  const double h = lipschitz_linear_gaussian(a, sigma);
  CHECK(lipschitz_linear_gaussian(Matrix(2.0 * a), sigma) == Approx(2.0 * h));
  CHECK(lipschitz_linear_gaussian(a, Vector(2.0 * sigma)) == Approx(0.5 * h));
  CHECK_THROWS_AS(lipschitz_linear_gaussian(a, Vector::Zero(2)), ConfigError);
}

TEST_CASE("noise sampling is reproducible and steps are deterministic") {
  const SystemModel room = make_room();
  std::mt19937_64 r1(17), r2(17);
  for (int i = 0; i < 20; ++i) {
    const Vector w1 = sample_noise(room, r1), w2 = sample_noise(room, r2);
    CHECK(w1 == w2);
    CHECK(step(room, scalar(20.3), scalar(0.21), w1) == step(room, scalar(20.3), scalar(0.21), w2));
  }
}

TEST_CASE("labels and out-of-domain handling") {
  const SystemModel room = make_room();
  CHECK(room.label(scalar(20.0)) == 1u);
  CHECK(room.label(scalar(21.5)) == room.out_label);
  CHECK(room.out_label == 0u);
  // The raw successor is reported even outside the domain.
  CHECK(step(room, scalar(21.0), scalar(0.57), scalar(10.0))(0) > 21.0);
}

TEST_CASE("non-finite successors are numeric errors") {
  const SystemModel room = make_room();
  CHECK_THROWS_AS(step(room, scalar(std::numeric_limits<double>::infinity()), scalar(0.03), scalar(0.0)),
                  NumericError);
}

TEST_CASE("descriptor validation") {
  SystemModel m = make_room();
  m.inputs.clear();
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = make_room();
  m.noise_scale = scalar(0.0);
  CHECK_THROWS_AS(m.validate(), ConfigError);
  RoomParams p;
  p.lo = 22.0;
  CHECK_THROWS_AS(make_room(p), ConfigError);
}

TEST_CASE("BMW high-speed regime: straight driving advances x1 by tau * v") {
  const BmwParams p;
  const Vector x = bmw_state(5.0, 1.5, 0.0, 16.0, 0.0, 0.0, 0.0);
  const Vector next = bmw_drift(p, x, bmw_input(0.0, 0.0));
  CHECK(next(0) - x(0) == Approx(0.016).epsilon(1e-12));
  CHECK(next(1) == Approx(1.5));
  CHECK(next(4) == Approx(0.0));  // yaw update is the yaw rate, zero here
}

TEST_CASE("BMW low-speed regime") {
  const BmwParams p;
  CHECK(bmw_low_speed(bmw_state(0, 0, 0, 0.05, 0, 0, 0)));
  CHECK(bmw_low_speed(bmw_state(0, 0, 0, -0.0999, 0, 0, 0)));
  CHECK_FALSE(bmw_low_speed(bmw_state(0, 0, 0, 0.1, 0, 0, 0)));
  CHECK_FALSE(bmw_low_speed(bmw_state(0, 0, 0, -0.1, 0, 0, 0)));

  // Slip angle is frozen (a7 = 0) and the kinematic yaw update applies.
  const Vector x = bmw_state(1.0, 2.0, 0.1, 0.05, 0.3, 0.2, 0.04);
  const Vector u = bmw_input(0.2, 1.0);
  const Vector next = bmw_drift(p, x, u);
  CHECK(next(6) == x(6));
  CHECK(next(4) - x(4) == Approx(p.tau * 0.05 / p.l_wb * std::tan(0.1)).epsilon(1e-12));
  CHECK(next(0) - x(0) == Approx(p.tau * 0.05 * std::cos(0.3)).epsilon(1e-12));
  const double a6 = 1.0 / p.l_wb * std::tan(0.1) + 0.05 / (p.l_wb * std::cos(0.1) * std::cos(0.1)) * 0.2;
  CHECK(next(5) - x(5) == Approx(p.tau * a6).epsilon(1e-12));

  // Zero steering angle leaves the yaw untouched even at speed.
  CHECK(bmw_drift(p, bmw_state(0, 0, 0.0, 0.05, 0.2, 0, 0), u)(4) == Approx(0.2));
}

TEST_CASE("BMW inputs saturate by clamping") {
  const BmwParams p;
  const Vector x = bmw_state(5.0, 1.5, 0.0, 16.0, 0.0, 0.0, 0.0);
  const Vector fast = bmw_drift(p, x, bmw_input(5.0, 50.0));
  CHECK(fast(2) == Approx(p.tau * 0.4));
  CHECK(fast(3) == Approx(16.0 + p.tau * 4.0));
  const Vector slow = bmw_drift(p, x, bmw_input(-5.0, -50.0));
  CHECK(slow(2) == Approx(-p.tau * 0.4));
  CHECK(slow(3) == Approx(16.0 - p.tau * 4.0));
}

TEST_CASE("BMW scenario: inputs, domain and labels") {
  const SystemModel bmw = make_bmw();
  CHECK(bmw.dim() == 7);
  CHECK(bmw.num_inputs() == 25);
  CHECK(bmw.noise_scale == Vector::Constant(7, 0.5));
  CHECK(bmw.ap == std::vector<std::string>{"goal", "hit"});

  Vector x = bmw_state(5.0, 1.5, 0.0, 16.0, 0.0, 0.0, 0.0);
  CHECK(bmw.label(x) == 0u);
  x(0) = 32.0;
  CHECK(bmw.label(x) == 2u);  // on the obstacle
  x(0) = 47.0;
  x(1) = 4.5;
  CHECK(bmw.label(x) == 1u);  // in the goal
  // The body reaches the obstacle before its centre does.
  x(0) = 30.0 - 4.508 / 2 + 0.01;
  x(1) = 1.5;
  CHECK(bmw.label(x) == 2u);
  x(0) = 30.0 - 4.508 / 2 - 0.01;
  CHECK(bmw.label(x) == 0u);

  BmwScenario overlapping;
  overlapping.goal = overlapping.obstacle;
  CHECK_THROWS_AS(make_bmw(overlapping), ConfigError);
}

TEST_CASE("BMW footprint intersection agrees with a polygon oracle") {
  const BmwScenario s;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> px(25.0, 40.0), py(-2.0, 5.0), yaw(-3.2, 3.2);
  int agree = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vector x = bmw_state(px(rng), py(rng), 0.0, 16.0, yaw(rng), 0.0, 0.0);
    const auto body = oracle::car_corners(x(0), x(1), x(4), s.car_length, s.car_width);
    const auto& r = s.obstacle;
    const bool want = oracle::polygons_intersect(body, oracle::box_corners(r.x_lo, r.x_hi, r.y_lo, r.y_hi));
    agree += footprint_intersects(x, s.car_length, s.car_width, r) == want;
  }
  CHECK(agree == 2000);
}
