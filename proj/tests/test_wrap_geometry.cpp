// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtdyn/rng.hpp"
#include "mtdyn/wrap_geometry.hpp"
#include "test_util.hpp"

using namespace mtdyn;

namespace {

// Independent oracle: projected relaxation of a dense polyline kept outside
// the cylinder, seeded through a waypoint on the wrap side so the homotopy
// class matches the requested tangent family.
double relaxed_path_length(const Vec3& ori, const Vec3& ins, double radius, int side,
                           int iters = 20000, int n_nodes = 200) {
  Vec3 mid = 0.5 * (ori + ins);
  Eigen::Vector2d dir = mid.head<2>();
  if (dir.norm() < 1e-9) {
    const Eigen::Vector2d chord = (ins - ori).head<2>().normalized();
    dir = Eigen::Vector2d(-chord.y(), chord.x()) * (side > 0 ? -1.0 : 1.0);
  }
  dir.normalize();
  mid.head<2>() = 1.5 * radius * dir;
  std::vector<Vec3> x(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double t = double(i) / (n_nodes - 1);
    x[i] = (t < 0.5) ? Vec3(ori + 2 * t * (mid - ori)) : Vec3(mid + (2 * t - 1) * (ins - mid));
  }
  for (int it = 0; it < iters; ++it) {
    for (int i = 1; i + 1 < n_nodes; ++i) {
      x[i] = 0.5 * (x[i - 1] + x[i + 1]);
      const double rho = x[i].head<2>().norm();
      if (rho < radius) x[i].head<2>() *= radius / std::max(rho, 1e-12);
    }
  }
  double len = 0.0;
  for (int i = 1; i < n_nodes; ++i) len += (x[i] - x[i - 1]).norm();
  return len;
}

}  // namespace

TEST_CASE("straight path when the chord clears the cylinder") {
  const double r = 0.5;
  const Vec3 ori(-2 * r, 2 * r, 0.0), ins(2 * r, 2 * r, 0.0);
  const auto w = analytic_wrap(ori, ins, r, +1, 0.25);
  CHECK(!w.wrapped);
  CHECK(w.wrapped_len == 0.0);
  CHECK(w.total_len == doctest::Approx((ins - ori).norm()).epsilon(1e-15));
  CHECK((w.x_alpha - (ori + 0.25 * (ins - ori))).norm() < 1e-15);
}

TEST_CASE("mirror-symmetric wrap puts the midpoint on the symmetry plane") {
  for (const int side : {+1, -1}) {
    for (const double h : {0.0, 0.4, 1.2}) {
      const double r = 1.0;
      const Vec3 ori(-2.0, 0.0, -h), ins(2.0, 0.0, h);
      const auto w = analytic_wrap(ori, ins, r, side, 0.5);
      REQUIRE(w.wrapped);
      CHECK(std::abs(w.x_alpha.x()) < 1e-12);
      CHECK(w.x_alpha.head<2>().norm() == doctest::Approx(r).epsilon(1e-12));
      CHECK(w.x_alpha.z() == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("wrapped length against the discretized shortest-path oracle") {
  Rng rng(41);
  int checked = 0;
  while (checked < 5) {
    const double r = rng.uniform(0.4, 1.0);
    const Vec3 ori(rng.uniform(-3.0, -1.8), rng.uniform(-0.7, 0.7), rng.uniform(-0.5, 0.5));
    const Vec3 ins(rng.uniform(1.8, 3.0), rng.uniform(-0.7, 0.7), rng.uniform(-0.5, 0.5));
    const auto w = analytic_wrap(ori, ins, r, +1, 0.5);
    if (!w.wrapped) continue;
    ++checked;
    const double oracle = relaxed_path_length(ori, ins, r, +1);
    CHECK(std::abs(w.total_len - oracle) / oracle < 1e-3);
  }
}

TEST_CASE("tangent points are a local minimum of the path length") {
  Rng rng(42);
  int checked = 0;
  while (checked < 10) {
    const double r = rng.uniform(0.3, 1.0);
    const Vec3 ori(rng.uniform(-3.0, -1.5), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const Vec3 ins(rng.uniform(1.5, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const int side = (rng.uniform() < 0.5) ? 1 : -1;
    const auto w = analytic_wrap(ori, ins, r, side, 0.3);
    if (!w.wrapped) continue;
    ++checked;
    const double base =
        wrap_path_length_via(ori, ins, r, side, w.theta1, w.z1, w.theta2, w.z2);
    CHECK(base == doctest::Approx(w.total_len).epsilon(1e-10));
    const double d = 1e-4;
    for (int k = 0; k < 4; ++k) {
      for (const double sgn : {-1.0, 1.0}) {
        double t1 = w.theta1, zz1 = w.z1, t2 = w.theta2, zz2 = w.z2;
        (k == 0 ? t1 : k == 1 ? zz1 : k == 2 ? t2 : zz2) += sgn * d;
        CHECK(wrap_path_length_via(ori, ins, r, side, t1, zz1, t2, zz2) >= base - 1e-12);
      }
    }
  }
}

TEST_CASE("x_alpha parameterizes arclength consistently") {
  // Walking alpha in equal increments must advance arclength uniformly.
  const Vec3 ori(-2.0, -0.3, -0.4), ins(2.2, 0.1, 0.7);
  const double r = 0.8;
  const auto w_full = analytic_wrap(ori, ins, r, +1, 1.0);
  REQUIRE(w_full.wrapped);
  double accum = 0.0;
  Vec3 prev = analytic_wrap(ori, ins, r, +1, 0.0).x_alpha;
  CHECK((prev - ori).norm() < 1e-14);
  const int n = 2000;
  for (int i = 1; i <= n; ++i) {
    const Vec3 cur = analytic_wrap(ori, ins, r, +1, double(i) / n).x_alpha;
    accum += (cur - prev).norm();
    prev = cur;
  }
  CHECK((prev - ins).norm() < 1e-12);
  // The dense chord length reproduces the total length.
  CHECK(std::abs(accum - w_full.total_len) / w_full.total_len < 1e-5);
}

TEST_CASE("wrap input validation") {
  CHECK_THROWS_AS(analytic_wrap(Vec3(0.1, 0.0, 0.0), Vec3(2, 0, 0), 0.5, 1, 0.5), GeometryError);
  CHECK_THROWS_AS(analytic_wrap(Vec3(-2, 0, 0), Vec3(2, 0.1, 0), 0.5, 1, 1.5), ConfigError);
  CHECK_THROWS_AS(analytic_wrap(Vec3(-2, 0, 0), Vec3(2, 0.1, 0), -0.5, 1, 0.5), ConfigError);
  CHECK_THROWS_AS(analytic_wrap(Vec3(-2, 0, 0), Vec3(2, 0.1, 0), 0.5, 2, 0.5), ConfigError);
}

TEST_CASE("attach-detach transition is continuous in position") {
  // Slide the chord across tangency on the wrap side; the path (and x_alpha)
  // must not jump, only its derivative.
  const double r = 1.0;
  for (const double alpha : {0.25, 0.5, 0.75}) {
    Vec3 prev;
    bool first = true;
    for (double h = -1.2; h < -0.8; h += 1e-3) {
      const auto w = analytic_wrap(Vec3(-2.0, h, 0.0), Vec3(2.0, h, 0.1), r, +1, alpha);
      if (!first) CHECK((w.x_alpha - prev).norm() < 5e-3);
      prev = w.x_alpha;
      first = false;
    }
  }
}
