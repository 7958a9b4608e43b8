// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtdyn/spatial.hpp"
#include "test_util.hpp"

using namespace mtdyn;
using test::random_vec3;

TEST_CASE("cross_matrix basics") {
  CHECK(cross_matrix(Vec3::Zero()).isZero(0.0));
  CHECK((cross_matrix(Vec3(1, 0, 0)) * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() == 0.0);

  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_vec3(rng, 3.0);
    const Vec3 w = random_vec3(rng, 3.0);
    CHECK((cross_matrix(v) * w - v.cross(w)).norm() == 0.0);  // same arithmetic
    CHECK((cross_matrix(v).transpose() + cross_matrix(v)).norm() == 0.0);
  }
}

TEST_CASE("gamma point velocity") {
  const Vec6 tw = (Vec6() << 0.0, 1.0, 0.0, 0.0, 0.0, 0.0).finished();
  CHECK((gamma(Vec3(0, 0, 1)) * tw - Vec3(1, 0, 0)).norm() < 1e-15);

  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_vec3(rng);
    const Vec3 omega = random_vec3(rng);
    const Vec3 nu = random_vec3(rng);
    Vec6 phi;
    phi << omega, nu;
    CHECK(((gamma(x) * phi) - (omega.cross(x) + nu)).norm() == 0.0);
    // gamma(0) and pure translation degenerate to nu.
    CHECK(((gamma(Vec3::Zero()) * phi) - nu).norm() == 0.0);
  }
}

TEST_CASE("rotation_rate matches a rotating frame") {
  CHECK(rotation_rate(Mat3::Identity(), Vec3::Zero()).isZero(0.0));
  CHECK((rotation_rate(Mat3::Identity(), Vec3(0, 0, 1)) - cross_matrix(Vec3(0, 0, 1))).norm() ==
        0.0);

  // Central difference of R(t) = exp([w] t): O(h^2) accuracy.
  const Vec3 w(0.4, -0.2, 0.9);
  const double t = 0.7, h = 1e-5;
  const Mat3 fd = (so3_exp(w * (t + h)) - so3_exp(w * (t - h))) / (2.0 * h);
  const Mat3 analytic = rotation_rate(so3_exp(w * t), w);
  CHECK((fd - analytic).norm() < 1e-8);
}

TEST_CASE("transform compose/invert group laws") {
  Rng rng(13);
  const Transform id;
  for (int i = 0; i < 50; ++i) {
    const Transform a = test::random_transform(rng);
    const Transform b = test::random_transform(rng);
    const Transform c = test::random_transform(rng);
    const Transform ab_c = compose(compose(a, b), c);
    const Transform a_bc = compose(a, compose(b, c));
    CHECK((ab_c.rotation - a_bc.rotation).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ab_c.translation - a_bc.translation).cwiseAbs().maxCoeff() < 1e-12);

    const Transform e = compose(invert(a), a);
    CHECK((e.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(e.translation.cwiseAbs().maxCoeff() < 1e-12);

    const Transform ib = compose(id, b);
    CHECK((ib.rotation - b.rotation).norm() == 0.0);
    CHECK((ib.translation - b.translation).norm() == 0.0);
  }
  const Transform inv_id = invert(id);
  CHECK((inv_id.rotation - Mat3::Identity()).norm() == 0.0);
  CHECK(inv_id.translation.norm() == 0.0);
}

TEST_CASE("so3 exp/log round trip and right Jacobian") {
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    // Stay below the principal branch cut at |w| = pi.
    const Vec3 w = random_vec3(rng, 1.7);
    const Mat3 r = so3_exp(w);
    Transform t;
    t.rotation = r;
    CHECK(t.valid(1e-12));
    CHECK((so3_log(r) - w).norm() < 1e-9 * std::max(1.0, w.norm()));
  }
  for (int i = 0; i < 20; ++i) {
    // Beyond the cut the log is still a valid preimage.
    const Vec3 w = random_vec3(rng, 4.0);
    const Mat3 r = so3_exp(w);
    CHECK((so3_exp(so3_log(r)) - r).norm() < 1e-9);
  }

  // d/dt exp([q(t)]) = exp([q]) [Jr(q) qdot].
  for (int i = 0; i < 20; ++i) {
    const Vec3 q = random_vec3(rng, 1.5);
    const Vec3 qdot = random_vec3(rng, 1.0);
    const double h = 1e-6;
    const Mat3 fd = (so3_exp(q + h * qdot) - so3_exp(q - h * qdot)) / (2.0 * h);
    const Mat3 analytic = so3_exp(q) * cross_matrix(so3_right_jacobian(q) * qdot);
    CHECK((fd - analytic).norm() < 1e-8);

    // And the Jacobian rate itself.
    const Mat3 jr_fd =
        (so3_right_jacobian(q + h * qdot) - so3_right_jacobian(q - h * qdot)) / (2.0 * h);
    CHECK((jr_fd - so3_right_jacobian_dot(q, qdot)).norm() < 1e-8);
  }

  // Small-angle branch continuity.
  const Vec3 tiny(1e-6, -2e-6, 5e-7);
  CHECK((so3_right_jacobian(tiny) - Mat3::Identity()).norm() < 1e-5);
}

TEST_CASE("adjoint and twist bracket consistency") {
  Rng rng(15);
  for (int i = 0; i < 30; ++i) {
    const Transform e = test::random_transform(rng);
    const Vec6 phi = (Vec6() << random_vec3(rng), random_vec3(rng)).finished();
    // Transported twist must predict transported point velocities:
    // v_out(x_out) with x_out = E x_in.
    const Vec3 x_in = random_vec3(rng);
    const Vec6 phi_out = adjoint(e) * phi;
    const Vec3 v_in = gamma(x_in) * phi;
    const Vec3 v_out = gamma(e.apply(x_in)) * phi_out;
    CHECK((v_out - e.rotation * v_in).norm() < 1e-12);
  }
}
