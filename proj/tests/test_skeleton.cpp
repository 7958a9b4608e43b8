// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtdyn/skeleton.hpp"
#include "test_util.hpp"

using namespace mtdyn;

namespace {

// FD oracle for one Jacobian column: body pose sensitivity in body coords,
// log-map for the rotation part.
MatX fd_jacobian_mr(const Skeleton& skel, const State& st, double h) {
  const int n = skel.body_count();
  MatX j(6 * n, skel.dof());
  for (int d = 0; d < skel.dof(); ++d) {
    State sp = st, sm = st;
    sp.q[d] += h;
    sm.q[d] -= h;
    const auto wp = skel.forward_kinematics(sp);
    const auto wm = skel.forward_kinematics(sm);
    const auto w0 = skel.forward_kinematics(st);
    for (int b = 0; b < n; ++b) {
      const Vec3 dw = so3_log(wm[b].rotation.transpose() * wp[b].rotation) / (2.0 * h);
      const Vec3 dv =
          w0[b].rotation.transpose() * (wp[b].translation - wm[b].translation) / (2.0 * h);
      j.block<3, 1>(6 * b, d) = dw;
      j.block<3, 1>(6 * b + 3, d) = dv;
    }
  }
  return j;
}

}  // namespace

TEST_CASE("forward kinematics rest pose and single joint") {
  Skeleton chain = test::make_chain3();
  State st = chain.make_state();
  const auto world = chain.forward_kinematics(st);
  // At q = 0 each body frame sits at the chain composition (COM-shifted).
  CHECK((world[0].translation - Vec3(0.125, 0.0, 0.0)).norm() < 1e-15);
  CHECK((world[1].translation - Vec3(0.375, 0.0, 0.01)).norm() < 1e-15);
  CHECK((world[2].translation - Vec3(0.625, 0.0, 0.02)).norm() < 1e-15);

  // Single revolute joint rotated by pi/2 about its axis.
  st.q[0] = M_PI / 2.0;
  const auto w2 = chain.forward_kinematics(st);
  CHECK((w2[0].rotation - so3_exp(Vec3(0.0, M_PI / 2.0, 0.0))).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("forward kinematics against hand-composed chain") {
  Skeleton chain = test::make_chain3();
  Rng rng(21);
  for (int it = 0; it < 10; ++it) {
    State st = test::random_state(chain, rng);
    const auto world = chain.forward_kinematics(st);
    // Independent composition of the same chain, COM shift last.
    Transform w;
    for (int i = 0; i < 3; ++i) {
      Transform rest;
      rest.translation = (i == 0) ? Vec3::Zero() : Vec3(0.25, 0.0, 0.0);
      // Undo the previous body's COM shift, then joint motion.
      Transform undo;
      undo.translation = (i == 0) ? Vec3(Vec3::Zero()) : Vec3(-chain.body(i - 1).com_offset);
      Transform rot;
      rot.rotation = so3_exp(Vec3::UnitY() * st.q[i]);
      w = compose(compose(compose(w, undo), rest), rot);
      Transform shift;
      shift.translation = chain.body(i).com_offset;
      const Transform frame = compose(w, shift);
      CHECK((frame.translation - world[i].translation).norm() < 1e-13);
      CHECK((frame.rotation - world[i].rotation).norm() < 1e-13);
      w = frame;
    }
  }
}

TEST_CASE("state dimension mismatch is a configuration error") {
  Skeleton chain = test::make_chain3();
  State st = chain.make_state();
  st.q = VecX::Zero(2);
  CHECK_THROWS_AS(chain.forward_kinematics(st), ConfigError);
}

TEST_CASE("jacobian_mr basics") {
  Skeleton chain = test::make_chain3();
  Rng rng(22);
  State st = test::random_state(chain, rng);
  st.qdot.setZero();
  const auto twists = chain.body_twists(st);
  for (const Vec6& t : twists) CHECK(t.norm() == 0.0);

  // Single revolute about z with the frame at the joint: twist = (axis, 0).
  std::vector<Body> bodies(1);
  bodies[0].name = "b";
  bodies[0].mass = 1.0;
  bodies[0].inertia = Mat3::Identity();
  std::vector<Joint> joints(1);
  joints[0].kind = JointKind::Revolute;
  joints[0].axis = Vec3::UnitZ();
  Skeleton single(std::move(bodies), std::move(joints));
  State s1 = single.make_state();
  s1.qdot[0] = 1.0;
  const MatX j = single.jacobian_mr(s1);
  Vec6 expect;
  expect << 0, 0, 1, 0, 0, 0;
  CHECK((j * s1.qdot - expect).norm() < 1e-15);
}

TEST_CASE("jacobian_mr matches pose finite differences") {
  Rng rng(23);
  for (Skeleton skel : {test::make_chain3(), test::make_mixed_chain()}) {
    for (int it = 0; it < 10; ++it) {
      State st = test::random_state(skel, rng);
      const MatX j = skel.jacobian_mr(st);
      const MatX fd = fd_jacobian_mr(skel, st, 1e-6);
      CHECK(test::rel_err(j, fd) < 1e-6);
      // Twist recursion agrees with J * qdot.
      const auto twists = skel.body_twists(st);
      VecX stacked(6 * skel.body_count());
      for (int b = 0; b < skel.body_count(); ++b) stacked.segment<6>(6 * b) = twists[b];
      CHECK((j * st.qdot - stacked).norm() < 1e-12);
    }
  }
}

TEST_CASE("jacobian_mr_dot matches finite differences in time") {
  Rng rng(24);
  // Single revolute joint: its own body-frame column is constant.
  {
    std::vector<Body> bodies(1);
    bodies[0].name = "b";
    bodies[0].mass = 1.0;
    bodies[0].inertia = Mat3::Identity();
    std::vector<Joint> joints(1);
    joints[0].kind = JointKind::Revolute;
    joints[0].axis = Vec3::UnitY();
    Skeleton single(std::move(bodies), std::move(joints));
    State st = single.make_state();
    st.q[0] = 0.3;
    st.qdot[0] = 2.0;
    CHECK(single.jacobian_mr_dot(st).norm() == 0.0);
  }

  for (Skeleton skel : {test::make_chain3(), test::make_mixed_chain()}) {
    for (int it = 0; it < 50; ++it) {
      State st = test::random_state(skel, rng);
      const MatX jdot = skel.jacobian_mr_dot(st);
      const double h = 1e-6;
      State sp = st, sm = st;
      sp.q += h * st.qdot;
      sm.q -= h * st.qdot;
      const MatX fd = (skel.jacobian_mr(sp) - skel.jacobian_mr(sm)) / (2.0 * h);
      CHECK(test::rel_err(jdot, fd) < 1e-5);
    }
    State rest = skel.make_state();
    CHECK(skel.jacobian_mr_dot(rest).norm() == 0.0);
  }
}

TEST_CASE("body_forces gravity and zero cases") {
  Skeleton chain = test::make_chain3();
  State st = chain.make_state();
  auto kin = chain.kinematics(st);
  const VecX zero_f = chain.body_forces(kin, Vec3::Zero());
  CHECK(zero_f.norm() == 0.0);

  st.q[0] = 0.7;
  kin = chain.kinematics(st);
  const Vec3 g(0.0, 0.0, -9.81);
  const VecX f = chain.body_forces(kin, g);
  for (int b = 0; b < 3; ++b) {
    const Vec3 torque = f.segment<3>(6 * b);
    const Vec3 force = f.segment<3>(6 * b + 3);
    CHECK(torque.norm() < 1e-14);  // COM at frame origin
    CHECK((force - kin.world[b].rotation.transpose() * (chain.body(b).mass * g)).norm() < 1e-14);
  }
}

TEST_CASE("rebase preserves pose and angular velocity") {
  Skeleton skel = test::make_mixed_chain();
  Rng rng(25);
  State st = test::random_state(skel, rng);
  const auto world_before = skel.forward_kinematics(st);
  const auto twists_before = skel.body_twists(st);
  skel.rebase(st);
  const auto world_after = skel.forward_kinematics(st);
  const auto twists_after = skel.body_twists(st);
  for (int b = 0; b < skel.body_count(); ++b) {
    CHECK((world_before[b].rotation - world_after[b].rotation).norm() < 1e-12);
    CHECK((world_before[b].translation - world_after[b].translation).norm() < 1e-12);
    CHECK((twists_before[b] - twists_after[b]).norm() < 1e-11);
  }
}
