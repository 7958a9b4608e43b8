// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/skeleton.hpp"

#include <cmath>

namespace mtdyn {

namespace {

Transform joint_motion(const Joint& j, const Mat3& ref, const double* q) {
  Transform t;
  switch (j.kind) {
    case JointKind::Revolute:
      t.rotation = so3_exp(j.axis * q[0]);
      break;
    case JointKind::Spherical:
      t.rotation = ref * so3_exp(Vec3(q[0], q[1], q[2]));
      break;
    case JointKind::Fixed:
      break;
  }
  return t;
}

}  // namespace

Skeleton::Skeleton(std::vector<Body> bodies, std::vector<Joint> joints)
    : bodies_(std::move(bodies)), joints_(std::move(joints)) {
  if (bodies_.size() != joints_.size())
    throw ConfigError("skeleton: need exactly one joint per body");
  const int n = static_cast<int>(bodies_.size());
  joint_offset_.resize(n);
  internal_.resize(n);
  base_inertia_.resize(n);
  for (int i = 0; i < n; ++i) {
    const Joint& j = joints_[i];
    if (j.parent >= i) throw ConfigError("skeleton: bodies must be in topological order (joint " + std::to_string(i) + ")");
    if (j.parent < -1 || j.parent >= n) throw ConfigError("skeleton: bad parent index");
    if (j.kind == JointKind::Revolute && std::abs(j.axis.norm() - 1.0) > 1e-12)
      throw ConfigError("skeleton: revolute axis of joint " + std::to_string(i) + " must be unit length");
    if (!j.rest.valid(1e-9)) throw ConfigError("skeleton: invalid rest transform on joint " + std::to_string(i));
    const Body& b = bodies_[i];
    if (b.mass < 0.0) throw ConfigError("skeleton: negative mass on body " + b.name);
    if ((b.inertia - b.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ConfigError("skeleton: inertia of body " + b.name + " must be symmetric");
    joint_offset_[i] = dof_;
    dof_ += joint_dof(i);

    // Shift every body frame to its COM so spatial inertias are block-diagonal.
    const Vec3 parent_com = (j.parent >= 0) ? bodies_[j.parent].com_offset : Vec3::Zero();
    Transform pre;
    pre.translation = -parent_com;
    internal_[i].pre = compose(pre, j.rest);
    internal_[i].post_shift = b.com_offset;

    Mat6 m = Mat6::Zero();
    m.topLeftCorner<3, 3>() = b.inertia;
    m.bottomRightCorner<3, 3>() = b.mass * Mat3::Identity();
    for (const PointMass& pm : b.point_masses) {
      const Mat36 g = gamma(to_internal(i, pm.local));
      m += pm.mass * g.transpose() * g;
    }
    base_inertia_[i] = m;
  }
}

int Skeleton::joint_dof(int j) const {
  switch (joints_[j].kind) {
    case JointKind::Revolute: return 1;
    case JointKind::Spherical: return 3;
    case JointKind::Fixed: return 0;
  }
  return 0;
}

int Skeleton::body_index(const std::string& name) const {
  for (int i = 0; i < body_count(); ++i)
    if (bodies_[i].name == name) return i;
  return -1;
}

State Skeleton::make_state() const {
  State st;
  st.q = VecX::Zero(dof_);
  st.qdot = VecX::Zero(dof_);
  st.joint_ref.assign(bodies_.size(), Mat3::Identity());
  return st;
}

void Skeleton::check_state(const State& st) const {
  if (st.q.size() != dof_ || st.qdot.size() != dof_)
    throw ConfigError("state dimension mismatch: expected " + std::to_string(dof_) + " dofs, got q=" +
                      std::to_string(st.q.size()) + " qdot=" + std::to_string(st.qdot.size()));
  if (st.joint_ref.size() != bodies_.size())
    throw ConfigError("state joint_ref size mismatch");
}

std::vector<Transform> Skeleton::forward_kinematics(const State& st) const {
  check_state(st);
  const int n = body_count();
  std::vector<Transform> world(n);
  for (int i = 0; i < n; ++i) {
    const Joint& j = joints_[i];
    const Transform parent = (j.parent >= 0) ? world[j.parent] : Transform::identity();
    Transform motion = joint_motion(j, st.joint_ref[i], st.q.data() + joint_offset_[i]);
    Transform w = compose(compose(parent, internal_[i].pre), motion);
    w.translation += w.rotation * internal_[i].post_shift;
    world[i] = w;
  }
  return world;
}

BodyKinematics Skeleton::kinematics(const State& st) const {
  BodyKinematics kin;
  kin.world = forward_kinematics(st);
  const int n = body_count();
  kin.twist.resize(n);
  for (int i = 0; i < n; ++i) {
    const Joint& j = joints_[i];
    Vec6 phi = Vec6::Zero();
    if (j.parent >= 0) {
      const Transform x_ip = compose(invert(kin.world[i]), kin.world[j.parent]);
      phi = adjoint(x_ip) * kin.twist[j.parent];
    }
    const int off = joint_offset_[i];
    const Vec3 c = internal_[i].post_shift;
    if (j.kind == JointKind::Revolute) {
      const Vec3 w = j.axis * st.qdot[off];
      phi.head<3>() += w;
      phi.tail<3>() += -c.cross(w);
    } else if (j.kind == JointKind::Spherical) {
      const Vec3 w = so3_right_jacobian(st.q.segment<3>(off)) * st.qdot.segment<3>(off);
      phi.head<3>() += w;
      phi.tail<3>() += -c.cross(w);
    }
    kin.twist[i] = phi;
  }
  return kin;
}

std::vector<Vec6> Skeleton::body_twists(const State& st) const { return kinematics(st).twist; }

MatX Skeleton::jacobian_mr(const State& st) const {
  check_state(st);
  const auto world = forward_kinematics(st);
  const int n = body_count();
  MatX j_mr = MatX::Zero(6 * n, dof_);
  for (int i = 0; i < n; ++i) {
    const Joint& j = joints_[i];
    if (j.parent >= 0) {
      const Mat6 x = adjoint(compose(invert(world[i]), world[j.parent]));
      j_mr.middleRows<6>(6 * i) = x * j_mr.middleRows<6>(6 * j.parent);
    }
    const int off = joint_offset_[i];
    const Mat3 cx = cross_matrix(internal_[i].post_shift);
    if (j.kind == JointKind::Revolute) {
      j_mr.block<3, 1>(6 * i, off) = j.axis;
      j_mr.block<3, 1>(6 * i + 3, off) = -cx * j.axis;
    } else if (j.kind == JointKind::Spherical) {
      const Mat3 jr = so3_right_jacobian(st.q.segment<3>(off));
      j_mr.block<3, 3>(6 * i, off) = jr;
      j_mr.block<3, 3>(6 * i + 3, off) = -cx * jr;
    }
  }
  return j_mr;
}

MatX Skeleton::jacobian_mr_dot(const State& st) const {
  // Recursive product rule: for J_i = X J_p + S_i,
  //   Jdot_i = (X ad(phi_p) - ad(phi_i) X) J_p + X Jdot_p + Sdot_i.
  check_state(st);
  const BodyKinematics kin = kinematics(st);
  const int n = body_count();
  MatX j = MatX::Zero(6 * n, dof_);
  MatX jdot = MatX::Zero(6 * n, dof_);
  for (int i = 0; i < n; ++i) {
    const Joint& jt = joints_[i];
    if (jt.parent >= 0) {
      const int p = jt.parent;
      const Mat6 x = adjoint(compose(invert(kin.world[i]), kin.world[p]));
      const Mat6 xdot = x * ad_twist(kin.twist[p]) - ad_twist(kin.twist[i]) * x;
      j.middleRows<6>(6 * i) = x * j.middleRows<6>(6 * p);
      jdot.middleRows<6>(6 * i) = xdot * j.middleRows<6>(6 * p) + x * jdot.middleRows<6>(6 * p);
    }
    const int off = joint_offset_[i];
    const Mat3 cx = cross_matrix(internal_[i].post_shift);
    if (jt.kind == JointKind::Revolute) {
      j.block<3, 1>(6 * i, off) += jt.axis;
      j.block<3, 1>(6 * i + 3, off) += -cx * jt.axis;
    } else if (jt.kind == JointKind::Spherical) {
      const Mat3 jr = so3_right_jacobian(st.q.segment<3>(off));
      const Mat3 jr_dot = so3_right_jacobian_dot(st.q.segment<3>(off), st.qdot.segment<3>(off));
      j.block<3, 3>(6 * i, off) += jr;
      j.block<3, 3>(6 * i + 3, off) += -cx * jr;
      jdot.block<3, 3>(6 * i, off) += jr_dot;
      jdot.block<3, 3>(6 * i + 3, off) += -cx * jr_dot;
    }
  }
  return jdot;
}

Mat6 Skeleton::spatial_inertia(int i, const std::vector<PointMass>& extra_internal) const {
  Mat6 m = base_inertia_[i];
  for (const PointMass& pm : extra_internal) {
    const Mat36 g = gamma(pm.local);
    m += pm.mass * g.transpose() * g;
  }
  return m;
}

VecX Skeleton::body_forces(const BodyKinematics& kin, const Vec3& gravity,
                           const std::vector<Mat6>& inertia_override,
                           const std::vector<std::vector<PointMass>>& extra_internal) const {
  const int n = body_count();
  VecX f = VecX::Zero(6 * n);
  for (int i = 0; i < n; ++i) {
    const Mat3 rt = kin.world[i].rotation.transpose();
    const Vec3 g_body = rt * gravity;
    Vec6 w = Vec6::Zero();
    w.tail<3>() = bodies_[i].mass * g_body;
    for (const PointMass& pm : bodies_[i].point_masses)
      w += gamma(to_internal(i, pm.local)).transpose() * (pm.mass * g_body);
    if (!extra_internal.empty())
      for (const PointMass& pm : extra_internal[i])
        w += gamma(pm.local).transpose() * (pm.mass * g_body);
    const Mat6& m = inertia_override.empty() ? base_inertia_[i] : inertia_override[i];
    w += ad_twist(kin.twist[i]).transpose() * (m * kin.twist[i]);
    f.segment<6>(6 * i) = w;
  }
  return f;
}

double Skeleton::potential_energy(const std::vector<Transform>& world, const Vec3& gravity,
                                  const std::vector<std::vector<PointMass>>& extra_internal) const {
  double e = 0.0;
  for (int i = 0; i < body_count(); ++i) {
    e -= bodies_[i].mass * gravity.dot(world[i].translation);
    for (const PointMass& pm : bodies_[i].point_masses)
      e -= pm.mass * gravity.dot(world[i].apply(to_internal(i, pm.local)));
    if (!extra_internal.empty())
      for (const PointMass& pm : extra_internal[i])
        e -= pm.mass * gravity.dot(world[i].apply(pm.local));
  }
  return e;
}

void Skeleton::rebase(State& st) const {
  check_state(st);
  for (int i = 0; i < body_count(); ++i) {
    if (joints_[i].kind != JointKind::Spherical) continue;
    const int off = joint_offset_[i];
    const Vec3 q = st.q.segment<3>(off);
    st.joint_ref[i] = orthonormalized(st.joint_ref[i] * so3_exp(q));
    // omega = Jr(q) qdot must be preserved; at q = 0 the map is the identity.
    st.qdot.segment<3>(off) = so3_right_jacobian(q) * st.qdot.segment<3>(off);
    st.q.segment<3>(off).setZero();
  }
}

VecX Skeleton::damping_vector() const {
  VecX d = VecX::Zero(dof_);
  for (int i = 0; i < body_count(); ++i)
    d.segment(joint_offset_[i], joint_dof(i)).setConstant(joints_[i].damping);
  return d;
}

}  // namespace mtdyn
