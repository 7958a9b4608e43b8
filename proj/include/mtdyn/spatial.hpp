// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mtdyn/types.hpp"

namespace mtdyn {

// Rigid transform: x_out = rotation * x_in + translation.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return Transform{}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  // Check rotation orthonormality and det = +1.
  bool valid(double tol = 1e-12) const;
};

// Body-frame spatial velocity, rotation stacked first.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 nu = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 v;
    v << omega, nu;
    return v;
  }
  static Twist from(const Vec6& v) { return Twist{v.head<3>(), v.tail<3>()}; }
};

// Skew matrix [v] with [v]*w = v x w.
Mat3 cross_matrix(const Vec3& v);

// Point-velocity matrix: gamma(x)*(omega, nu) = omega x x + nu, for a body-fixed
// point x expressed in the body frame.
Mat36 gamma(const Vec3& x);

// Rdot = R*[omega] for body-frame angular velocity.
Mat3 rotation_rate(const Mat3& R, const Vec3& omega);

Transform compose(const Transform& a, const Transform& b);
Transform invert(const Transform& a);

// Twist change of coordinates: phi_out = adjoint(E) * phi_in where E maps
// in-frame point coordinates to out-frame point coordinates.
Mat6 adjoint(const Transform& e);

// Twist Lie bracket matrix: ad(phi1)*phi2 = (w1 x w2, w1 x v2 + v1 x w2).
Mat6 ad_twist(const Vec6& phi);

// SO(3) exponential map and its principal log.
Mat3 so3_exp(const Vec3& w);
Vec3 so3_log(const Mat3& R);

// Right Jacobian of the exponential map: d/dt exp([q]) = exp([q]) [Jr(q) qdot].
Mat3 so3_right_jacobian(const Vec3& q);
// Time derivative of the right Jacobian along qdot.
Mat3 so3_right_jacobian_dot(const Vec3& q, const Vec3& qdot);

// Nearest rotation matrix (polar projection via quaternion round trip).
Mat3 orthonormalized(const Mat3& R);

}  // namespace mtdyn
