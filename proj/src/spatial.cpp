// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/spatial.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace mtdyn {

bool Transform::valid(double tol) const {
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(rotation.determinant() - 1.0) > tol) return false;
  return translation.allFinite();
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Mat36 gamma(const Vec3& x) {
  Mat36 g;
  g.leftCols<3>() = cross_matrix(x).transpose();
  g.rightCols<3>() = Mat3::Identity();
  return g;
}

Mat3 rotation_rate(const Mat3& R, const Vec3& omega) { return R * cross_matrix(omega); }

Transform compose(const Transform& a, const Transform& b) {
  Transform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Transform invert(const Transform& a) {
  Transform out;
  out.rotation = a.rotation.transpose();
  out.translation = -(a.rotation.transpose() * a.translation);
  return out;
}

Mat6 adjoint(const Transform& e) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = e.rotation;
  ad.bottomRightCorner<3, 3>() = e.rotation;
  ad.bottomLeftCorner<3, 3>() = cross_matrix(e.translation) * e.rotation;
  return ad;
}

Mat6 ad_twist(const Vec6& phi) {
  Mat6 m = Mat6::Zero();
  const Mat3 wx = cross_matrix(phi.head<3>());
  m.topLeftCorner<3, 3>() = wx;
  m.bottomRightCorner<3, 3>() = wx;
  m.bottomLeftCorner<3, 3>() = cross_matrix(phi.tail<3>());
  return m;
}

Mat3 so3_exp(const Vec3& w) {
  const double t = w.norm();
  const Mat3 wx = cross_matrix(w);
  if (t < 1e-10) {
    return Mat3::Identity() + wx + 0.5 * wx * wx;
  }
  return Mat3::Identity() + std::sin(t) / t * wx + (1.0 - std::cos(t)) / (t * t) * wx * wx;
}

Vec3 so3_log(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double t = std::acos(c);
  Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (t < 1e-8) {
    return 0.5 * axis;  // first-order: R ~ I + [w]
  }
  if (t > M_PI - 1e-6) {
    // Near pi the skew part degenerates; recover the axis from the symmetric part:
    // 0.5 (R + R^T) = c I + (1 - c) a a^T.
    const Mat3 s = 0.5 * (R + R.transpose()) - c * Mat3::Identity();
    Eigen::Vector3d sq = (s.diagonal().array() / (1.0 - c)).cwiseMax(0.0).sqrt();
    // The skew part may be tiny but still carries the sign information.
    for (int i = 0; i < 3; ++i)
      if (axis[i] < 0) sq[i] = -sq[i];
    return t * sq.normalized();
  }
  return t / (2.0 * std::sin(t)) * axis;
}

namespace {

// Series coefficients a(t) = (1 - cos t)/t^2 and b(t) = (t - sin t)/t^3 with
// their derivatives, stable near t = 0.
struct JrCoeffs {
  double a, b, da_dt, db_dt;
};

JrCoeffs jr_coeffs(double t) {
  JrCoeffs c{};
  if (t < 1e-4) {
    const double t2 = t * t;
    c.a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c.b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    c.da_dt = -t / 12.0 + t * t2 / 180.0;
    c.db_dt = -t / 60.0 + t * t2 / 1260.0;
  } else {
    const double t2 = t * t;
    c.a = (1.0 - std::cos(t)) / t2;
    c.b = (t - std::sin(t)) / (t2 * t);
    c.da_dt = std::sin(t) / t2 - 2.0 * (1.0 - std::cos(t)) / (t2 * t);
    c.db_dt = (1.0 - std::cos(t)) / (t2 * t) - 3.0 * (t - std::sin(t)) / (t2 * t2);
  }
  return c;
}

}  // namespace

Mat3 so3_right_jacobian(const Vec3& q) {
  const double t = q.norm();
  const JrCoeffs c = jr_coeffs(t);
  const Mat3 qx = cross_matrix(q);
  return Mat3::Identity() - c.a * qx + c.b * qx * qx;
}

Mat3 so3_right_jacobian_dot(const Vec3& q, const Vec3& qdot) {
  const double t = q.norm();
  const JrCoeffs c = jr_coeffs(t);
  const double tdot = (t > 1e-12) ? q.dot(qdot) / t : 0.0;
  const Mat3 qx = cross_matrix(q);
  const Mat3 qdx = cross_matrix(qdot);
  return -(c.da_dt * tdot) * qx - c.a * qdx + (c.db_dt * tdot) * qx * qx +
         c.b * (qdx * qx + qx * qdx);
}

Mat3 orthonormalized(const Mat3& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace mtdyn
