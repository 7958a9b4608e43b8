// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/wrap_geometry.hpp"

#include <cmath>

namespace mtdyn {

namespace {

double mod_2pi(double a) {
  const double two_pi = 2.0 * M_PI;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

// Distance from the origin to the 2D segment p-q.
double segment_distance_to_origin(const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d d = q - p;
  const double len2 = d.squaredNorm();
  double t = (len2 > 0.0) ? std::clamp(-p.dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p + t * d).norm();
}

}  // namespace

WrapResult analytic_wrap(const Vec3& ori_s, const Vec3& ins_s, double radius, int side,
                         double alpha) {
  if (radius <= 0.0) throw ConfigError("wrap radius must be positive");
  if (side != 1 && side != -1) throw ConfigError("wrap side must be +1 or -1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");

  const Eigen::Vector2d p = ori_s.head<2>();
  const Eigen::Vector2d q = ins_s.head<2>();
  const double dp = p.norm();
  const double dq = q.norm();
  if (dp <= radius || dq <= radius)
    throw GeometryError("wrap endpoint lies inside or on the cylinder");

  WrapResult out;

  const double gamma_p = std::acos(radius / dp);
  const double gamma_q = std::acos(radius / dq);
  const double ang_p = std::atan2(p.y(), p.x());
  const double ang_q = std::atan2(q.y(), q.x());
  const double theta1 = ang_p + side * gamma_p;
  const double theta2 = ang_q - side * gamma_q;
  const double arc_angle = mod_2pi(side * (theta2 - theta1));

  const bool chord_hits = segment_distance_to_origin(p, q) < radius;
  const bool active = chord_hits && arc_angle > 0.0 && arc_angle < M_PI;

  if (!active) {
    out.total_len = (ins_s - ori_s).norm();
    out.x_alpha = ori_s + alpha * (ins_s - ori_s);
    return out;
  }

  const double l1 = std::sqrt(dp * dp - radius * radius);
  const double l2 = std::sqrt(dq * dq - radius * radius);
  const double arc = radius * arc_angle;
  const double u_total = l1 + arc + l2;
  const double dz = ins_s.z() - ori_s.z();
  out.total_len = std::sqrt(u_total * u_total + dz * dz);
  out.wrapped = true;
  // z is linear in the projected arclength, so the on-surface portion carries
  // the same 3D/2D length ratio as the whole path.
  out.wrapped_len = arc * out.total_len / u_total;
  out.theta1 = theta1;
  out.theta2 = theta2;
  out.z1 = ori_s.z() + dz * l1 / u_total;
  out.z2 = ori_s.z() + dz * (l1 + arc) / u_total;

  const Eigen::Vector2d t1(radius * std::cos(theta1), radius * std::sin(theta1));
  const Eigen::Vector2d t2(radius * std::cos(theta2), radius * std::sin(theta2));
  const double u = alpha * u_total;
  Eigen::Vector2d xy;
  if (u <= l1) {
    xy = p + (u / l1) * (t1 - p);
  } else if (u <= l1 + arc) {
    const double th = theta1 + side * (u - l1) / radius;
    xy = Eigen::Vector2d(radius * std::cos(th), radius * std::sin(th));
  } else {
    xy = t2 + ((u - l1 - arc) / l2) * (q - t2);
  }
  out.x_alpha << xy.x(), xy.y(), ori_s.z() + dz * u / u_total;
  return out;
}

double wrap_path_length_via(const Vec3& ori_s, const Vec3& ins_s, double radius, int side,
                            double theta1, double zz1, double theta2, double zz2) {
  const Vec3 t1(radius * std::cos(theta1), radius * std::sin(theta1), zz1);
  const Vec3 t2(radius * std::cos(theta2), radius * std::sin(theta2), zz2);
  const double arc_angle = mod_2pi(side * (theta2 - theta1));
  const double helix = std::hypot(radius * arc_angle, zz2 - zz1);
  return (t1 - ori_s).norm() + helix + (ins_s - t2).norm();
}

}  // namespace mtdyn
