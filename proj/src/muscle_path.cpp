// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/muscle_path.hpp"

#include <cmath>

namespace mtdyn {

void validate_layout(const std::vector<PathMassPoint>& layout) {
  if (layout.empty()) throw ConfigError("mass-point layout must be nonempty");
  double prev = 0.0;
  for (const PathMassPoint& p : layout) {
    if (!(p.alpha > prev && p.alpha < 1.0))
      throw ConfigError("mass-point alphas must be strictly increasing within (0,1)");
    if (p.mass < 0.0) throw ConfigError("mass-point masses must be nonnegative");
    prev = p.alpha;
  }
}

NodeKinematics node_kinematics(const std::vector<ResolvedAnchor>& anchors,
                               const std::vector<Transform>& world,
                               const std::vector<Vec6>& twists) {
  const int nb = static_cast<int>(world.size());
  const int nn = static_cast<int>(anchors.size());
  NodeKinematics out;
  out.x.resize(nn);
  out.v.resize(nn);
  out.j = MatX::Zero(3 * nn, 6 * nb);
  out.jdot = MatX::Zero(3 * nn, 6 * nb);
  for (int i = 0; i < nn; ++i) {
    const ResolvedAnchor& a = anchors[i];
    const Transform& w = world[a.body];
    const Mat36 g = gamma(a.local);
    out.x[i] = w.apply(a.local);
    out.j.block<3, 6>(3 * i, 6 * a.body) = w.rotation * g;
    out.jdot.block<3, 6>(3 * i, 6 * a.body) = rotation_rate(w.rotation, twists[a.body].head<3>()) * g;
    out.v[i] = out.j.block<3, 6>(3 * i, 6 * a.body) * twists[a.body];
  }
  return out;
}

PathJacobians typeI_jacobians(const ResolvedAnchor& origin, const ResolvedAnchor& insertion,
                              const std::vector<PathMassPoint>& layout,
                              const std::vector<Transform>& world,
                              const std::vector<Vec6>& twists) {
  validate_layout(layout);
  const NodeKinematics nodes = node_kinematics({origin, insertion}, world, twists);
  const int m = static_cast<int>(layout.size());
  const int cols = static_cast<int>(nodes.j.cols());
  PathJacobians out;
  out.j_am = MatX::Zero(3 * m, cols);
  out.jdot_am = MatX::Zero(3 * m, cols);
  out.x_alpha = VecX::Zero(3 * m);
  out.v_alpha = VecX::Zero(3 * m);
  for (int i = 0; i < m; ++i) {
    const double a = layout[i].alpha;
    out.j_am.middleRows<3>(3 * i) = (1.0 - a) * nodes.j.topRows<3>() + a * nodes.j.bottomRows<3>();
    out.jdot_am.middleRows<3>(3 * i) =
        (1.0 - a) * nodes.jdot.topRows<3>() + a * nodes.jdot.bottomRows<3>();
    out.x_alpha.segment<3>(3 * i) = (1.0 - a) * nodes.x[0] + a * nodes.x[1];
    out.v_alpha.segment<3>(3 * i) = (1.0 - a) * nodes.v[0] + a * nodes.v[1];
  }
  return out;
}

EolCoords eol_update_s(const std::vector<Vec3>& x, double s_total) {
  const int nn = static_cast<int>(x.size());
  if (nn < 2) throw ConfigError("polyline needs at least two nodes");
  EolCoords out;
  out.seg_len.resize(nn - 1);
  double total = 0.0;
  for (int k = 1; k < nn; ++k) {
    const double l = (x[k] - x[k - 1]).norm();
    if (l <= 0.0) throw GeometryError("degenerate path: coincident nodes " + std::to_string(k - 1) +
                                      " and " + std::to_string(k));
    out.seg_len[k - 1] = l;
    total += l;
  }
  out.total_len = total;
  out.s.resize(nn);
  out.s[0] = 0.0;
  double run = 0.0;
  for (int k = 1; k < nn; ++k) {
    run += out.seg_len[k - 1];
    out.s[k] = s_total * run / total;
  }
  return out;
}

EolJacobians eol_jacobian_sx(const std::vector<Vec3>& x, const std::vector<Vec3>& v,
                             double s_total) {
  const int nn = static_cast<int>(x.size());
  const EolCoords c = eol_update_s(x, s_total);
  const double big_l = c.total_len;

  // Unit vectors u_k and their rates along the given node velocities.
  std::vector<Vec3> u(nn - 1), udot(nn - 1);
  std::vector<double> ldot(nn - 1);
  for (int k = 0; k < nn - 1; ++k) {
    const Vec3 d = x[k + 1] - x[k];
    const Vec3 dd = v[k + 1] - v[k];
    const double l = c.seg_len[k];
    u[k] = d / l;
    ldot[k] = u[k].dot(dd);
    udot[k] = (dd - u[k] * ldot[k]) / l;
  }
  // Cumulative lengths P_i and rates.
  std::vector<double> p(nn, 0.0), pdot(nn, 0.0);
  for (int i = 1; i < nn; ++i) {
    p[i] = p[i - 1] + c.seg_len[i - 1];
    pdot[i] = pdot[i - 1] + ldot[i - 1];
  }
  const double big_ldot = pdot[nn - 1];

  EolJacobians out;
  out.j_sx = MatX::Zero(nn, 3 * nn);
  out.jdot_sx = MatX::Zero(nn, 3 * nn);
  const double l2 = big_l * big_l;
  for (int i = 1; i < nn - 1; ++i) {
    for (int jn = 0; jn < nn; ++jn) {
      // dP_i/dx_j and dL/dx_j from the telescoping segment-length derivatives.
      Vec3 a = Vec3::Zero(), adot = Vec3::Zero();
      if (jn >= 1 && jn <= i) {
        a += u[jn - 1];
        adot += udot[jn - 1];
      }
      if (jn + 1 <= i) {
        a -= u[jn];
        adot -= udot[jn];
      }
      Vec3 b = Vec3::Zero(), bdot = Vec3::Zero();
      if (jn >= 1) {
        b += u[jn - 1];
        bdot += udot[jn - 1];
      }
      if (jn <= nn - 2) {
        b -= u[jn];
        bdot -= udot[jn];
      }
      const Vec3 num = big_l * a - p[i] * b;
      const Vec3 numdot = big_ldot * a + big_l * adot - pdot[i] * b - p[i] * bdot;
      out.j_sx.block<1, 3>(i, 3 * jn) = (s_total / l2) * num.transpose();
      out.jdot_sx.block<1, 3>(i, 3 * jn) =
          (s_total / l2) * numdot.transpose() -
          (2.0 * s_total * big_ldot / (l2 * big_l)) * num.transpose();
    }
  }
  return out;
}

PathJacobians typeII_jacobians(const std::vector<ResolvedAnchor>& anchors,
                               const std::vector<PathMassPoint>& layout, double s_total,
                               const std::vector<Transform>& world,
                               const std::vector<Vec6>& twists) {
  validate_layout(layout);
  const NodeKinematics nodes = node_kinematics(anchors, world, twists);
  const int nn = static_cast<int>(anchors.size());
  const int m = static_cast<int>(layout.size());
  const int cols = static_cast<int>(nodes.j.cols());

  const EolCoords coords = eol_update_s(nodes.x, s_total);
  const EolJacobians eol = eol_jacobian_sx(nodes.x, nodes.v, s_total);

  // Stack node velocities and material rates.
  VecX xdot(3 * nn);
  for (int i = 0; i < nn; ++i) xdot.segment<3>(3 * i) = nodes.v[i];
  const VecX sdot = eol.j_sx * xdot;

  // z layout: [x_0..x_{N-1} ; s_0..s_{N-1}].
  MatX j_zm(4 * nn, cols), jdot_zm(4 * nn, cols);
  j_zm.topRows(3 * nn) = nodes.j;
  j_zm.bottomRows(nn) = eol.j_sx * nodes.j;
  jdot_zm.topRows(3 * nn) = nodes.jdot;
  jdot_zm.bottomRows(nn) = eol.jdot_sx * nodes.j + eol.j_sx * nodes.jdot;

  MatX j_az = MatX::Zero(3 * m, 4 * nn);
  MatX jdot_az = MatX::Zero(3 * m, 4 * nn);
  PathJacobians out;
  out.x_alpha = VecX::Zero(3 * m);
  out.v_alpha = VecX::Zero(3 * m);

  for (int i = 0; i < m; ++i) {
    const double s_a = layout[i].alpha * s_total;
    // Containing segment, re-resolved every evaluation; a mass point exactly
    // on a node belongs to the following segment.
    int k = 1;
    while (k < nn - 1 && s_a >= coords.s[k]) ++k;
    const double ds = coords.s[k] - coords.s[k - 1];
    const double beta = (s_a - coords.s[k - 1]) / ds;
    const Vec3 f = (nodes.x[k] - nodes.x[k - 1]) / ds;

    const double ds_dot = sdot[k] - sdot[k - 1];
    const double beta_dot = -((1.0 - beta) * sdot[k - 1] + beta * sdot[k]) / ds;
    const Vec3 fdot = (nodes.v[k] - nodes.v[k - 1]) / ds - f * (ds_dot / ds);

    j_az.block<3, 3>(3 * i, 3 * (k - 1)) = (1.0 - beta) * Mat3::Identity();
    j_az.block<3, 3>(3 * i, 3 * k) = beta * Mat3::Identity();
    j_az.block<3, 1>(3 * i, 3 * nn + (k - 1)) = -(1.0 - beta) * f;
    j_az.block<3, 1>(3 * i, 3 * nn + k) = -beta * f;

    jdot_az.block<3, 3>(3 * i, 3 * (k - 1)) = -beta_dot * Mat3::Identity();
    jdot_az.block<3, 3>(3 * i, 3 * k) = beta_dot * Mat3::Identity();
    jdot_az.block<3, 1>(3 * i, 3 * nn + (k - 1)) = beta_dot * f - (1.0 - beta) * fdot;
    jdot_az.block<3, 1>(3 * i, 3 * nn + k) = -beta_dot * f - beta * fdot;

    out.x_alpha.segment<3>(3 * i) = (1.0 - beta) * nodes.x[k - 1] + beta * nodes.x[k];
    out.v_alpha.segment<3>(3 * i) = (1.0 - beta) * nodes.v[k - 1] + beta * nodes.v[k] -
                                    f * ((1.0 - beta) * sdot[k - 1] + beta * sdot[k]);
  }

  out.j_am = j_az * j_zm;
  out.jdot_am = jdot_az * j_zm + j_az * jdot_zm;
  return out;
}

PathLength polyline_length(const NodeKinematics& nodes) {
  const int nn = static_cast<int>(nodes.x.size());
  PathLength out;
  out.dlen_dm = MatX::Zero(1, nodes.j.cols());
  for (int k = 1; k < nn; ++k) {
    const Vec3 d = nodes.x[k] - nodes.x[k - 1];
    const double l = d.norm();
    if (l <= 0.0) throw GeometryError("degenerate path: coincident nodes");
    const Vec3 u = d / l;
    out.length += l;
    out.rate += u.dot(nodes.v[k] - nodes.v[k - 1]);
    out.dlen_dm += u.transpose() * (nodes.j.middleRows<3>(3 * k) - nodes.j.middleRows<3>(3 * (k - 1)));
  }
  return out;
}

}  // namespace mtdyn
