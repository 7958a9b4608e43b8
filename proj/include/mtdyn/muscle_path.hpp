// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "mtdyn/skeleton.hpp"
#include "mtdyn/spatial.hpp"
#include "mtdyn/types.hpp"

namespace mtdyn {

// Anchor resolved against a skeleton: local position is in the internal
// (COM-centered) frame of the body.
struct ResolvedAnchor {
  int body = -1;
  Vec3 local = Vec3::Zero();
};

// Mass point pinned at material fraction alpha along the musculotendon.
struct PathMassPoint {
  double alpha = 0.5;
  double mass = 0.0;
};

// World-space kinematics of a set of body-fixed points: positions, velocities
// and the Jacobian rows mapping stacked body twists to point velocities.
struct NodeKinematics {
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  MatX j;     // 3N x 6n
  MatX jdot;  // 3N x 6n
};

NodeKinematics node_kinematics(const std::vector<ResolvedAnchor>& anchors,
                               const std::vector<Transform>& world,
                               const std::vector<Vec6>& twists);

// Output of a muscle-path Jacobian evaluation: maps maximal (body) velocities
// to mass-point world velocities, plus the positions themselves.
struct PathJacobians {
  MatX j_am;      // 3m x 6n
  MatX jdot_am;   // 3m x 6n
  VecX x_alpha;   // 3m world positions
  VecX v_alpha;   // 3m world velocities
};

// Straight-line path: each mass point velocity is the alpha-weighted average
// of the origin and insertion world velocities.
PathJacobians typeI_jacobians(const ResolvedAnchor& origin, const ResolvedAnchor& insertion,
                              const std::vector<PathMassPoint>& layout,
                              const std::vector<Transform>& world,
                              const std::vector<Vec6>& twists);

// Material (Eulerian) coordinates of polyline nodes under the equal-strain
// assumption: delta_s_k = s_total * l_k / L_total, s at origin pinned to 0.
struct EolCoords {
  std::vector<double> s;        // per node, s[0] = 0, s[N-1] = s_total
  std::vector<double> seg_len;  // world segment lengths l_k, k = 1..N-1
  double total_len = 0.0;
};

EolCoords eol_update_s(const std::vector<Vec3>& x, double s_total);

// J_sx = ds/dx of the map above (rows for origin/insertion are zero) and its
// time derivative along node velocities.
struct EolJacobians {
  MatX j_sx;     // N x 3N
  MatX jdot_sx;  // N x 3N
};

EolJacobians eol_jacobian_sx(const std::vector<Vec3>& x, const std::vector<Vec3>& v,
                             double s_total);

// Polyline (path-point) muscle via the combined Lagrangian/Eulerian chain
// J_am = J_az * J_zm with J_zm = (I; J_sx) J_xm.
PathJacobians typeII_jacobians(const std::vector<ResolvedAnchor>& nodes,  // origin, vias..., insertion
                               const std::vector<PathMassPoint>& layout, double s_total,
                               const std::vector<Transform>& world,
                               const std::vector<Vec6>& twists);

// Geometric polyline length, its rate, and d(length)/d(node positions) rows
// folded through node Jacobians: d(length)/d(maximal velocities) (1 x 6n).
struct PathLength {
  double length = 0.0;
  double rate = 0.0;
  MatX dlen_dm;  // 1 x 6n
};

PathLength polyline_length(const NodeKinematics& nodes);

void validate_layout(const std::vector<PathMassPoint>& layout);

}  // namespace mtdyn
