// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mtdyn/types.hpp"

namespace mtdyn {

// Shortest path around an infinite cylinder (axis = z of the surface frame,
// given radius). side selects the tangent family: +1 wraps counterclockwise
// in the xy cross-section, -1 clockwise.
struct WrapResult {
  Vec3 x_alpha = Vec3::Zero();  // surface-frame position at fraction alpha
  double wrapped_len = 0.0;     // l, length of the on-surface portion
  double total_len = 0.0;       // L
  bool wrapped = false;
  // Tangent parameters (angle, z) — meaningful only when wrapped.
  double theta1 = 0.0, z1 = 0.0, theta2 = 0.0, z2 = 0.0;
};

WrapResult analytic_wrap(const Vec3& ori_s, const Vec3& ins_s, double radius, int side,
                         double alpha);

// Length of the candidate path origin -> (theta1, z1) -> on-surface helix ->
// (theta2, z2) -> insertion; used to certify local optimality of the tangent
// points picked by analytic_wrap.
double wrap_path_length_via(const Vec3& ori_s, const Vec3& ins_s, double radius, int side,
                            double theta1, double zz1, double theta2, double zz2);

}  // namespace mtdyn
