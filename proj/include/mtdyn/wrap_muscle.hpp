// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mtdyn/mlp.hpp"
#include "mtdyn/muscle_path.hpp"
#include "mtdyn/spatial.hpp"
#include "mtdyn/types.hpp"
#include "mtdyn/wrap_geometry.hpp"

namespace mtdyn {

// Wrapping cylinder fixed to a body. surf maps surface-frame coordinates to
// the body frame (internal, COM-centered); the cylinder axis is the surface
// z-axis.
struct WrapCylinder {
  int body = -1;
  Transform surf;
  double radius = 0.0;
  int side = 1;  // +1/-1 tangent family in the surface xy cross-section
};

struct WrapSample {
  Vec3 ori = Vec3::Zero();      // surface frame
  Vec3 ins = Vec3::Zero();
  double alpha = 0.0;
  double radius = 0.0;
  Vec3 x_alpha = Vec3::Zero();  // surface frame
  double wrapped_len = 0.0;     // l
  double total_len = 0.0;       // L
};

struct SampleRanges {
  Vec3 ori_min, ori_max;
  Vec3 ins_min, ins_max;
  double alpha_min = 0.02, alpha_max = 0.98;
  double radius_min = 0.0, radius_max = 0.0;
  int side = 1;
};

struct WrapDataset {
  std::vector<WrapSample> samples;
  SampleRanges ranges;
  double threshold = 0.01;
  size_t drawn = 0;       // raw draws
  size_t discarded = 0;   // dropped by the near-tangency band
  size_t straight = 0;    // retained with l = 0
  size_t attached = 0;    // retained with l/L >= threshold
};

// Draws `count` oracle samples uniformly in the given ranges (resampling any
// endpoint that would start inside the cylinder) and drops every sample with
// 0 < l/L < threshold.
WrapDataset generate_dataset(const SampleRanges& ranges, int count, double threshold,
                             uint64_t seed);

void save_dataset(const WrapDataset& ds, const std::string& path);
WrapDataset load_dataset(const std::string& path);

// Network training views: inputs (ori, ins, alpha, radius) 8xN, targets 3xN.
void dataset_matrices(const WrapDataset& ds, MatX& inputs, MatX& targets);

struct TypeIIIJacobians {
  MatX j_am;
  MatX jdot_am;
  VecX x_alpha;  // world positions per mass point
  VecX v_alpha;
  bool extrapolated = false;  // inputs left the trained range
};

// Assembles J_am = J_base + J_ori + J_ins (and the time derivative) for a
// wrap muscle whose mass-point positions come from the surrogate network.
// epsilon <= 0 picks the time-perturbation step automatically from the
// characteristic length/speed, clamped to [1e-9, 1e-4] s.
TypeIIIJacobians typeIII_jacobians(const WrapCylinder& cyl, const MLPWeights& weights,
                                   const ResolvedAnchor& origin, const ResolvedAnchor& insertion,
                                   const std::vector<PathMassPoint>& layout,
                                   const std::vector<Transform>& world,
                                   const std::vector<Vec6>& twists, double epsilon = 0.0);

// One sweep configuration: origin/insertion in surface coordinates.
struct SweepSample {
  double t = 0.0;  // sweep parameter (e.g. joint angle)
  Vec3 ori = Vec3::Zero();
  Vec3 ins = Vec3::Zero();
};

// Aligned oracle-vs-network series over a sweep, with finite-difference
// derivatives on the sweep grid and jump statistics for both methods.
struct ContinuityReport {
  std::vector<double> t;
  std::vector<double> wrap_fraction;  // oracle l/L per sample
  MatX oracle_pos, net_pos;           // (3*n_alpha) x n_t
  MatX oracle_deriv, net_deriv;       // central differences, interior columns
  double oracle_max_jump = 0.0;
  double net_max_jump = 0.0;
  double rmse_outside_band = 0.0;     // position RMSE where l = 0 or l/L >= band
  double mean_total_len = 0.0;
  double max_penetration = 0.0;       // how far the network path dips inside
};

ContinuityReport continuity_report(double radius, int side, const MLPWeights& weights,
                                   const std::vector<SweepSample>& sweep,
                                   const std::vector<double>& alphas, double band_threshold);

void save_continuity_report(const ContinuityReport& rep, const std::string& path);

}  // namespace mtdyn
