// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/wrap_muscle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtdyn/rng.hpp"

namespace mtdyn {

namespace {

Vec3 sample_point_outside(Rng& rng, const Vec3& lo, const Vec3& hi, double radius) {
  // Endpoints must clear the cylinder; resample rather than clamp so the
  // retained distribution stays uniform over the admissible region.
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vec3 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()),
                 rng.uniform(lo.z(), hi.z()));
    if (p.head<2>().norm() > 1.05 * radius) return p;
  }
  throw ConfigError("sampling box leaves no room outside the cylinder");
}

VecX sample_input(const WrapSample& s) {
  VecX in(8);
  in << s.ori, s.ins, s.alpha, s.radius;
  return in;
}

}  // namespace

WrapDataset generate_dataset(const SampleRanges& ranges, int count, double threshold,
                             uint64_t seed) {
  if (count <= 0) throw ConfigError("generate_dataset: count must be positive");
  if (!(threshold > 0.0 && threshold <= 0.1))
    throw ConfigError("generate_dataset: threshold must lie in (0, 0.1]");
  if (ranges.radius_min <= 0.0 || ranges.radius_max < ranges.radius_min)
    throw ConfigError("generate_dataset: bad radius range");

  Rng rng(seed);
  WrapDataset ds;
  ds.ranges = ranges;
  ds.threshold = threshold;
  ds.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    WrapSample s;
    s.radius = rng.uniform(ranges.radius_min, ranges.radius_max);
    s.ori = sample_point_outside(rng, ranges.ori_min, ranges.ori_max, s.radius);
    s.ins = sample_point_outside(rng, ranges.ins_min, ranges.ins_max, s.radius);
    s.alpha = rng.uniform(ranges.alpha_min, ranges.alpha_max);
    const WrapResult w = analytic_wrap(s.ori, s.ins, s.radius, ranges.side, s.alpha);
    s.x_alpha = w.x_alpha;
    s.wrapped_len = w.wrapped_len;
    s.total_len = w.total_len;
    ++ds.drawn;
    const double frac = w.wrapped_len / w.total_len;
    if (frac > 0.0 && frac < threshold) {
      ++ds.discarded;
      continue;
    }
    if (w.wrapped_len == 0.0)
      ++ds.straight;
    else
      ++ds.attached;
    ds.samples.push_back(s);
  }
  if (ds.samples.empty()) throw NumericalError("generate_dataset: empty retained set");
  return ds;
}

void dataset_matrices(const WrapDataset& ds, MatX& inputs, MatX& targets) {
  const int n = static_cast<int>(ds.samples.size());
  inputs.resize(8, n);
  targets.resize(3, n);
  for (int i = 0; i < n; ++i) {
    inputs.col(i) = sample_input(ds.samples[i]);
    targets.col(i) = ds.samples[i].x_alpha;
  }
}

void save_dataset(const WrapDataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open dataset file for writing: " + path);
  char buf[400];
  os << "# mtdyn-wrap-dataset 1\n";
  std::snprintf(buf, sizeof(buf), "# side %d threshold %.17g drawn %zu discarded %zu\n",
                ds.ranges.side, ds.threshold, ds.drawn, ds.discarded);
  os << buf;
  const auto& r = ds.ranges;
  std::snprintf(buf, sizeof(buf),
                "# ranges ori %.17g %.17g %.17g %.17g %.17g %.17g ins %.17g %.17g %.17g %.17g "
                "%.17g %.17g alpha %.17g %.17g radius %.17g %.17g\n",
                r.ori_min.x(), r.ori_min.y(), r.ori_min.z(), r.ori_max.x(), r.ori_max.y(),
                r.ori_max.z(), r.ins_min.x(), r.ins_min.y(), r.ins_min.z(), r.ins_max.x(),
                r.ins_max.y(), r.ins_max.z(), r.alpha_min, r.alpha_max, r.radius_min,
                r.radius_max);
  os << buf;
  os << "x_ori_x,x_ori_y,x_ori_z,x_ins_x,x_ins_y,x_ins_z,alpha,radius,"
        "x_alpha_x,x_alpha_y,x_alpha_z,wrapped_len,total_len\n";
  for (const WrapSample& s : ds.samples) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  s.ori.x(), s.ori.y(), s.ori.z(), s.ins.x(), s.ins.y(), s.ins.z(), s.alpha,
                  s.radius, s.x_alpha.x(), s.x_alpha.y(), s.x_alpha.z(), s.wrapped_len,
                  s.total_len);
    os << buf;
  }
}

WrapDataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open dataset file: " + path);
  WrapDataset ds;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tag;
      ls >> tag;
      if (tag == "side") {
        ls >> ds.ranges.side;
        std::string t2;
        while (ls >> t2) {
          if (t2 == "threshold") ls >> ds.threshold;
          if (t2 == "drawn") ls >> ds.drawn;
          if (t2 == "discarded") ls >> ds.discarded;
        }
      } else if (tag == "ranges") {
        std::string t2;
        auto& r = ds.ranges;
        while (ls >> t2) {
          if (t2 == "ori") ls >> r.ori_min.x() >> r.ori_min.y() >> r.ori_min.z() >> r.ori_max.x() >> r.ori_max.y() >> r.ori_max.z();
          if (t2 == "ins") ls >> r.ins_min.x() >> r.ins_min.y() >> r.ins_min.z() >> r.ins_max.x() >> r.ins_max.y() >> r.ins_max.z();
          if (t2 == "alpha") ls >> r.alpha_min >> r.alpha_max;
          if (t2 == "radius") ls >> r.radius_min >> r.radius_max;
        }
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column-name row
      continue;
    }
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    WrapSample s;
    if (!(ls >> s.ori.x() >> s.ori.y() >> s.ori.z() >> s.ins.x() >> s.ins.y() >> s.ins.z() >>
          s.alpha >> s.radius >> s.x_alpha.x() >> s.x_alpha.y() >> s.x_alpha.z() >>
          s.wrapped_len >> s.total_len))
      throw ConfigError("dataset file: malformed record '" + line + "'");
    if (s.wrapped_len == 0.0)
      ++ds.straight;
    else
      ++ds.attached;
    ds.samples.push_back(s);
  }
  if (ds.samples.empty()) throw ConfigError("dataset file has no samples: " + path);
  return ds;
}

TypeIIIJacobians typeIII_jacobians(const WrapCylinder& cyl, const MLPWeights& weights,
                                   const ResolvedAnchor& origin, const ResolvedAnchor& insertion,
                                   const std::vector<PathMassPoint>& layout,
                                   const std::vector<Transform>& world,
                                   const std::vector<Vec6>& twists, double epsilon) {
  validate_layout(layout);
  const int m = static_cast<int>(layout.size());
  const int nb = static_cast<int>(world.size());
  const int a = origin.body, b = cyl.body, c = insertion.body;

  const Transform& wa = world[a];
  const Transform& wb = world[b];
  const Transform& wc = world[c];
  const Transform x_ws = compose(wb, cyl.surf);
  const Mat3& r_ws = x_ws.rotation;
  const Transform x_sw = invert(x_ws);

  const Vec3 ori_w = wa.apply(origin.local);
  const Vec3 ins_w = wc.apply(insertion.local);
  const Vec3 ori_s = x_sw.apply(ori_w);
  const Vec3 ins_s = x_sw.apply(ins_w);
  const Vec3 ori_b = invert(wb).apply(ori_w);
  const Vec3 ins_b = invert(wb).apply(ins_w);

  const Vec3 omega_a = twists[a].head<3>();
  const Vec3 omega_b = twists[b].head<3>();
  const Vec3 omega_c = twists[c].head<3>();
  const Vec3 nu_b = twists[b].tail<3>();
  // Surface frame is rigid on body b.
  const Vec3 omega_s = cyl.surf.rotation.transpose() * omega_b;

  // Actual world velocities of the anchors and their velocities relative to
  // the (moving) surface frame.
  const Vec3 ori_vel_w = wa.rotation * (gamma(origin.local) * twists[a]);
  const Vec3 ins_vel_w = wc.rotation * (gamma(insertion.local) * twists[c]);
  const Vec3 ori_rel_w = ori_vel_w - wb.rotation * (gamma(ori_b) * twists[b]);
  const Vec3 ins_rel_w = ins_vel_w - wb.rotation * (gamma(ins_b) * twists[b]);
  const Vec3 ori_rel_s = r_ws.transpose() * ori_rel_w;
  const Vec3 ins_rel_s = r_ws.transpose() * ins_rel_w;

  // Network evaluation for all mass points, plus a time-perturbed pass for
  // the network-Jacobian rates.
  MatX inputs(8, m);
  for (int i = 0; i < m; ++i) inputs.col(i) << ori_s, ins_s, layout[i].alpha, cyl.radius;
  const MatX x_alpha_s = mlp_forward_batch(weights, inputs);
  const std::vector<MatX> jac = mlp_input_jacobian_batch(weights, inputs);

  const double speed = std::max(ori_rel_s.norm(), ins_rel_s.norm());
  double eps = epsilon;
  if (eps <= 0.0) {
    const double char_len = (ins_s - ori_s).norm() + cyl.radius;
    eps = (speed > 1e-12) ? std::clamp(1e-6 * char_len / speed, 1e-9, 1e-4) : 1e-6;
  }
  std::vector<MatX> jac_dot(m, MatX::Zero(3, 8));
  if (speed > 1e-12) {
    MatX inputs_pert = inputs;
    for (int i = 0; i < m; ++i) {
      inputs_pert.col(i).head<3>() += eps * ori_rel_s;
      inputs_pert.col(i).segment<3>(3) += eps * ins_rel_s;
    }
    const std::vector<MatX> jac_pert = mlp_input_jacobian_batch(weights, inputs_pert);
    for (int i = 0; i < m; ++i) jac_dot[i] = (jac_pert[i] - jac[i]) / eps;
  }

  TypeIIIJacobians out;
  if (weights.input_min.size() == 8) {
    for (int i = 0; i < m && !out.extrapolated; ++i)
      out.extrapolated = ((inputs.col(i).array() < weights.input_min.array() - 1e-12).any() ||
                          (inputs.col(i).array() > weights.input_max.array() + 1e-12).any());
  }
  out.j_am = MatX::Zero(3 * m, 6 * nb);
  out.jdot_am = MatX::Zero(3 * m, 6 * nb);
  out.x_alpha = VecX::Zero(3 * m);
  out.v_alpha = VecX::Zero(3 * m);

  const Mat3 wx_a = cross_matrix(omega_a);
  const Mat3 wx_b = cross_matrix(omega_b);
  const Mat3 wx_c = cross_matrix(omega_c);
  const Mat3 wx_s = cross_matrix(omega_s);
  const Mat36 g_ori_a = gamma(origin.local);
  const Mat36 g_ori_b = gamma(ori_b);
  const Mat36 g_ins_c = gamma(insertion.local);
  const Mat36 g_ins_b = gamma(ins_b);
  // Anchor positions drift in body b's frame as the bodies move relative to
  // each other.
  const Vec3 ori_b_dot = -omega_b.cross(ori_b) + wb.rotation.transpose() * ori_vel_w - nu_b;
  const Vec3 ins_b_dot = -omega_b.cross(ins_b) + wb.rotation.transpose() * ins_vel_w - nu_b;

  for (int i = 0; i < m; ++i) {
    const Mat3 j_ori = jac[i].leftCols<3>();
    const Mat3 j_ins = jac[i].middleCols<3>(3);
    const Mat3 j_ori_dot = jac_dot[i].leftCols<3>();
    const Mat3 j_ins_dot = jac_dot[i].middleCols<3>(3);

    const Vec3 xs = x_alpha_s.col(i);
    const Vec3 xs_dot = j_ori * ori_rel_s + j_ins * ins_rel_s;
    const Vec3 xb = cyl.surf.apply(xs);
    const Vec3 xb_dot = cyl.surf.rotation * xs_dot;

    out.x_alpha.segment<3>(3 * i) = x_ws.apply(xs);

    // Base motion: the mass point carried rigidly by the surface body.
    const Mat36 g_xb = gamma(xb);
    out.j_am.block<3, 6>(3 * i, 6 * b) += wb.rotation * g_xb;
    out.jdot_am.block<3, 6>(3 * i, 6 * b) +=
        wb.rotation * (wx_b * g_xb + gamma(xb_dot));

    // Relative origin motion pushed through the network Jacobian.
    const Mat3 p = r_ws * j_ori * r_ws.transpose();
    const Mat3 p_dot = r_ws * (wx_s * j_ori + j_ori_dot - j_ori * wx_s) * r_ws.transpose();
    out.j_am.block<3, 6>(3 * i, 6 * a) += p * (wa.rotation * g_ori_a);
    out.j_am.block<3, 6>(3 * i, 6 * b) -= p * (wb.rotation * g_ori_b);
    out.jdot_am.block<3, 6>(3 * i, 6 * a) +=
        p_dot * (wa.rotation * g_ori_a) + p * (wa.rotation * wx_a * g_ori_a);
    out.jdot_am.block<3, 6>(3 * i, 6 * b) -=
        p_dot * (wb.rotation * g_ori_b) +
        p * (wb.rotation * (wx_b * g_ori_b + gamma(ori_b_dot)));

    // Relative insertion motion.
    const Mat3 qm = r_ws * j_ins * r_ws.transpose();
    const Mat3 qm_dot = r_ws * (wx_s * j_ins + j_ins_dot - j_ins * wx_s) * r_ws.transpose();
    out.j_am.block<3, 6>(3 * i, 6 * c) += qm * (wc.rotation * g_ins_c);
    out.j_am.block<3, 6>(3 * i, 6 * b) -= qm * (wb.rotation * g_ins_b);
    out.jdot_am.block<3, 6>(3 * i, 6 * c) +=
        qm_dot * (wc.rotation * g_ins_c) + qm * (wc.rotation * wx_c * g_ins_c);
    out.jdot_am.block<3, 6>(3 * i, 6 * b) -=
        qm_dot * (wb.rotation * g_ins_b) +
        qm * (wb.rotation * (wx_b * g_ins_b + gamma(ins_b_dot)));
  }

  VecX phi(6 * nb);
  for (int k = 0; k < nb; ++k) phi.segment<6>(6 * k) = twists[k];
  out.v_alpha = out.j_am * phi;
  return out;
}

ContinuityReport continuity_report(double radius, int side, const MLPWeights& weights,
                                   const std::vector<SweepSample>& sweep,
                                   const std::vector<double>& alphas, double band_threshold) {
  const int nt = static_cast<int>(sweep.size());
  const int na = static_cast<int>(alphas.size());
  if (nt < 3) throw ConfigError("continuity_report: need at least 3 sweep samples");
  ContinuityReport rep;
  rep.t.resize(nt);
  rep.wrap_fraction.resize(nt);
  rep.oracle_pos.resize(3 * na, nt);
  rep.net_pos.resize(3 * na, nt);

  double len_sum = 0.0;
  for (int i = 0; i < nt; ++i) {
    rep.t[i] = sweep[i].t;
    MatX inputs(8, na);
    for (int k = 0; k < na; ++k) {
      const WrapResult w = analytic_wrap(sweep[i].ori, sweep[i].ins, radius, side, alphas[k]);
      rep.oracle_pos.block<3, 1>(3 * k, i) = w.x_alpha;
      if (k == 0) {
        rep.wrap_fraction[i] = w.wrapped_len / w.total_len;
        len_sum += w.total_len;
      }
      inputs.col(k) << sweep[i].ori, sweep[i].ins, alphas[k], radius;
    }
    const MatX pred = mlp_forward_batch(weights, inputs);
    for (int k = 0; k < na; ++k) {
      rep.net_pos.block<3, 1>(3 * k, i) = pred.col(k);
      const double rho = pred.col(k).head<2>().norm();
      rep.max_penetration = std::max(rep.max_penetration, radius - rho);
    }
  }
  rep.max_penetration = std::max(rep.max_penetration, 0.0);
  rep.mean_total_len = len_sum / nt;

  // Matched-resolution central differences for both series.
  rep.oracle_deriv = MatX::Zero(3 * na, nt);
  rep.net_deriv = MatX::Zero(3 * na, nt);
  for (int i = 1; i + 1 < nt; ++i) {
    const double dt = rep.t[i + 1] - rep.t[i - 1];
    rep.oracle_deriv.col(i) = (rep.oracle_pos.col(i + 1) - rep.oracle_pos.col(i - 1)) / dt;
    rep.net_deriv.col(i) = (rep.net_pos.col(i + 1) - rep.net_pos.col(i - 1)) / dt;
  }
  for (int i = 2; i + 1 < nt; ++i) {
    rep.oracle_max_jump = std::max(
        rep.oracle_max_jump, (rep.oracle_deriv.col(i) - rep.oracle_deriv.col(i - 1)).cwiseAbs().maxCoeff());
    rep.net_max_jump = std::max(
        rep.net_max_jump, (rep.net_deriv.col(i) - rep.net_deriv.col(i - 1)).cwiseAbs().maxCoeff());
  }

  double sq = 0.0;
  int n_outside = 0;
  for (int i = 0; i < nt; ++i) {
    const double f = rep.wrap_fraction[i];
    if (f > 0.0 && f < band_threshold) continue;
    sq += (rep.net_pos.col(i) - rep.oracle_pos.col(i)).squaredNorm() / na;
    ++n_outside;
  }
  rep.rmse_outside_band = (n_outside > 0) ? std::sqrt(sq / n_outside) : 0.0;
  return rep;
}

void save_continuity_report(const ContinuityReport& rep, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open report file for writing: " + path);
  char buf[64];
  const int na = static_cast<int>(rep.oracle_pos.rows()) / 3;
  os << "# oracle_max_jump " << rep.oracle_max_jump << " net_max_jump " << rep.net_max_jump
     << " rmse_outside_band " << rep.rmse_outside_band << " mean_total_len "
     << rep.mean_total_len << " max_penetration " << rep.max_penetration << "\n";
  os << "t,wrap_fraction";
  for (int k = 0; k < na; ++k)
    for (const char* which : {"oracle", "net"})
      for (const char* comp : {"x", "y", "z"}) os << "," << which << k << "_" << comp;
  for (int k = 0; k < na; ++k)
    for (const char* which : {"oracle", "net"})
      for (const char* comp : {"x", "y", "z"}) os << ",d" << which << k << "_" << comp;
  os << "\n";
  const int nt = static_cast<int>(rep.t.size());
  for (int i = 0; i < nt; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", rep.t[i]);
    os << buf;
    std::snprintf(buf, sizeof(buf), ",%.17g", rep.wrap_fraction[i]);
    os << buf;
    for (int k = 0; k < na; ++k) {
      for (int cpt = 0; cpt < 3; ++cpt) {
        std::snprintf(buf, sizeof(buf), ",%.17g", rep.oracle_pos(3 * k + cpt, i));
        os << buf;
      }
      for (int cpt = 0; cpt < 3; ++cpt) {
        std::snprintf(buf, sizeof(buf), ",%.17g", rep.net_pos(3 * k + cpt, i));
        os << buf;
      }
    }
    for (int k = 0; k < na; ++k) {
      for (int cpt = 0; cpt < 3; ++cpt) {
        std::snprintf(buf, sizeof(buf), ",%.17g", rep.oracle_deriv(3 * k + cpt, i));
        os << buf;
      }
      for (int cpt = 0; cpt < 3; ++cpt) {
        std::snprintf(buf, sizeof(buf), ",%.17g", rep.net_deriv(3 * k + cpt, i));
        os << buf;
      }
    }
    os << "\n";
  }
}

}  // namespace mtdyn
