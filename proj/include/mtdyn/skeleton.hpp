// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtdyn/spatial.hpp"
#include "mtdyn/types.hpp"

namespace mtdyn {

enum class JointKind { Revolute, Spherical, Fixed };

// Extra point mass rigidly attached to a body (given in the user body frame).
struct PointMass {
  Vec3 local = Vec3::Zero();
  double mass = 0.0;
};

struct Body {
  std::string name;
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();  // rotational inertia about the COM, body axes
  Vec3 com_offset = Vec3::Zero();
  std::optional<std::string> mesh_ref;
  std::vector<PointMass> point_masses;
};

struct Joint {
  JointKind kind = JointKind::Revolute;
  Vec3 axis = Vec3::UnitZ();     // revolute only; unit norm
  int parent = -1;               // parent body index, -1 = world
  Transform rest;                // parent body frame -> joint frame
  double damping = 0.0;          // optional viscous joint damping
};

// Reduced state. q uses exponential coordinates for spherical joints,
// interpreted relative to per-joint reference rotations carried in joint_ref
// (rebased by the integrator after every step so coordinates stay small).
struct State {
  VecX q;
  VecX qdot;
  std::vector<Mat3> joint_ref;   // one per joint; identity unless spherical
  VecX activations;              // one per muscle (empty when no muscles)
};

struct BodyKinematics {
  std::vector<Transform> world;  // COM-centered internal frame of each body
  std::vector<Vec6> twist;       // body-frame (omega, nu) of internal frames
};

// Articulated rigid-body tree in reduced coordinates. One joint per body;
// bodies are stored in topological order (parent before child). Internally
// every body frame is shifted to its COM so spatial inertias stay
// block-diagonal; anchor positions must be converted with to_internal().
class Skeleton {
 public:
  Skeleton(std::vector<Body> bodies, std::vector<Joint> joints);

  int body_count() const { return static_cast<int>(bodies_.size()); }
  int dof() const { return dof_; }
  int joint_dof(int j) const;
  int joint_offset(int j) const { return joint_offset_[j]; }
  const Body& body(int i) const { return bodies_[i]; }
  const Joint& joint(int i) const { return joints_[i]; }
  int body_index(const std::string& name) const;  // -1 if absent

  State make_state() const;

  // User body frame -> internal COM frame.
  Vec3 to_internal(int body, const Vec3& local_user) const { return local_user - bodies_[body].com_offset; }

  std::vector<Transform> forward_kinematics(const State& st) const;

  // 6n x dof; stacks body twists per unit reduced velocity.
  MatX jacobian_mr(const State& st) const;
  MatX jacobian_mr_dot(const State& st) const;

  // Twists of all bodies for the given state (equals jacobian_mr * qdot).
  std::vector<Vec6> body_twists(const State& st) const;

  BodyKinematics kinematics(const State& st) const;

  // Constant body-frame spatial inertia of body i (COM frame, including any
  // attached point masses), plus optional extra point masses supplied by the
  // caller (in internal coordinates).
  Mat6 spatial_inertia(int i, const std::vector<PointMass>& extra_internal = {}) const;

  // Gravity plus gyroscopic wrench per body, stacked 6n. Spatial inertias may
  // be overridden (same order) to account for caller-side lumped masses.
  VecX body_forces(const BodyKinematics& kin, const Vec3& gravity,
                   const std::vector<Mat6>& inertia_override = {},
                   const std::vector<std::vector<PointMass>>& extra_internal = {}) const;

  // Gravitational potential of the bodies (own mass at COM plus point masses).
  double potential_energy(const std::vector<Transform>& world, const Vec3& gravity,
                          const std::vector<std::vector<PointMass>>& extra_internal = {}) const;

  // Fold per-step spherical increments into joint_ref and zero them; keeps
  // omega continuous and re-orthonormalizes the references.
  void rebase(State& st) const;

  // Diagonal vector of per-joint damping coefficients expanded to dof size.
  VecX damping_vector() const;

 private:
  struct JointInternal {
    Transform pre;       // parent internal frame -> joint frame
    Vec3 post_shift;     // joint frame -> own internal frame translation (com)
  };

  void check_state(const State& st) const;

  std::vector<Body> bodies_;
  std::vector<Joint> joints_;
  std::vector<JointInternal> internal_;
  std::vector<int> joint_offset_;
  std::vector<Mat6> base_inertia_;
  int dof_ = 0;
};

}  // namespace mtdyn
