// Copyright 2026 The EHM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reduced-coordinate rigid multibody dynamics of the joint tree.
//
// A BodyModel is compiled into a list of links in topological order. Compound
// joints become chains of elementary joints through massless virtual links
// (universal = revolute x + revolute y, spherical+translation = prismatic +
// spherical), so every elementary joint has a constant motion subspace.
//
// Generalized coordinates: free base (position[3], quaternion w,x,y,z),
// spherical (quaternion w,x,y,z), revolute/prismatic (scalar). Generalized
// velocities: free base [omega; v] in body coordinates, spherical omega in
// child coordinates, scalars otherwise. Forces follow the same layout.

#ifndef EHM_DYNAMICS_HPP_
#define EHM_DYNAMICS_HPP_

#include <vector>

#include <Eigen/Core>

#include "ehm/model.hpp"
#include "ehm/spatial.hpp"

namespace ehm {

enum class LinkJointType { kFree, kSpherical, kRevolute, kPrismatic, kFixed };

using MotionSubspace = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, 6>;

struct Link {
  int parent = -1;  // -1: the seat frame
  LinkJointType type = LinkJointType::kFixed;
  Vector3d axis = Vector3d::UnitZ();
  SpatialTransform<double> tree;  // parent link frame -> joint frame
  Vector3d origin = Vector3d::Zero();  // link origin in the model frame
  double mass = 0.0;
  Vector3d com = Vector3d::Zero();  // link coordinates
  Matrix6d inertia = Matrix6d::Zero();
  MotionSubspace subspace;
  int segment = -1;  // -1 for virtual links
  int joint = -1;    // model joint index; -1 for the base
  int q_index = 0;
  int v_index = 0;
  int nq = 0;
  int nv = 0;
};

// One restrained coordinate of a model joint.
struct JointCoordinate {
  enum class Kind { kScalar, kCardan };
  Kind kind = Kind::kScalar;
  int link = -1;
  int component = 0;  // Cardan axis for kCardan
};

class Multibody {
 public:
  explicit Multibody(const BodyModel& model);

  const std::vector<Link>& links() const { return links_; }
  int nq() const { return nq_; }
  int nv() const { return nv_; }
  int link_of_segment(int segment) const { return segment_link_[segment]; }
  const std::vector<JointCoordinate>& joint_coordinates(int joint) const {
    return joint_coordinates_[joint];
  }
  const Vector3d& gravity() const { return gravity_; }

  // All joints at zero (identity rotations) with the base at the root CoG.
  Eigen::VectorXd neutral_configuration() const;

 private:
  std::vector<Link> links_;
  std::vector<int> segment_link_;
  std::vector<std::vector<JointCoordinate>> joint_coordinates_;
  Vector3d gravity_;
  int nq_ = 0;
  int nv_ = 0;
};

// World wrench on a segment: force, and torque about the segment CoG.
struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();
};

struct Kinematics {
  std::vector<SpatialTransform<double>> x_up;
  std::vector<Matrix3d> rotation;  // link -> world
  std::vector<Vector3d> position;  // link origin in world
  std::vector<Vector6d> velocity;  // body coordinates
  std::vector<Vector6d> bias;      // v x (S qdot)
};

// Poses, and velocities when v is non-null.
void forward_kinematics(const Multibody& mb, const Eigen::VectorXd& q,
                        const Eigen::VectorXd* v, Kinematics& kin);

// Joint-space inertia (nv x nv) by the composite rigid body algorithm.
Eigen::MatrixXd mass_matrix(const Multibody& mb, const Eigen::VectorXd& q);

// tau = M(q) qdd + bias(q, v) - J^T f_ext, recursive Newton-Euler.
// `gravity` is the field acting on the bodies in the (seat) frame.
Eigen::VectorXd inverse_dynamics(const Multibody& mb, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& qdd,
                                 const Vector3d& gravity,
                                 const std::vector<Wrench>& segment_wrenches);

// Articulated-body forward dynamics. Reuses an internal workspace.
class ArticulatedBodySolver {
 public:
  explicit ArticulatedBodySolver(const Multibody& mb);

  // Needs kin from forward_kinematics(q, &v). Writes qdd and keeps the link
  // spatial accelerations (without the gravity offset) for accelerations().
  void solve(const Eigen::VectorXd& v, const Eigen::VectorXd& tau,
             const std::vector<Vector6d>& link_forces, const Vector3d& gravity,
             const Kinematics& kin, Eigen::VectorXd& qdd);

  // Body-coordinate spatial accelerations from the last solve, with the
  // fictitious base acceleration removed (true accelerations in the seat
  // frame).
  const std::vector<Vector6d>& accelerations() const { return accel_; }

 private:
  const Multibody& mb_;
  std::vector<Matrix6d> ia_;
  std::vector<Vector6d> pa_;
  std::vector<MotionSubspace> u_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>>
      dinv_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>> uu_;
  std::vector<Vector6d> accel_;
  std::vector<Vector6d> accel_gravity_;
};

// Converts segment world wrenches to link body-coordinate spatial forces.
std::vector<Vector6d> link_forces_from_wrenches(
    const Multibody& mb, const Kinematics& kin,
    const std::vector<Wrench>& segment_wrenches);

Eigen::VectorXd forward_dynamics(const Multibody& mb, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& tau,
                                 const std::vector<Wrench>& segment_wrenches);

// Dense route: solves M qdd = tau - bias with a Cholesky factorization.
// Throws Error(kDivergence) if M is not positive definite.
Eigen::VectorXd forward_dynamics_dense(
    const Multibody& mb, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
    const Eigen::VectorXd& tau, const std::vector<Wrench>& segment_wrenches);

// Tangent-space rates: spherical omega, free base [omega; world velocity],
// scalars unchanged. integrate_configuration applies q <- q (+) delta.
Eigen::VectorXd configuration_rate(const Multibody& mb,
                                   const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& v);
void integrate_configuration(const Multibody& mb, Eigen::VectorXd& q,
                             const Eigen::VectorXd& delta);
void normalize_configuration(const Multibody& mb, Eigen::VectorXd& q);

double kinetic_energy(const Multibody& mb, const Kinematics& kin);
// Gravitational potential -sum m g.c (zero reference at the frame origin).
double potential_energy(const Multibody& mb, const Kinematics& kin,
                        const Vector3d& gravity);
// World spatial momentum about the origin: [angular; linear].
Vector6d spatial_momentum(const Multibody& mb, const Kinematics& kin);

// World position of a point fixed in a segment, given in the model frame at
// the reference posture.
Vector3d segment_point_position(const Multibody& mb, const Kinematics& kin,
                                int segment, const Vector3d& model_point);
Vector3d segment_point_velocity(const Multibody& mb, const Kinematics& kin,
                                int segment, const Vector3d& model_point);

}  // namespace ehm

#endif  // EHM_DYNAMICS_HPP_
