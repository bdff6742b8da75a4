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

#include "ehm/dynamics.hpp"

#include <cmath>
#include <functional>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

Eigen::Quaterniond read_quaternion(const Eigen::VectorXd& q, int index) {
  return Eigen::Quaterniond(q(index), q(index + 1), q(index + 2),
                            q(index + 3));
}

void write_quaternion(Eigen::VectorXd& q, int index,
                      const Eigen::Quaterniond& quat) {
  q(index) = quat.w();
  q(index + 1) = quat.x();
  q(index + 2) = quat.y();
  q(index + 3) = quat.z();
}

MotionSubspace make_subspace(LinkJointType type, const Vector3d& axis) {
  MotionSubspace s;
  switch (type) {
    case LinkJointType::kFree:
      s = Matrix6d::Identity();
      break;
    case LinkJointType::kSpherical:
      s.setZero(6, 3);
      s.topRows<3>().setIdentity();
      break;
    case LinkJointType::kRevolute:
      s.setZero(6, 1);
      s.block<3, 1>(0, 0) = axis;
      break;
    case LinkJointType::kPrismatic:
      s.setZero(6, 1);
      s.block<3, 1>(3, 0) = axis;
      break;
    case LinkJointType::kFixed:
      s.resize(6, 0);
      break;
  }
  return s;
}

int joint_nq(LinkJointType type) {
  switch (type) {
    case LinkJointType::kFree: return 7;
    case LinkJointType::kSpherical: return 4;
    case LinkJointType::kRevolute:
    case LinkJointType::kPrismatic: return 1;
    case LinkJointType::kFixed: return 0;
  }
  return 0;
}

// Joint transform from the joint frame to the child link frame.
SpatialTransform<double> joint_transform(const Link& link,
                                         const Eigen::VectorXd& q) {
  SpatialTransform<double> x;
  switch (link.type) {
    case LinkJointType::kFree:
      x.rotation =
          read_quaternion(q, link.q_index + 3).toRotationMatrix().transpose();
      x.translation = q.segment<3>(link.q_index);
      break;
    case LinkJointType::kSpherical:
      x.rotation =
          read_quaternion(q, link.q_index).toRotationMatrix().transpose();
      break;
    case LinkJointType::kRevolute:
      x.rotation = Eigen::AngleAxisd(q(link.q_index), link.axis)
                       .toRotationMatrix()
                       .transpose();
      break;
    case LinkJointType::kPrismatic:
      x.translation = link.axis * q(link.q_index);
      break;
    case LinkJointType::kFixed:
      break;
  }
  return x;
}

}  // namespace

Multibody::Multibody(const BodyModel& model) : gravity_(model.gravity) {
  const ValidationReport report = validate_model(model);
  if (!report.connected) {
    throw ReferenceError("model '" + model.name +
                         "': joints do not form a tree rooted at '" +
                         model.root + "'");
  }
  segment_link_.assign(model.segments.size(), -1);
  joint_coordinates_.assign(model.joints.size(), {});

  auto add_link = [this](Link link) {
    link.subspace = make_subspace(link.type, link.axis);
    link.nv = static_cast<int>(link.subspace.cols());
    link.nq = joint_nq(link.type);
    link.q_index = nq_;
    link.v_index = nv_;
    nq_ += link.nq;
    nv_ += link.nv;
    links_.push_back(link);
    return static_cast<int>(links_.size()) - 1;
  };
  auto attach_segment = [this, &model](int link_index, int segment) {
    Link& link = links_[link_index];
    const Segment& seg = model.segments[segment];
    link.segment = segment;
    link.mass = seg.mass;
    link.com = seg.cog - link.origin;
    link.inertia = spatial_inertia<double>(
        seg.mass, link.com, seg.inertia_diag.asDiagonal().toDenseMatrix());
    segment_link_[segment] = link_index;
  };

  const int root_segment = *model.segment_index(model.root);
  {
    Link root;
    root.origin = model.segments[root_segment].cog;
    if (model.base == BaseKind::kFree) {
      root.type = LinkJointType::kFree;
    } else {
      root.type = LinkJointType::kFixed;
      root.tree.translation = root.origin;
    }
    attach_segment(add_link(root), root_segment);
  }

  std::function<void(int)> visit = [&](int parent_segment) {
    for (size_t ji = 0; ji < model.joints.size(); ++ji) {
      const JointSpec& joint = model.joints[ji];
      if (joint.parent != model.segments[parent_segment].name) continue;
      const int parent_link = segment_link_[parent_segment];
      const int child_segment = *model.segment_index(joint.child);
      Link first;
      first.parent = parent_link;
      first.joint = static_cast<int>(ji);
      first.origin = joint.position;
      first.tree.translation = joint.position - links_[parent_link].origin;
      auto& coords = joint_coordinates_[ji];
      int child_link = -1;
      switch (joint.kind) {
        case JointKind::kSpherical: {
          first.type = LinkJointType::kSpherical;
          child_link = add_link(first);
          for (int k = 0; k < 3; ++k) {
            coords.push_back({JointCoordinate::Kind::kCardan, child_link, k});
          }
          break;
        }
        case JointKind::kRevolute:
        case JointKind::kPrismatic: {
          first.type = joint.kind == JointKind::kRevolute
                           ? LinkJointType::kRevolute
                           : LinkJointType::kPrismatic;
          first.axis = joint.axis;
          child_link = add_link(first);
          coords.push_back({JointCoordinate::Kind::kScalar, child_link, 0});
          break;
        }
        case JointKind::kUniversal: {
          first.type = LinkJointType::kRevolute;
          first.axis = Vector3d::UnitX();
          const int virtual_link = add_link(first);
          Link second;
          second.parent = virtual_link;
          second.joint = static_cast<int>(ji);
          second.origin = joint.position;
          second.type = LinkJointType::kRevolute;
          second.axis = Vector3d::UnitY();
          child_link = add_link(second);
          coords.push_back({JointCoordinate::Kind::kScalar, virtual_link, 0});
          coords.push_back({JointCoordinate::Kind::kScalar, child_link, 0});
          break;
        }
        case JointKind::kSphericalPlusTranslation: {
          first.type = LinkJointType::kPrismatic;
          first.axis = joint.axis;
          const int virtual_link = add_link(first);
          Link second;
          second.parent = virtual_link;
          second.joint = static_cast<int>(ji);
          second.origin = joint.position;
          second.type = LinkJointType::kSpherical;
          child_link = add_link(second);
          for (int k = 0; k < 3; ++k) {
            coords.push_back({JointCoordinate::Kind::kCardan, child_link, k});
          }
          coords.push_back({JointCoordinate::Kind::kScalar, virtual_link, 0});
          break;
        }
        case JointKind::kLocked: {
          first.type = LinkJointType::kFixed;
          first.tree.rotation = joint.lock_rotation.transpose();
          first.tree.translation += joint.lock_translation;
          child_link = add_link(first);
          break;
        }
      }
      attach_segment(child_link, child_segment);
      visit(child_segment);
    }
  };
  visit(root_segment);
}

Eigen::VectorXd Multibody::neutral_configuration() const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nq_);
  for (const Link& link : links_) {
    if (link.type == LinkJointType::kFree) {
      q.segment<3>(link.q_index) = link.origin;
      q(link.q_index + 3) = 1.0;
    } else if (link.type == LinkJointType::kSpherical) {
      q(link.q_index) = 1.0;
    }
  }
  return q;
}

void forward_kinematics(const Multibody& mb, const Eigen::VectorXd& q,
                        const Eigen::VectorXd* v, Kinematics& kin) {
  const auto& links = mb.links();
  const size_t n = links.size();
  kin.x_up.resize(n);
  kin.rotation.resize(n);
  kin.position.resize(n);
  if (v) {
    kin.velocity.resize(n);
    kin.bias.resize(n);
  }
  for (size_t i = 0; i < n; ++i) {
    const Link& link = links[i];
    kin.x_up[i] = compose(joint_transform(link, q), link.tree);
    const Matrix3d parent_rotation =
        link.parent < 0 ? Matrix3d::Identity() : kin.rotation[link.parent];
    const Vector3d parent_position =
        link.parent < 0 ? Vector3d::Zero() : kin.position[link.parent];
    kin.rotation[i] = parent_rotation * kin.x_up[i].rotation.transpose();
    kin.position[i] = parent_position + parent_rotation * kin.x_up[i].translation;
    if (v) {
      Vector6d joint_velocity = Vector6d::Zero();
      if (link.nv > 0) {
        joint_velocity = link.subspace * v->segment(link.v_index, link.nv);
      }
      Vector6d vel = joint_velocity;
      if (link.parent >= 0) {
        vel += kin.x_up[i].apply_motion(kin.velocity[link.parent]);
      }
      kin.velocity[i] = vel;
      kin.bias[i] = cross_motion(vel, joint_velocity);
    }
  }
}

std::vector<Vector6d> link_forces_from_wrenches(
    const Multibody& mb, const Kinematics& kin,
    const std::vector<Wrench>& segment_wrenches) {
  const auto& links = mb.links();
  std::vector<Vector6d> forces(links.size(), Vector6d::Zero());
  for (size_t s = 0; s < segment_wrenches.size(); ++s) {
    const Wrench& w = segment_wrenches[s];
    if (w.force.isZero(0.0) && w.torque.isZero(0.0)) continue;
    const int li = mb.link_of_segment(static_cast<int>(s));
    const Link& link = links[li];
    const Matrix3d& r = kin.rotation[li];
    const Vector3d com_world = r * link.com;
    Vector6d f;
    f.head<3>() = r.transpose() * (w.torque + com_world.cross(w.force));
    f.tail<3>() = r.transpose() * w.force;
    forces[li] = f;
  }
  return forces;
}

Eigen::MatrixXd mass_matrix(const Multibody& mb, const Eigen::VectorXd& q) {
  Kinematics kin;
  forward_kinematics(mb, q, nullptr, kin);
  const auto& links = mb.links();
  const int n = static_cast<int>(links.size());
  std::vector<Matrix6d> composite(n);
  for (int i = 0; i < n; ++i) composite[i] = links[i].inertia;
  for (int i = n - 1; i >= 0; --i) {
    if (links[i].parent >= 0) {
      const Matrix6d x = kin.x_up[i].motion_matrix();
      composite[links[i].parent] += x.transpose() * composite[i] * x;
    }
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(mb.nv(), mb.nv());
  for (int i = 0; i < n; ++i) {
    const Link& li = links[i];
    if (li.nv == 0) continue;
    Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, 6> f =
        composite[i] * li.subspace;
    h.block(li.v_index, li.v_index, li.nv, li.nv) = li.subspace.transpose() * f;
    int j = i;
    while (links[j].parent >= 0) {
      for (int c = 0; c < f.cols(); ++c) {
        f.col(c) = kin.x_up[j].apply_transpose_force(f.col(c));
      }
      j = links[j].parent;
      const Link& lj = links[j];
      if (lj.nv == 0) continue;
      h.block(lj.v_index, li.v_index, lj.nv, li.nv) = lj.subspace.transpose() * f;
      h.block(li.v_index, lj.v_index, li.nv, lj.nv) =
          h.block(lj.v_index, li.v_index, lj.nv, li.nv).transpose();
    }
  }
  return h;
}

Eigen::VectorXd inverse_dynamics(const Multibody& mb, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& qdd,
                                 const Vector3d& gravity,
                                 const std::vector<Wrench>& segment_wrenches) {
  Kinematics kin;
  forward_kinematics(mb, q, &v, kin);
  const auto& links = mb.links();
  const int n = static_cast<int>(links.size());
  const std::vector<Vector6d> fext =
      link_forces_from_wrenches(mb, kin, segment_wrenches);
  Vector6d base_accel = Vector6d::Zero();
  base_accel.tail<3>() = -gravity;
  std::vector<Vector6d> accel(n), force(n);
  for (int i = 0; i < n; ++i) {
    const Link& link = links[i];
    const Vector6d parent_accel =
        link.parent < 0 ? base_accel : accel[link.parent];
    Vector6d a = kin.x_up[i].apply_motion(parent_accel) + kin.bias[i];
    if (link.nv > 0) a += link.subspace * qdd.segment(link.v_index, link.nv);
    accel[i] = a;
    const Vector6d momentum = link.inertia * kin.velocity[i];
    force[i] = link.inertia * a + cross_force(kin.velocity[i], momentum) -
               fext[i];
  }
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(mb.nv());
  for (int i = n - 1; i >= 0; --i) {
    const Link& link = links[i];
    if (link.nv > 0) {
      tau.segment(link.v_index, link.nv) = link.subspace.transpose() * force[i];
    }
    if (link.parent >= 0) {
      force[link.parent] += kin.x_up[i].apply_transpose_force(force[i]);
    }
  }
  return tau;
}

ArticulatedBodySolver::ArticulatedBodySolver(const Multibody& mb) : mb_(mb) {
  const size_t n = mb.links().size();
  ia_.resize(n);
  pa_.resize(n);
  u_.resize(n);
  dinv_.resize(n);
  uu_.resize(n);
  accel_.resize(n);
  accel_gravity_.resize(n);
}

void ArticulatedBodySolver::solve(const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& tau,
                                  const std::vector<Vector6d>& link_forces,
                                  const Vector3d& gravity,
                                  const Kinematics& kin, Eigen::VectorXd& qdd) {
  (void)v;
  const auto& links = mb_.links();
  const int n = static_cast<int>(links.size());
  qdd.resize(mb_.nv());
  for (int i = 0; i < n; ++i) {
    ia_[i] = links[i].inertia;
    pa_[i] = cross_force(kin.velocity[i], Vector6d(ia_[i] * kin.velocity[i])) -
             link_forces[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    const Link& link = links[i];
    Matrix6d ia = ia_[i];
    Vector6d pa = pa_[i];
    if (link.nv > 0) {
      u_[i] = ia_[i] * link.subspace;
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6> d =
          link.subspace.transpose() * u_[i];
      dinv_[i] = d.inverse();
      if (!dinv_[i].allFinite()) {
        throw Error(ErrorCode::kDivergence,
                    "singular articulated inertia at link " +
                        std::to_string(i));
      }
      uu_[i] = tau.segment(link.v_index, link.nv) -
               link.subspace.transpose() * pa_[i];
      ia -= u_[i] * dinv_[i] * u_[i].transpose();
      pa += u_[i] * (dinv_[i] * uu_[i]);
    }
    pa += ia * kin.bias[i];
    if (link.parent >= 0) {
      const Matrix6d x = kin.x_up[i].motion_matrix();
      ia_[link.parent] += x.transpose() * ia * x;
      pa_[link.parent] += kin.x_up[i].apply_transpose_force(pa);
    }
  }
  Vector6d base_accel = Vector6d::Zero();
  base_accel.tail<3>() = -gravity;
  for (int i = 0; i < n; ++i) {
    const Link& link = links[i];
    const Vector6d parent_accel =
        link.parent < 0 ? base_accel : accel_gravity_[link.parent];
    Vector6d a = kin.x_up[i].apply_motion(parent_accel) + kin.bias[i];
    if (link.nv > 0) {
      auto qdd_i = qdd.segment(link.v_index, link.nv);
      qdd_i = dinv_[i] * (uu_[i] - u_[i].transpose() * a);
      a += link.subspace * qdd_i;
    }
    accel_gravity_[i] = a;
    accel_[i] = a;
    accel_[i].tail<3>() += kin.rotation[i].transpose() * gravity;
  }
}

Eigen::VectorXd forward_dynamics(const Multibody& mb, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& tau,
                                 const std::vector<Wrench>& segment_wrenches) {
  Kinematics kin;
  forward_kinematics(mb, q, &v, kin);
  ArticulatedBodySolver solver(mb);
  Eigen::VectorXd qdd;
  solver.solve(v, tau, link_forces_from_wrenches(mb, kin, segment_wrenches),
               mb.gravity(), kin, qdd);
  return qdd;
}

Eigen::VectorXd forward_dynamics_dense(
    const Multibody& mb, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
    const Eigen::VectorXd& tau, const std::vector<Wrench>& segment_wrenches) {
  const Eigen::MatrixXd m = mass_matrix(mb, q);
  const Eigen::VectorXd bias =
      inverse_dynamics(mb, q, v, Eigen::VectorXd::Zero(mb.nv()), mb.gravity(),
                       segment_wrenches);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kDivergence,
                "mass matrix is not positive definite");
  }
  return llt.solve(tau - bias);
}

Eigen::VectorXd configuration_rate(const Multibody& mb,
                                   const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& v) {
  Eigen::VectorXd rate = v;
  for (const Link& link : mb.links()) {
    if (link.type == LinkJointType::kFree) {
      const Matrix3d r = read_quaternion(q, link.q_index + 3).toRotationMatrix();
      rate.segment<3>(link.v_index + 3) = r * v.segment<3>(link.v_index + 3);
    }
  }
  return rate;
}

void integrate_configuration(const Multibody& mb, Eigen::VectorXd& q,
                             const Eigen::VectorXd& delta) {
  for (const Link& link : mb.links()) {
    switch (link.type) {
      case LinkJointType::kFree: {
        q.segment<3>(link.q_index) += delta.segment<3>(link.v_index + 3);
        Eigen::Quaterniond quat =
            read_quaternion(q, link.q_index + 3) *
            quaternion_exp<double>(delta.segment<3>(link.v_index));
        write_quaternion(q, link.q_index + 3, quat.normalized());
        break;
      }
      case LinkJointType::kSpherical: {
        Eigen::Quaterniond quat =
            read_quaternion(q, link.q_index) *
            quaternion_exp<double>(delta.segment<3>(link.v_index));
        write_quaternion(q, link.q_index, quat.normalized());
        break;
      }
      case LinkJointType::kRevolute:
      case LinkJointType::kPrismatic:
        q(link.q_index) += delta(link.v_index);
        break;
      case LinkJointType::kFixed:
        break;
    }
  }
}

void normalize_configuration(const Multibody& mb, Eigen::VectorXd& q) {
  for (const Link& link : mb.links()) {
    int index = -1;
    if (link.type == LinkJointType::kFree) index = link.q_index + 3;
    if (link.type == LinkJointType::kSpherical) index = link.q_index;
    if (index >= 0) q.segment<4>(index).normalize();
  }
}

double kinetic_energy(const Multibody& mb, const Kinematics& kin) {
  double energy = 0.0;
  const auto& links = mb.links();
  for (size_t i = 0; i < links.size(); ++i) {
    energy += 0.5 * kin.velocity[i].dot(links[i].inertia * kin.velocity[i]);
  }
  return energy;
}

double potential_energy(const Multibody& mb, const Kinematics& kin,
                        const Vector3d& gravity) {
  double energy = 0.0;
  const auto& links = mb.links();
  for (size_t i = 0; i < links.size(); ++i) {
    const Vector3d com = kin.position[i] + kin.rotation[i] * links[i].com;
    energy -= links[i].mass * gravity.dot(com);
  }
  return energy;
}

Vector6d spatial_momentum(const Multibody& mb, const Kinematics& kin) {
  Vector6d total = Vector6d::Zero();
  const auto& links = mb.links();
  for (size_t i = 0; i < links.size(); ++i) {
    const Vector6d h = links[i].inertia * kin.velocity[i];
    const Vector3d lin = kin.rotation[i] * h.tail<3>();
    total.head<3>() += kin.rotation[i] * h.head<3>() + kin.position[i].cross(lin);
    total.tail<3>() += lin;
  }
  return total;
}

Vector3d segment_point_position(const Multibody& mb, const Kinematics& kin,
                                int segment, const Vector3d& model_point) {
  const int li = mb.link_of_segment(segment);
  return kin.position[li] +
         kin.rotation[li] * (model_point - mb.links()[li].origin);
}

Vector3d segment_point_velocity(const Multibody& mb, const Kinematics& kin,
                                int segment, const Vector3d& model_point) {
  const int li = mb.link_of_segment(segment);
  const Vector3d local = model_point - mb.links()[li].origin;
  const Vector6d& v = kin.velocity[li];
  return kin.rotation[li] * (v.tail<3>() + v.head<3>().cross(local));
}

}  // namespace ehm
