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

// Penetration contact between segment superellipsoids and seat geometry.

#ifndef EHM_CONTACT_HPP_
#define EHM_CONTACT_HPP_

#include "ehm/model.hpp"
#include "ehm/spatial.hpp"

namespace ehm {

// World placement of a geometry: superellipsoid centre and axes, or a point
// on the plane and the rotation applied to ContactGeom::normal.
struct Pose {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d position = Vector3d::Zero();
};

// Rigid velocity of the body owning a geometry: linear velocity of the pose
// origin and angular velocity, both in world coordinates.
struct BodyVelocity {
  Vector3d linear = Vector3d::Zero();
  Vector3d angular = Vector3d::Zero();

  Vector3d at(const Pose& pose, const Vector3d& point) const {
    return linear + angular.cross(point - pose.position);
  }
};

struct ContactResult {
  bool in_contact = false;
  double depth = 0.0;                    // m
  Vector3d point = Vector3d::Zero();     // deepest point of A, world
  Vector3d normal = Vector3d::UnitZ();   // from B into A
  Vector3d relative_velocity = Vector3d::Zero();  // v_A - v_B at point
};

// Support point of |x/a|^n + |y/b|^n + |z/c|^n <= 1 in a local direction.
Vector3d superellipsoid_support(const Vector3d& semi_axes, int degree,
                                const Vector3d& direction);
// max over the shape of direction . x.
double superellipsoid_support_value(const Vector3d& semi_axes, int degree,
                                    const Vector3d& direction);
// |x/a|^n + |y/b|^n + |z/c|^n; < 1 inside.
double superellipsoid_inside_outside(const Vector3d& semi_axes, int degree,
                                     const Vector3d& point);

// A must be a superellipsoid; B a plane or superellipsoid. Throws
// InvalidArgument on non-finite poses or unsupported pairs.
// direction_hint (A towards B, superellipsoid pairs only) seeds the depth
// search when it beats the centre line, and receives the final direction.
ContactResult detect_penetration(const ContactGeom& a, const Pose& pose_a,
                                 const ContactGeom& b, const Pose& pose_b,
                                 const BodyVelocity& velocity_a = {},
                                 const BodyVelocity& velocity_b = {},
                                 Vector3d* direction_hint = nullptr);

// Force on A at result.point (B receives the negative). Zero when not in
// contact.
Vector3d contact_force(const ContactResult& result,
                       const ContactParams& params);

}  // namespace ehm

#endif  // EHM_CONTACT_HPP_
