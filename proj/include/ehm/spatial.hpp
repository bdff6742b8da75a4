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

// Rotation helpers and 6D spatial vector algebra (angular part first).
//
// Motion vectors are [omega; v], force vectors are [n; f]. A transform
// X = (E, r) maps coordinates from frame A to frame B, where E rotates A
// coordinates into B coordinates and r is the origin of B expressed in A.

#ifndef EHM_SPATIAL_HPP_
#define EHM_SPATIAL_HPP_

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ehm {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;
using Vector6d = Vector6<double>;
using Matrix6d = Matrix6<double>;

template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Matrix3<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

template <typename Scalar>
Matrix3<Scalar> rotation_x(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vector3<Scalar>::UnitX())
      .toRotationMatrix();
}

template <typename Scalar>
Matrix3<Scalar> rotation_y(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vector3<Scalar>::UnitY())
      .toRotationMatrix();
}

template <typename Scalar>
Matrix3<Scalar> rotation_z(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vector3<Scalar>::UnitZ())
      .toRotationMatrix();
}

// Elementary rotations composed x, then y, then z about the moving axes:
// R = Rx(phi_x) * Ry(phi_y) * Rz(phi_z).
template <typename Scalar>
Matrix3<Scalar> cardan_to_rotation(const Vector3<Scalar>& phi) {
  return rotation_x(phi(0)) * rotation_y(phi(1)) * rotation_z(phi(2));
}

// Maps Cardan rates to the angular velocity expressed in the rotated (child)
// frame: omega = B(phi) * phi_dot. det(B) = cos(phi_y).
template <typename Scalar>
Matrix3<Scalar> cardan_rate_matrix(const Vector3<Scalar>& phi) {
  using std::cos;
  using std::sin;
  const Scalar cy = cos(phi(1)), sy = sin(phi(1));
  const Scalar cz = cos(phi(2)), sz = sin(phi(2));
  Matrix3<Scalar> b;
  b << cy * cz, sz, Scalar(0),
       -cy * sz, cz, Scalar(0),
       sy, Scalar(0), Scalar(1);
  return b;
}

// Rotation vector -> unit quaternion.
template <typename Scalar>
Eigen::Quaternion<Scalar> quaternion_exp(const Vector3<Scalar>& rotvec) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar angle2 = rotvec.squaredNorm();
  Scalar w, k;
  if (angle2 < Scalar(1e-16)) {
    // Taylor terms keep the map smooth through zero.
    w = Scalar(1) - angle2 / Scalar(8);
    k = Scalar(0.5) - angle2 / Scalar(48);
  } else {
    const Scalar angle = sqrt(angle2);
    w = cos(angle / Scalar(2));
    k = sin(angle / Scalar(2)) / angle;
  }
  return Eigen::Quaternion<Scalar>(w, k * rotvec(0), k * rotvec(1),
                                   k * rotvec(2));
}

template <typename Scalar>
struct SpatialTransform {
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();  // E
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();   // r

  static SpatialTransform identity() { return {}; }

  Vector6<Scalar> apply_motion(const Vector6<Scalar>& m) const {
    Vector6<Scalar> out;
    const Vector3<Scalar> w = m.template head<3>();
    out.template head<3>() = rotation * w;
    out.template tail<3>() =
        rotation * (m.template tail<3>() - translation.cross(w));
    return out;
  }

  Vector6<Scalar> apply_force(const Vector6<Scalar>& f) const {
    Vector6<Scalar> out;
    const Vector3<Scalar> lin = f.template tail<3>();
    out.template head<3>() =
        rotation * (f.template head<3>() - translation.cross(lin));
    out.template tail<3>() = rotation * lin;
    return out;
  }

  // X^T applied to a force: maps a B-frame force back to frame A.
  Vector6<Scalar> apply_transpose_force(const Vector6<Scalar>& f) const {
    Vector6<Scalar> out;
    const Vector3<Scalar> lin = rotation.transpose() * f.template tail<3>();
    out.template head<3>() =
        rotation.transpose() * f.template head<3>() + translation.cross(lin);
    out.template tail<3>() = lin;
    return out;
  }

  // X^-1 applied to a motion: maps a B-frame motion back to frame A.
  Vector6<Scalar> apply_inverse_motion(const Vector6<Scalar>& m) const {
    Vector6<Scalar> out;
    const Vector3<Scalar> w = rotation.transpose() * m.template head<3>();
    out.template head<3>() = w;
    out.template tail<3>() =
        rotation.transpose() * m.template tail<3>() + translation.cross(w);
    return out;
  }

  // Plucker matrix acting on motion vectors.
  Matrix6<Scalar> motion_matrix() const {
    Matrix6<Scalar> x;
    x.template topLeftCorner<3, 3>() = rotation;
    x.template topRightCorner<3, 3>().setZero();
    x.template bottomLeftCorner<3, 3>() = -rotation * skew(translation);
    x.template bottomRightCorner<3, 3>() = rotation;
    return x;
  }
};

// (this o first): first maps A->B, this maps B->C; result maps A->C.
template <typename Scalar>
SpatialTransform<Scalar> compose(const SpatialTransform<Scalar>& second,
                                 const SpatialTransform<Scalar>& first) {
  SpatialTransform<Scalar> out;
  out.rotation = second.rotation * first.rotation;
  out.translation =
      first.translation + first.rotation.transpose() * second.translation;
  return out;
}

// Rigid-body spatial inertia about the frame origin; com and the central
// inertia are given in the same frame.
template <typename Scalar>
Matrix6<Scalar> spatial_inertia(Scalar mass, const Vector3<Scalar>& com,
                                const Matrix3<Scalar>& central_inertia) {
  const Matrix3<Scalar> c = skew(com);
  Matrix6<Scalar> inertia;
  inertia.template topLeftCorner<3, 3>() =
      central_inertia + mass * c * c.transpose();
  inertia.template topRightCorner<3, 3>() = mass * c;
  inertia.template bottomLeftCorner<3, 3>() = mass * c.transpose();
  inertia.template bottomRightCorner<3, 3>() =
      mass * Matrix3<Scalar>::Identity();
  return inertia;
}

// v x m (motion cross product).
template <typename Scalar>
Vector6<Scalar> cross_motion(const Vector6<Scalar>& v,
                             const Vector6<Scalar>& m) {
  const Vector3<Scalar> w = v.template head<3>();
  const Vector3<Scalar> vl = v.template tail<3>();
  Vector6<Scalar> out;
  out.template head<3>() = w.cross(m.template head<3>());
  out.template tail<3>() =
      w.cross(m.template tail<3>()) + vl.cross(m.template head<3>());
  return out;
}

// v x* f (force cross product).
template <typename Scalar>
Vector6<Scalar> cross_force(const Vector6<Scalar>& v,
                            const Vector6<Scalar>& f) {
  const Vector3<Scalar> w = v.template head<3>();
  const Vector3<Scalar> vl = v.template tail<3>();
  Vector6<Scalar> out;
  out.template head<3>() =
      w.cross(f.template head<3>()) + vl.cross(f.template tail<3>());
  out.template tail<3>() = w.cross(f.template tail<3>());
  return out;
}

}  // namespace ehm

#endif  // EHM_SPATIAL_HPP_
