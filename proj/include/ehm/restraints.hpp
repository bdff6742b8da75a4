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

// Joint restraints: Cardan spring-dampers, PID posture controllers and
// point (soft tissue) restraints.

#ifndef EHM_RESTRAINTS_HPP_
#define EHM_RESTRAINTS_HPP_

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "ehm/spatial.hpp"

namespace ehm {

// Distance from +/-pi/2 on the middle angle below which the x-y-z sequence
// is treated as gimbal locked.
inline constexpr double kGimbalMargin = 1e-3;

template <typename Scalar>
struct CardanAngles {
  Vector3<Scalar> angles = Vector3<Scalar>::Zero();
  bool near_gimbal_lock = false;
};

// Inverse of cardan_to_rotation. Near gimbal lock the z angle is pinned to
// zero and the residual rotation goes into x.
template <typename Scalar>
CardanAngles<Scalar> cardan_angles(const Matrix3<Scalar>& r) {
  using std::abs;
  using std::asin;
  using std::atan2;
  CardanAngles<Scalar> out;
  const Scalar sy = r(0, 2) > Scalar(1)    ? Scalar(1)
                    : r(0, 2) < Scalar(-1) ? Scalar(-1)
                                           : r(0, 2);
  out.angles(1) = asin(sy);
  if (abs(out.angles(1)) >= std::numbers::pi / 2 - kGimbalMargin) {
    out.near_gimbal_lock = true;
    out.angles(2) = Scalar(0);
    out.angles(0) = atan2(r(2, 1), r(1, 1));
  } else {
    out.angles(0) = atan2(-r(1, 2), r(2, 2));
    out.angles(2) = atan2(-r(0, 1), r(0, 0));
  }
  return out;
}

// Per-axis torque -K (phi - phi0) - C phi_dot, acting on the child and
// reacting on the parent.
inline Vector3d cardan_restraint_torque(const Vector3d& angles,
                                        const Vector3d& angle_rates,
                                        const Vector3d& stiffness,
                                        const Vector3d& damping,
                                        const Vector3d& setpoint =
                                            Vector3d::Zero()) {
  return -stiffness.cwiseProduct(angles - setpoint) -
         damping.cwiseProduct(angle_rates);
}

// PID state for the DoF of one joint. error = setpoint - q and
// error_rate = -q_dot.
struct PidState {
  Eigen::VectorXd kp;
  Eigen::VectorXd ki;
  Eigen::VectorXd kd;
  Eigen::VectorXd clamp;  // bound on |integral|
  Eigen::VectorXd integral;
  Eigen::VectorXd previous_error;
  bool primed = false;  // previous_error holds a real sample

  static PidState zeros(int dof);
};

struct PidOutput {
  Eigen::VectorXd force;
  PidState state;
};

// Force with the integral left untouched.
Eigen::VectorXd pid_force(const PidState& pid, const Eigen::VectorXd& error,
                          const Eigen::VectorXd& error_rate);

// Advances the integral by the trapezoidal rule over dt, clamps it and
// returns the force with the updated integral.
PidOutput pid_update(const PidState& pid, const Eigen::VectorXd& error,
                     const Eigen::VectorXd& error_rate, double dt);

// Integral bound used when a restraint does not give one: the integral
// torque may reach 10 x the proportional torque at 1 rad (or 1 m).
double default_integral_clamp(double kp, double ki);

// F = -k d - c v on the segment point; the anchor gets -F.
inline Vector3d point_restraint_force(const Vector3d& displacement,
                                      const Vector3d& velocity,
                                      double stiffness, double damping) {
  return -stiffness * displacement - damping * velocity;
}

}  // namespace ehm

#endif  // EHM_RESTRAINTS_HPP_
