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

#include "ehm/restraints.hpp"

#include <limits>

#include "ehm/errors.hpp"

namespace ehm {

PidState PidState::zeros(int dof) {
  PidState pid;
  pid.kp = Eigen::VectorXd::Zero(dof);
  pid.ki = Eigen::VectorXd::Zero(dof);
  pid.kd = Eigen::VectorXd::Zero(dof);
  pid.clamp = Eigen::VectorXd::Constant(
      dof, std::numeric_limits<double>::infinity());
  pid.integral = Eigen::VectorXd::Zero(dof);
  pid.previous_error = Eigen::VectorXd::Zero(dof);
  return pid;
}

Eigen::VectorXd pid_force(const PidState& pid, const Eigen::VectorXd& error,
                          const Eigen::VectorXd& error_rate) {
  return pid.kp.cwiseProduct(error) + pid.ki.cwiseProduct(pid.integral) +
         pid.kd.cwiseProduct(error_rate);
}

PidOutput pid_update(const PidState& pid, const Eigen::VectorXd& error,
                     const Eigen::VectorXd& error_rate, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("pid_update: dt must be > 0");
  PidOutput out{Eigen::VectorXd(), pid};
  const Eigen::VectorXd& previous = pid.primed ? pid.previous_error : error;
  out.state.integral += 0.5 * dt * (previous + error);
  out.state.integral =
      out.state.integral.cwiseMax(-pid.clamp).cwiseMin(pid.clamp);
  out.state.previous_error = error;
  out.state.primed = true;
  out.force = pid_force(out.state, error, error_rate);
  return out;
}

double default_integral_clamp(double kp, double ki) {
  if (ki <= 0.0) return 0.0;
  return 10.0 * kp / ki;
}

}  // namespace ehm
