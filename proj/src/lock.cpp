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

#include "ehm/lock.hpp"

#include <algorithm>
#include <cstdio>

#include <Eigen/Geometry>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

int find_joint(const BodyModel& model, const std::string& tag) {
  for (size_t i = 0; i < model.joints.size(); ++i) {
    const std::string& n = model.joints[i].name;
    if (n == tag || n.rfind(tag + "_", 0) == 0) return static_cast<int>(i);
  }
  throw ReferenceError("lock: no joint named '" + tag + "'");
}

double setpoint(const RestraintSpec* r, size_t i) {
  return r && i < r->setpoint.size() ? r->setpoint[i] : 0.0;
}

}  // namespace

LockSpec lock_preset(const std::string& name) {
  if (name == "none") return {"none", {}};
  if (name == "SL") return {"SL", {"J3"}};
  if (name == "NL") return {"NL", {"J2"}};
  throw InvalidArgument("unknown lock preset '" + name + "' (none, SL, NL)");
}

BodyModel apply_lock(const BodyModel& model, const LockSpec& lock) {
  BodyModel out = model;
  for (const std::string& tag : lock.joints) {
    JointSpec& j = out.joints[static_cast<size_t>(find_joint(out, tag))];
    const RestraintSpec* r = out.restraint_for(j.name);
    Matrix3d rot = Matrix3d::Identity();
    Vector3d trans = Vector3d::Zero();
    switch (j.kind) {
      case JointKind::kSpherical:
        rot = cardan_to_rotation<double>(
            Vector3d(setpoint(r, 0), setpoint(r, 1), setpoint(r, 2)));
        break;
      case JointKind::kUniversal:
        rot = rotation_x(setpoint(r, 0)) * rotation_y(setpoint(r, 1));
        break;
      case JointKind::kRevolute:
        rot = Eigen::AngleAxisd(setpoint(r, 0), j.axis).toRotationMatrix();
        break;
      case JointKind::kSphericalPlusTranslation:
        rot = cardan_to_rotation<double>(
            Vector3d(setpoint(r, 0), setpoint(r, 1), setpoint(r, 2)));
        trans = setpoint(r, 3) * j.axis;
        break;
      case JointKind::kPrismatic:
        trans = setpoint(r, 0) * j.axis;
        break;
      case JointKind::kLocked:
        continue;
    }
    j.kind = JointKind::kLocked;
    j.lock_rotation = rot;
    j.lock_translation = trans;
    const std::string name = j.name;
    std::erase_if(out.restraints,
                  [&](const RestraintSpec& s) { return s.joint == name; });
  }
  return out;
}

LockStudyResult run_lock_study(const BodyModel& model, const Scenario& scenario,
                               const std::vector<LockSpec>& variants,
                               const std::vector<ChannelPair>& pairs,
                               const AnalysisOptions& options) {
  LockStudyResult result;
  result.pairs = pairs;
  for (const LockSpec& lock : variants) {
    const Trajectory traj = simulate(apply_lock(model, lock), scenario);
    std::vector<GainCurve> curves = trajectory_gains(traj, pairs, options);
    for (size_t i = 0; i < pairs.size(); ++i) {
      const PeakSummary peak = gain_peak(curves[i]);
      result.rows.push_back({lock.name, pairs[i], peak.frequency, peak.gain,
                             band_mean(curves[i], 0.5, 3.0)});
    }
    result.curves.emplace_back(lock.name, std::move(curves));
  }
  return result;
}

std::string format_lock_table(const LockStudyResult& result) {
  std::string out =
      "variant,input,output,peak_frequency_hz,peak_gain,mean_gain_0.5_3hz\n";
  char buf[256];
  for (const LockStudyRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.17g,%.17g,%.17g\n",
                  r.variant.c_str(), r.pair.input.c_str(),
                  r.pair.output.c_str(), r.peak_frequency, r.peak_gain,
                  r.mean_gain_low);
    out += buf;
  }
  return out;
}

}  // namespace ehm
