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

// Joint locking and the spine/neck lock study.

#ifndef EHM_LOCK_HPP_
#define EHM_LOCK_HPP_

#include <string>
#include <vector>

#include "ehm/model.hpp"
#include "ehm/response.hpp"
#include "ehm/simulation.hpp"

namespace ehm {

// Joints are named by full name or by their leading tag ("J3" matches
// "J3_T12").
struct LockSpec {
  std::string name = "none";
  std::vector<std::string> joints;
};

// none, SL (T12 spherical + compression joint), NL (lower neck).
LockSpec lock_preset(const std::string& name);

// Copy of the model with the listed joints rigid at their restraint
// setpoints and their restraints removed. Throws ReferenceError.
BodyModel apply_lock(const BodyModel& model, const LockSpec& lock);

struct LockStudyRow {
  std::string variant;
  ChannelPair pair;
  double peak_frequency = 0.0;
  double peak_gain = 0.0;
  double mean_gain_low = 0.0;  // mean over 0.5-3 Hz
};

struct LockStudyResult {
  std::vector<LockStudyRow> rows;
  // Per variant, the gain curves in `pairs` order.
  std::vector<std::pair<std::string, std::vector<GainCurve>>> curves;
  std::vector<ChannelPair> pairs;
};

// Simulates each variant under the same scenario and summarises the gains.
LockStudyResult run_lock_study(const BodyModel& model, const Scenario& scenario,
                               const std::vector<LockSpec>& variants,
                               const std::vector<ChannelPair>& pairs,
                               const AnalysisOptions& options = {});

std::string format_lock_table(const LockStudyResult& result);

}  // namespace ehm

#endif  // EHM_LOCK_HPP_
