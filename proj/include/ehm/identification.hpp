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

// Parameter identification: bounded, derivative-free minimisation of the
// summed gain criterion over restraint and contact parameters.

#ifndef EHM_IDENTIFICATION_HPP_
#define EHM_IDENTIFICATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehm/analysis.hpp"
#include "ehm/model.hpp"
#include "ehm/response.hpp"
#include "ehm/simulation.hpp"

namespace ehm {

// Binding of one parameter to a model field. Paths:
//   restraint/<joint>/<stiffness|damping|integral_gain|setpoint>/<dof>
//   contact/<pair>/<stiffness|damping|friction|v_reg>
//   point_restraint/<name>/<stiffness|damping>
struct ParamSlot {
  std::string path;
  std::string unit;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scale = true;
  bool operator==(const ParamSlot&) const = default;
};

struct ParamVector {
  std::vector<ParamSlot> slots;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  // Map to and from the unit cube (log-spaced where log_scale).
  Eigen::VectorXd normalized() const;
  static ParamVector from_normalized(const std::vector<ParamSlot>& slots,
                                     const Eigen::VectorXd& unit);
  bool within_bounds() const;
};

// Throws ReferenceError for paths that do not resolve and InvalidArgument
// for bad bounds.
void check_slots(const BodyModel& model, const std::vector<ParamSlot>& slots);
BodyModel apply_params(const BodyModel& model, const ParamVector& params);
ParamVector extract_params(const BodyModel& model,
                           const std::vector<ParamSlot>& slots);

inline constexpr double kDivergencePenalty = 1e6;

struct FitChannel {
  Axis direction = Axis::kZ;
  ChannelPair pair;
  GainCurve reference;
  double weight = 1.0;
};

struct FitProblem {
  BodyModel model;
  std::vector<Scenario> scenarios;  // one per excited direction
  std::vector<FitChannel> channels;
  std::vector<ParamSlot> slots;
  AnalysisOptions analysis;
  double relative_weight = kRelativeGainWeight;
  int budget = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
};

// Default weights: head and t8 channels 1, pelvis 0.5, others 1.
double default_channel_weight(const std::string& output);

// The shortened scenario used while fitting (20 s, 5 s settling).
Scenario fit_scenario(Axis axis, std::uint64_t seed);

struct CostResult {
  double total = 0.0;
  std::vector<double> per_channel;
  bool diverged = false;
};

// Simulates every scenario and sums the weighted criterion of each channel
// against its reference. A diverged run costs kDivergencePenalty, spread
// over the channels so that the weighted sum still equals the total.
CostResult evaluate_cost(const FitProblem& problem, const ParamVector& params);

// Simulated gain curves of the problem's channels, on the reference grids.
std::vector<GainCurve> simulate_channels(const FitProblem& problem,
                                         const BodyModel& model);

struct HistoryEntry {
  int index = 0;
  Eigen::VectorXd values;
  CostResult cost;
};

struct FitResult {
  ParamVector best;
  CostResult best_cost;
  std::vector<HistoryEntry> history;
  std::string status;  // budget_exhausted | converged
};

// Seeded differential evolution followed by Nelder-Mead restarts, in
// normalised coordinates. Batches evaluate on up to problem.jobs threads;
// results are reduced in candidate order.
FitResult optimize(const FitProblem& problem, const ParamVector& initial);

// Fit configuration (JSON). Relative paths resolve against base_dir.
FitProblem load_fit_problem(const std::string& text, const std::string& base_dir);
FitProblem load_fit_problem_file(const std::string& path);

std::string format_params(const ParamVector& params);  // JSON
ParamVector parse_params(const std::string& text);
std::string format_history(const FitResult& result,
                           const FitProblem& problem);  // CSV

}  // namespace ehm

#endif  // EHM_IDENTIFICATION_HPP_
