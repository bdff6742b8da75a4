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

// Gain curves of simulated trajectories: channel pairs, filtering and the
// per-pair transfer gains.

#ifndef EHM_RESPONSE_HPP_
#define EHM_RESPONSE_HPP_

#include <string>
#include <vector>

#include "ehm/analysis.hpp"
#include "ehm/simulation.hpp"

namespace ehm {

struct ChannelPair {
  std::string input;   // seat channel, e.g. seat_az
  std::string output;  // marker channel, e.g. head_alx
  bool operator==(const ChannelPair&) const = default;
};

// "<input>__<output>.csv"
std::string gain_file_name(const ChannelPair& pair);
// Physical unit of a gain between the two channels.
std::string gain_unit(const ChannelPair& pair);

// Seat acceleration along the axis against every marker's linear and
// angular acceleration components.
std::vector<ChannelPair> default_channel_pairs(
    Axis axis, const std::vector<std::string>& markers);

struct AnalysisOptions {
  double band_low = 0.0;    // Butterworth band, Hz (0: low-pass)
  double band_high = 12.0;
  int order = 4;
  double grid_low = 0.1;    // gain grid, Hz
  double grid_high = 12.0;
  GainOptions gain;
};

// Filtered gain of each pair. An empty grid selects the native grid.
std::vector<GainCurve> trajectory_gains(const Trajectory& trajectory,
                                        const std::vector<ChannelPair>& pairs,
                                        const AnalysisOptions& options = {},
                                        const Eigen::VectorXd& grid = {});

struct PeakSummary {
  double frequency = 0.0;
  double gain = 0.0;
};

// Largest unmasked gain, optionally restricted to [low, high].
PeakSummary gain_peak(const GainCurve& curve, double low = 0.0,
                      double high = 1e300);
// Mean unmasked gain over [low, high].
double band_mean(const GainCurve& curve, double low, double high);

}  // namespace ehm

#endif  // EHM_RESPONSE_HPP_
