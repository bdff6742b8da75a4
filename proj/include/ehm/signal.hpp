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

// Uniformly sampled signals and seat excitation generation.

#ifndef EHM_SIGNAL_HPP_
#define EHM_SIGNAL_HPP_

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace ehm {

struct SignalSeries {
  double sample_rate = 0.0;  // Hz
  Eigen::VectorXd samples;
  std::string label;

  Eigen::Index size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

double rms(const Eigen::VectorXd& x);

// Band-limited Gaussian noise: seeded white noise masked to [low, high] Hz in
// the frequency domain, then scaled to the requested rms exactly. The
// generator (mt19937_64 + Box-Muller) is part of the contract.
SignalSeries generate_random_vibration(double band_low, double band_high,
                                       double rms_target, double duration,
                                       double sample_rate, std::uint64_t seed);

struct LoadedSignal {
  SignalSeries series;
  bool resampled = false;  // input time column was not uniform
};

// Two-column "time,value" CSV (optional header row), or a single column with
// a "# sample_rate_hz=<rate>" header line.
LoadedSignal load_signal(const std::string& path);
LoadedSignal parse_signal(const std::string& text);

// "time,value" CSV with a "# sample_rate_hz=" comment line.
void save_signal(const SignalSeries& series, const std::string& path);
std::string format_signal(const SignalSeries& series);

// Linear resampling onto a new rate over the same time span.
SignalSeries resample(const SignalSeries& series, double sample_rate);

// Position, velocity and acceleration of one seat axis that are exact
// derivatives of each other (in the frequency domain), after a zero-phase
// high-pass |H| = 1 / (1 + (fc/f)^4) removing integration drift.
struct AxisMotion {
  SignalSeries position;
  SignalSeries velocity;
  SignalSeries acceleration;
};

AxisMotion integrate_acceleration(const SignalSeries& acceleration,
                                  double highpass_corner);

// Drift-free double integration: the position part of the above.
SignalSeries acceleration_to_pose(const SignalSeries& acceleration,
                                  double highpass_corner);

}  // namespace ehm

#endif  // EHM_SIGNAL_HPP_
