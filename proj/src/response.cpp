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

#include "ehm/response.hpp"

#include "ehm/errors.hpp"

namespace ehm {

std::string gain_file_name(const ChannelPair& pair) {
  return pair.input + "__" + pair.output + ".csv";
}

std::string gain_unit(const ChannelPair& pair) {
  const auto us = pair.output.rfind('_');
  const std::string component =
      us == std::string::npos ? pair.output : pair.output.substr(us + 1);
  if (component.rfind("al", 0) == 0) return "rad/s^2 per m/s^2";
  if (component.rfind("a", 0) == 0) return "m/s^2 per m/s^2";
  if (component.rfind("w", 0) == 0) return "rad/s per m/s^2";
  if (component.rfind("v", 0) == 0) return "m/s per m/s^2";
  if (component == "roll" || component == "pitch" || component == "yaw") {
    return "rad per m/s^2";
  }
  return "m per m/s^2";
}

std::vector<ChannelPair> default_channel_pairs(
    Axis axis, const std::vector<std::string>& markers) {
  static const char* kComponents[] = {"ax", "ay", "az", "alx", "aly", "alz"};
  const std::string input = std::string("seat_a") + axis_letter(axis);
  std::vector<ChannelPair> pairs;
  for (const std::string& m : markers) {
    for (const char* c : kComponents) pairs.push_back({input, m + "_" + c});
  }
  return pairs;
}

std::vector<GainCurve> trajectory_gains(const Trajectory& trajectory,
                                        const std::vector<ChannelPair>& pairs,
                                        const AnalysisOptions& options,
                                        const Eigen::VectorXd& grid) {
  const Eigen::VectorXd freqs =
      grid.size() ? grid
                  : native_frequency_grid(trajectory.sample_rate,
                                          trajectory.rows(), options.grid_low,
                                          options.grid_high, options.gain);
  std::vector<GainCurve> curves;
  for (const ChannelPair& pair : pairs) {
    const SignalSeries in = bandpass(trajectory.series(pair.input),
                                     options.band_low, options.band_high,
                                     options.order);
    const SignalSeries out = bandpass(trajectory.series(pair.output),
                                      options.band_low, options.band_high,
                                      options.order);
    GainCurve c = compute_gain(in, out, freqs, options.gain);
    c.unit = gain_unit(pair);
    curves.push_back(std::move(c));
  }
  return curves;
}

PeakSummary gain_peak(const GainCurve& curve, double low, double high) {
  PeakSummary best;
  bool found = false;
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    const double f = curve.frequencies(i);
    if (f < low || f > high) continue;
    if (static_cast<size_t>(i) < curve.masked.size() &&
        curve.masked[static_cast<size_t>(i)]) {
      continue;
    }
    if (!found || curve.gains(i) > best.gain) {
      best = {f, curve.gains(i)};
      found = true;
    }
  }
  if (!found) throw InvalidArgument("gain_peak: no unmasked point in range");
  return best;
}

double band_mean(const GainCurve& curve, double low, double high) {
  double sum = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    const double f = curve.frequencies(i);
    if (f < low || f > high) continue;
    if (static_cast<size_t>(i) < curve.masked.size() &&
        curve.masked[static_cast<size_t>(i)]) {
      continue;
    }
    sum += curve.gains(i);
    ++n;
  }
  if (n == 0) throw InvalidArgument("band_mean: no unmasked point in range");
  return sum / n;
}

}  // namespace ehm
