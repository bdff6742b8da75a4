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

// Frequency-domain response analysis: Butterworth band-pass, transfer gains,
// relative gain and the low-frequency weighted rms criterion.

#ifndef EHM_ANALYSIS_HPP_
#define EHM_ANALYSIS_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehm/signal.hpp"

namespace ehm {

// Second-order section, a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

std::vector<Biquad> butterworth_lowpass(int order, double cutoff,
                                        double sample_rate);
std::vector<Biquad> butterworth_highpass(int order, double cutoff,
                                         double sample_rate);
// |H(f)| of a cascade.
double frequency_response(const std::vector<Biquad>& sections, double f,
                          double sample_rate);

// Causal cascade filtering (direct form II transposed).
Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections,
                           const Eigen::VectorXd& x);
// Forward-backward filtering with odd reflection padding and steady-state
// initial conditions.
Eigen::VectorXd sos_filtfilt(const std::vector<Biquad>& sections,
                             const Eigen::VectorXd& x);

// Zero-phase Butterworth band-pass; low == 0 gives a pure low-pass.
SignalSeries bandpass(const SignalSeries& signal, double low, double high,
                      int order = 4);

struct GainCurve {
  Eigen::VectorXd frequencies;  // Hz, strictly increasing
  Eigen::VectorXd gains;
  std::vector<bool> masked;     // input power below the floor
  std::string input_label;
  std::string output_label;
  std::string unit;

  Eigen::Index size() const { return frequencies.size(); }
};

struct GainOptions {
  bool raw_fft = false;         // literal |F(s_o)| / |F(s_i)| ratio
  double resolution = 0.1;      // Hz, Welch segment length = fs / resolution
  double mask_floor = 1e-12;    // relative input auto-power floor
};

// Frequencies k fs / nperseg inside [low, high] for the Welch estimator.
Eigen::VectorXd native_frequency_grid(double sample_rate, Eigen::Index length,
                                      double low = 0.1, double high = 12.0,
                                      const GainOptions& options = {});

// |S_o(f)| / |S_i(f)| from Hann-windowed, 50%-overlap segment-averaged
// magnitude spectra, linearly interpolated onto freq_grid.
GainCurve compute_gain(const SignalSeries& input, const SignalSeries& output,
                       const Eigen::VectorXd& freq_grid,
                       const GainOptions& options = {});

inline constexpr double kRelativeGainWeight = 0.05;

// gain_exp / (gain_exp + w gain_model), pointwise.
Eigen::VectorXd relative_gain(const Eigen::VectorXd& gain_exp,
                              const Eigen::VectorXd& gain_model,
                              double weight = kRelativeGainWeight);
Eigen::VectorXd relative_gain(const GainCurve& exp, const GainCurve& model,
                              double weight = kRelativeGainWeight);

// RMS over the grid of (gain_exp - gain_model) / (relative_gain * f^2).
double criterion(const Eigen::VectorXd& gain_exp,
                 const Eigen::VectorXd& gain_model,
                 const Eigen::VectorXd& frequencies,
                 double weight = kRelativeGainWeight);
// Curve form: grids must match; masked points (in either) are skipped.
double criterion(const GainCurve& exp, const GainCurve& model,
                 double weight = kRelativeGainWeight);

// CSV with columns frequency_hz,gain,masked_flag and "# key=value" header
// lines for the labels.
std::string format_gain_curve(const GainCurve& curve);
void save_gain_curve(const GainCurve& curve, const std::string& path);
GainCurve parse_gain_curve(const std::string& text);
GainCurve load_gain_curve(const std::string& path);

}  // namespace ehm

#endif  // EHM_ANALYSIS_HPP_
