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

#include "ehm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Digital poles of an order-N Butterworth prototype at cutoff (bilinear
// transform with pre-warping). Returns the upper-half-plane poles plus the
// real pole for odd orders.
std::vector<Complex> digital_poles(int order, double cutoff,
                                   double sample_rate) {
  if (order < 1) throw InvalidArgument("filter order must be >= 1");
  if (!(cutoff > 0.0) || !(cutoff < sample_rate / 2.0)) {
    throw InvalidArgument("cutoff must lie in (0, fs/2)");
  }
  const double fs2 = 2.0 * sample_rate;
  const double warped = fs2 * std::tan(kPi * cutoff / sample_rate);
  std::vector<Complex> poles;
  for (int k = 0; k < (order + 1) / 2; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    const Complex p = warped * std::polar(1.0, theta);
    poles.push_back((fs2 + p) / (fs2 - p));
  }
  return poles;
}

std::vector<Biquad> butterworth(int order, double cutoff, double sample_rate,
                                bool highpass) {
  const std::vector<Complex> poles = digital_poles(order, cutoff, sample_rate);
  std::vector<Biquad> sections;
  const double zero_sign = highpass ? -1.0 : 1.0;  // zeros at z = -+1
  for (const Complex& z : poles) {
    Biquad s;
    if (std::abs(z.imag()) < 1e-14) {
      // First-order section: (1 +- z^-1) / (1 - r z^-1).
      const double r = z.real();
      s.a1 = -r;
      s.a2 = 0.0;
      const double k = highpass ? (1.0 + r) / 2.0 : (1.0 - r) / 2.0;
      s.b0 = k;
      s.b1 = zero_sign * k;
      s.b2 = 0.0;
    } else {
      s.a1 = -2.0 * z.real();
      s.a2 = std::norm(z);
      // Unit gain at DC (low-pass) or Nyquist (high-pass).
      const double den = highpass ? 1.0 - s.a1 + s.a2 : 1.0 + s.a1 + s.a2;
      const double k = den / 4.0;
      s.b0 = k;
      s.b1 = 2.0 * zero_sign * k;
      s.b2 = k;
    }
    sections.push_back(s);
  }
  return sections;
}

// Steady-state DF2T state of one section for a unit step input.
std::pair<double, double> step_state(const Biquad& s) {
  const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  return {gain - s.b0, s.b2 - s.a2 * gain};
}

Eigen::VectorXd filter_with_initial(const std::vector<Biquad>& sections,
                                    const Eigen::VectorXd& x, double x0) {
  Eigen::VectorXd y = x;
  double scale = x0;
  for (const Biquad& s : sections) {
    auto [z1, z2] = step_state(s);
    z1 *= scale;
    z2 *= scale;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(i) = out;
    }
    scale *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  }
  return y;
}

Eigen::VectorXd hann(Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

// Segment-averaged magnitude spectra (bins 0..nperseg/2).
Eigen::VectorXd averaged_magnitude(const Eigen::VectorXd& x,
                                   Eigen::Index nperseg, bool window) {
  const Eigen::Index step = window ? std::max<Eigen::Index>(1, nperseg / 2)
                                   : nperseg;
  const Eigen::VectorXd w =
      window ? hann(nperseg) : Eigen::VectorXd::Ones(nperseg);
  Eigen::FFT<double> fft;
  std::vector<double> segment(static_cast<size_t>(nperseg));
  std::vector<Complex> spectrum;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(nperseg / 2 + 1);
  int count = 0;
  for (Eigen::Index start = 0; start + nperseg <= x.size(); start += step) {
    const Eigen::VectorXd seg = x.segment(start, nperseg);
    const double mean = window ? seg.mean() : 0.0;
    for (Eigen::Index i = 0; i < nperseg; ++i) {
      segment[static_cast<size_t>(i)] = (seg(i) - mean) * w(i);
    }
    fft.fwd(spectrum, segment);
    for (Eigen::Index k = 0; k < total.size(); ++k) {
      total(k) += std::abs(spectrum[static_cast<size_t>(k)]);
    }
    ++count;
  }
  return total / std::max(count, 1);
}

Eigen::Index segment_length(double sample_rate, Eigen::Index length,
                            const GainOptions& options) {
  if (options.raw_fft) return length;
  const auto wanted =
      static_cast<Eigen::Index>(std::ceil(sample_rate / options.resolution - 1e-9));
  return std::min(wanted, length);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff,
                                        double sample_rate) {
  return butterworth(order, cutoff, sample_rate, false);
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff,
                                         double sample_rate) {
  return butterworth(order, cutoff, sample_rate, true);
}

double frequency_response(const std::vector<Biquad>& sections, double f,
                          double sample_rate) {
  const Complex zinv = std::polar(1.0, -2.0 * kPi * f / sample_rate);
  Complex h = 1.0;
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) /
         (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  }
  return std::abs(h);
}

Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections,
                           const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  for (const Biquad& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y(i) = out;
    }
  }
  return y;
}

Eigen::VectorXd sos_filtfilt(const std::vector<Biquad>& sections,
                             const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  Eigen::Index pad = 3 * (2 * static_cast<Eigen::Index>(sections.size()) + 1);
  pad = std::min(pad, n - 1);
  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext(i) = 2.0 * x(0) - x(pad - i);
    ext(n + pad + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(pad, n) = x;
  Eigen::VectorXd y = filter_with_initial(sections, ext, ext(0));
  y.reverseInPlace();
  y = filter_with_initial(sections, y, y(0));
  y.reverseInPlace();
  return y.segment(pad, n);
}

SignalSeries bandpass(const SignalSeries& signal, double low, double high,
                      int order) {
  const double fs = signal.sample_rate;
  if (!(low >= 0.0) || !(low < high) || !(high < fs / 2.0)) {
    throw InvalidArgument("bandpass: need 0 <= low < high < fs/2");
  }
  std::vector<Biquad> sections = butterworth_lowpass(order, high, fs);
  if (low > 0.0) {
    const std::vector<Biquad> hp = butterworth_highpass(order, low, fs);
    sections.insert(sections.begin(), hp.begin(), hp.end());
  }
  SignalSeries out = signal;
  out.samples = sos_filtfilt(sections, signal.samples);
  return out;
}

Eigen::VectorXd native_frequency_grid(double sample_rate, Eigen::Index length,
                                      double low, double high,
                                      const GainOptions& options) {
  const Eigen::Index nperseg = segment_length(sample_rate, length, options);
  const double df = sample_rate / static_cast<double>(nperseg);
  std::vector<double> freqs;
  for (Eigen::Index k = 1; k <= nperseg / 2; ++k) {
    const double f = df * static_cast<double>(k);
    if (f >= low - 1e-9 && f <= high + 1e-9) freqs.push_back(f);
  }
  return Eigen::Map<Eigen::VectorXd>(freqs.data(),
                                     static_cast<Eigen::Index>(freqs.size()));
}

GainCurve compute_gain(const SignalSeries& input, const SignalSeries& output,
                       const Eigen::VectorXd& freq_grid,
                       const GainOptions& options) {
  if (input.size() != output.size() ||
      input.sample_rate != output.sample_rate) {
    throw InvalidArgument("compute_gain: signals differ in length or rate");
  }
  if (input.size() < 4) throw InvalidArgument("compute_gain: signal too short");
  const double fs = input.sample_rate;
  const Eigen::Index nperseg = segment_length(fs, input.size(), options);
  const Eigen::VectorXd in_mag =
      averaged_magnitude(input.samples, nperseg, !options.raw_fft);
  const Eigen::VectorXd out_mag =
      averaged_magnitude(output.samples, nperseg, !options.raw_fft);
  const double df = fs / static_cast<double>(nperseg);
  const double floor = options.mask_floor * in_mag.array().square().maxCoeff();

  GainCurve curve;
  curve.input_label = input.label;
  curve.output_label = output.label;
  curve.frequencies = freq_grid;
  curve.gains = Eigen::VectorXd::Zero(freq_grid.size());
  curve.masked.assign(static_cast<size_t>(freq_grid.size()), false);
  const Eigen::Index last = in_mag.size() - 1;
  for (Eigen::Index i = 0; i < freq_grid.size(); ++i) {
    const double x = freq_grid(i) / df;
    if (!(x >= 0.0) || x > static_cast<double>(last)) {
      curve.masked[static_cast<size_t>(i)] = true;
      continue;
    }
    auto k = static_cast<Eigen::Index>(std::floor(x));
    k = std::min(k, last - 1);
    const double w = x - static_cast<double>(k);
    bool masked = false;
    double ratio[2];
    for (int j = 0; j < 2; ++j) {
      const double p = in_mag(k + j);
      if (p * p <= floor || p == 0.0) {
        masked = masked || (j == 0 ? w < 1.0 : w > 0.0);
        ratio[j] = 0.0;
      } else {
        ratio[j] = out_mag(k + j) / p;
      }
    }
    if (masked) {
      curve.masked[static_cast<size_t>(i)] = true;
      continue;
    }
    curve.gains(i) = (1.0 - w) * ratio[0] + w * ratio[1];
  }
  return curve;
}

Eigen::VectorXd relative_gain(const Eigen::VectorXd& gain_exp,
                              const Eigen::VectorXd& gain_model,
                              double weight) {
  if (gain_exp.size() != gain_model.size()) {
    throw InvalidArgument("relative_gain: grid mismatch");
  }
  return gain_exp.array() / (gain_exp.array() + weight * gain_model.array());
}

Eigen::VectorXd relative_gain(const GainCurve& exp, const GainCurve& model,
                              double weight) {
  if (exp.frequencies.size() != model.frequencies.size() ||
      (exp.frequencies - model.frequencies).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidArgument("relative_gain: grid mismatch");
  }
  return relative_gain(exp.gains, model.gains, weight);
}

double criterion(const Eigen::VectorXd& gain_exp,
                 const Eigen::VectorXd& gain_model,
                 const Eigen::VectorXd& frequencies, double weight) {
  if (frequencies.size() == 0) throw InvalidArgument("criterion: empty grid");
  if (gain_exp.size() != frequencies.size() ||
      gain_model.size() != frequencies.size()) {
    throw InvalidArgument("criterion: grid mismatch");
  }
  if ((frequencies.array() <= 0.0).any()) {
    throw InvalidArgument("criterion: frequencies must be > 0");
  }
  const Eigen::ArrayXd rel = relative_gain(gain_exp, gain_model, weight).array();
  const Eigen::ArrayXd terms = (gain_exp - gain_model).array() /
                               (rel * frequencies.array().square());
  return std::sqrt(terms.square().mean());
}

double criterion(const GainCurve& exp, const GainCurve& model, double weight) {
  if (exp.frequencies.size() != model.frequencies.size() ||
      (exp.frequencies - model.frequencies).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidArgument("criterion: grid mismatch");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < exp.size(); ++i) {
    const auto k = static_cast<size_t>(i);
    const bool m1 = k < exp.masked.size() && exp.masked[k];
    const bool m2 = k < model.masked.size() && model.masked[k];
    if (!m1 && !m2) keep.push_back(i);
  }
  if (keep.empty()) throw InvalidArgument("criterion: every point is masked");
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd ge(n), gm(n), f(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    ge(j) = exp.gains(keep[static_cast<size_t>(j)]);
    gm(j) = model.gains(keep[static_cast<size_t>(j)]);
    f(j) = exp.frequencies(keep[static_cast<size_t>(j)]);
  }
  return criterion(ge, gm, f, weight);
}

std::string format_gain_curve(const GainCurve& curve) {
  std::string out;
  out += "# input=" + curve.input_label + "\n";
  out += "# output=" + curve.output_label + "\n";
  if (!curve.unit.empty()) out += "# unit=" + curve.unit + "\n";
  out += "frequency_hz,gain,masked_flag\n";
  char buf[96];
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    const bool masked = static_cast<size_t>(i) < curve.masked.size() &&
                        curve.masked[static_cast<size_t>(i)];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", curve.frequencies(i),
                  curve.gains(i), masked ? 1 : 0);
    out += buf;
  }
  return out;
}

void save_gain_curve(const GainCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write gain curve '" + path + "'");
  out << format_gain_curve(curve);
}

GainCurve parse_gain_curve(const std::string& text) {
  GainCurve curve;
  std::istringstream in(text);
  std::string line;
  std::vector<double> f, g;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(line.substr(1, eq - 1));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "input") curve.input_label = value;
      if (key == "output") curve.output_label = value;
      if (key == "unit") curve.unit = value;
      continue;
    }
    if (line.rfind("frequency_hz", 0) == 0) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
      throw ParseError("gain curve row '" + line + "'");
    }
    std::getline(row, c, ',');
    try {
      f.push_back(std::stod(a));
      g.push_back(std::stod(b));
      curve.masked.push_back(!trim(c).empty() && std::stoi(c) != 0);
    } catch (const std::exception&) {
      throw ParseError("gain curve row '" + line + "'");
    }
  }
  if (f.empty()) throw ParseError("gain curve has no rows");
  for (size_t i = 1; i < f.size(); ++i) {
    if (!(f[i] > f[i - 1])) throw ParseError("gain curve frequencies must increase");
  }
  curve.frequencies =
      Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  curve.gains =
      Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  return curve;
}

GainCurve load_gain_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gain curve '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_gain_curve(buffer.str());
}

}  // namespace ehm
