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

#include "ehm/signal.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

using Complex = std::complex<double>;

double bin_frequency(Eigen::Index k, Eigen::Index n, double fs) {
  // Signed frequency of FFT bin k.
  const Eigen::Index kk = k <= n / 2 ? k : k - n;
  return static_cast<double>(kk) * fs / static_cast<double>(n);
}

std::vector<double> to_std(const Eigen::VectorXd& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

Eigen::VectorXd from_std(const std::vector<double>& x, Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = x[static_cast<size_t>(i)];
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& value) {
  std::istringstream in(text);
  in >> value;
  return !in.fail() && (in >> std::ws).eof();
}

}  // namespace

double rms(const Eigen::VectorXd& x) {
  if (x.size() == 0) return 0.0;
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

SignalSeries generate_random_vibration(double band_low, double band_high,
                                       double rms_target, double duration,
                                       double sample_rate, std::uint64_t seed) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be > 0");
  if (!(band_low >= 0.0) || !(band_low < band_high) ||
      band_high > sample_rate / 2.0) {
    throw InvalidArgument("invalid band: need 0 <= low < high <= fs/2");
  }
  if (!(duration > 0.0)) throw InvalidArgument("duration must be > 0");
  if (band_low > 0.0 && duration < 2.0 / band_low) {
    throw InvalidArgument("duration too short to resolve the band low edge "
                          "(need >= 2 periods)");
  }
  if (!(rms_target > 0.0)) throw InvalidArgument("rms must be > 0");

  const auto n = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  std::mt19937_64 rng(seed);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  auto uniform = [&rng]() {
    // (0, 1], 53 random bits.
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  std::vector<double> noise(static_cast<size_t>(n));
  for (size_t i = 0; i < noise.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = kTwoPi * uniform();
    noise[i] = r * std::cos(theta);
    if (i + 1 < noise.size()) noise[i + 1] = r * std::sin(theta);
  }

  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, noise);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double f = std::abs(bin_frequency(k, n, sample_rate));
    if (f < band_low || f > band_high || f == 0.0) {
      spectrum[static_cast<size_t>(k)] = 0.0;
    }
  }
  std::vector<double> shaped;
  fft.inv(shaped, spectrum);
  SignalSeries out;
  out.sample_rate = sample_rate;
  out.samples = from_std(shaped, n);
  const double current = rms(out.samples);
  if (!(current > 0.0)) {
    throw InvalidArgument("band contains no FFT bins for this duration");
  }
  out.samples *= rms_target / current;
  out.label = "acceleration";
  return out;
}

LoadedSignal parse_signal(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  double header_rate = 0.0;
  std::vector<double> times, values;
  bool two_columns = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("sample_rate_hz=");
      if (pos != std::string::npos &&
          !parse_double(trim(line.substr(pos + 15)), header_rate)) {
        throw ParseError("bad sample_rate_hz header");
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma != std::string::npos) {
      double t, v;
      if (!parse_double(trim(line.substr(0, comma)), t) ||
          !parse_double(trim(line.substr(comma + 1)), v)) {
        if (times.empty() && values.empty()) continue;  // column header row
        throw ParseError("signal line " + std::to_string(line_no) +
                         ": expected 'time,value'");
      }
      two_columns = true;
      times.push_back(t);
      values.push_back(v);
    } else {
      double v;
      if (!parse_double(line, v)) {
        if (values.empty()) continue;
        throw ParseError("signal line " + std::to_string(line_no) +
                         ": expected a number");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) throw ParseError("signal file is empty");

  LoadedSignal out;
  if (!two_columns) {
    if (!(header_rate > 0.0)) {
      throw ParseError("single-column signal needs a '# sample_rate_hz=' line");
    }
    out.series.sample_rate = header_rate;
    out.series.samples = Eigen::Map<Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
    return out;
  }
  if (values.size() < 2) {
    throw ParseError("signal needs at least 2 samples to infer the rate");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw ParseError("time column is not strictly increasing at row " +
                       std::to_string(i + 1));
    }
  }
  const double span = times.back() - times.front();
  const double dt = span / static_cast<double>(times.size() - 1);
  double jitter = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    jitter = std::max(jitter, std::abs(times[i] - (times.front() +
                                                   dt * static_cast<double>(i))));
  }
  out.series.sample_rate = 1.0 / dt;
  out.series.samples.resize(static_cast<Eigen::Index>(values.size()));
  if (jitter < 1e-6) {
    for (size_t i = 0; i < values.size(); ++i) {
      out.series.samples(static_cast<Eigen::Index>(i)) = values[i];
    }
    return out;
  }
  out.resampled = true;
  size_t j = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double t = times.front() + dt * static_cast<double>(i);
    while (j + 2 < times.size() && times[j + 1] < t) ++j;
    const double w = std::clamp((t - times[j]) / (times[j + 1] - times[j]),
                                0.0, 1.0);
    out.series.samples(static_cast<Eigen::Index>(i)) =
        (1.0 - w) * values[j] + w * values[j + 1];
  }
  return out;
}

LoadedSignal load_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open signal file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  LoadedSignal out = parse_signal(buffer.str());
  out.series.label = path;
  return out;
}

std::string format_signal(const SignalSeries& series) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "# sample_rate_hz=%.17g\ntime,value\n",
                series.sample_rate);
  out += buf;
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n",
                  static_cast<double>(i) / series.sample_rate, series.samples(i));
    out += buf;
  }
  return out;
}

void save_signal(const SignalSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write signal file '" + path + "'");
  out << format_signal(series);
}

SignalSeries resample(const SignalSeries& series, double sample_rate) {
  SignalSeries out;
  out.sample_rate = sample_rate;
  out.label = series.label;
  const double span =
      static_cast<double>(series.size() - 1) / series.sample_rate;
  const auto n = static_cast<Eigen::Index>(std::floor(span * sample_rate + 1e-9)) + 1;
  out.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / sample_rate * series.sample_rate;
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(x),
                                          series.size() - 2);
    const double w = x - static_cast<double>(k);
    out.samples(i) = (1.0 - w) * series.samples(k) + w * series.samples(k + 1);
  }
  return out;
}

AxisMotion integrate_acceleration(const SignalSeries& acceleration,
                                  double highpass_corner) {
  if (!(highpass_corner > 0.0)) {
    throw InvalidArgument("high-pass corner must be > 0");
  }
  const Eigen::Index n = acceleration.size();
  const double fs = acceleration.sample_rate;
  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, to_std(acceleration.samples));
  std::vector<Complex> pos(spectrum.size()), vel(spectrum.size()),
      acc(spectrum.size());
  const bool even = n % 2 == 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ks = static_cast<size_t>(k);
    const double f = bin_frequency(k, n, fs);
    if (f == 0.0 || (even && k == n / 2)) {
      pos[ks] = vel[ks] = acc[ks] = 0.0;
      continue;
    }
    const double ratio = highpass_corner / std::abs(f);
    const double h = 1.0 / (1.0 + ratio * ratio * ratio * ratio);
    const Complex iw(0.0, 2.0 * std::numbers::pi * f);
    acc[ks] = h * spectrum[ks];
    vel[ks] = acc[ks] / iw;
    pos[ks] = vel[ks] / iw;
  }
  auto back = [&](std::vector<Complex>& spec, const char* label) {
    std::vector<double> x;
    fft.inv(x, spec);
    SignalSeries s;
    s.sample_rate = fs;
    s.samples = from_std(x, n);
    s.label = label;
    return s;
  };
  return AxisMotion{back(pos, "position"), back(vel, "velocity"),
                    back(acc, "acceleration")};
}

SignalSeries acceleration_to_pose(const SignalSeries& acceleration,
                                  double highpass_corner) {
  return integrate_acceleration(acceleration, highpass_corner).position;
}

}  // namespace ehm
