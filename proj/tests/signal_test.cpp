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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ehm/errors.hpp"
#include "ehm/signal.hpp"
#include "support.hpp"

namespace ehm {
namespace {

using testing::TempDir;
using testing::write_file;

constexpr double kPi = std::numbers::pi;

// One-sided power per FFT bin, normalised so the sum equals mean(x^2).
std::vector<double> bin_power(const Eigen::VectorXd& x) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, std::vector<double>(x.data(), x.data() + x.size()));
  const double n = static_cast<double>(x.size());
  std::vector<double> p(spec.size());
  for (size_t k = 0; k < spec.size(); ++k) p[k] = std::norm(spec[k]) / (n * n);
  return p;
}

double bin_freq(size_t k, size_t n, double fs) {
  const double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - n;
  return std::abs(kk) * fs / static_cast<double>(n);
}

TEST(RandomVibration, RmsOnTarget) {
  const SignalSeries s = generate_random_vibration(0.1, 12, 0.3, 60, 1000, 42);
  EXPECT_EQ(s.size(), 60000);
  EXPECT_EQ(s.sample_rate, 1000);
  EXPECT_GE(rms(s.samples), 0.2997);
  EXPECT_LE(rms(s.samples), 0.3003);
}

TEST(RandomVibration, RmsOnTargetProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 20; ++k) {
    const double low = 0.1 + 0.4 * u(rng), high = low + 1 + 30 * u(rng), target = 0.01 + 5 * u(rng);
    const SignalSeries s = generate_random_vibration(low, high, target, 20, 200, rng());
    EXPECT_NEAR(rms(s.samples) / target, 1.0, 1e-3);
  }
}

TEST(RandomVibration, SameSeedSameSamples) {
  const SignalSeries a = generate_random_vibration(0.1, 12, 0.3, 60, 1000, 42);
  const SignalSeries b = generate_random_vibration(0.1, 12, 0.3, 60, 1000, 42);
  const SignalSeries c = generate_random_vibration(0.1, 12, 0.3, 60, 1000, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(format_signal(a), format_signal(b));
  EXPECT_NE(a.samples, c.samples);
}

TEST(RandomVibration, EnergyStaysInBand) {
  const SignalSeries s = generate_random_vibration(0.1, 12, 0.3, 60, 1000, 42);
  const auto p = bin_power(s.samples);
  double total = 0.0, outside = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const double f = bin_freq(k, p.size(), s.sample_rate);
    total += p[k];
    if (f < 0.05 || f > 13.0) outside += p[k];
  }
  EXPECT_LT(outside / total, 0.01);
}

TEST(RandomVibration, ParsevalConsistent) {
  const SignalSeries s = generate_random_vibration(0.2, 8, 0.7, 30, 500, 9);
  double sum = 0.0;
  for (double v : bin_power(s.samples)) sum += v;
  EXPECT_NEAR(std::sqrt(sum) / rms(s.samples), 1.0, 1e-3);
}

TEST(RandomVibration, InvalidArguments) {
  EXPECT_THROW(generate_random_vibration(5, 2, 0.3, 60, 1000, 1), InvalidArgument);
  EXPECT_THROW(generate_random_vibration(0.1, 600, 0.3, 60, 1000, 1), InvalidArgument);
  EXPECT_THROW(generate_random_vibration(0.1, 12, 0.3, 0, 1000, 1), InvalidArgument);
  EXPECT_THROW(generate_random_vibration(0.1, 12, 0.3, 15, 1000, 1), InvalidArgument);
}

TEST(LoadSignal, SinusoidCsv) {
  TempDir dir("signal");
  std::string text = "time,value\n";
  const double amplitude = 0.8;
  for (int i = 0; i < 500; ++i) {
    text += testing::num(i / 100.0) + "," + testing::num(amplitude * std::sin(2 * kPi * i / 100.0)) + "\n";
  }
  write_file(dir.file("sine.csv"), text);
  const LoadedSignal s = load_signal(dir.file("sine.csv"));
  EXPECT_FALSE(s.resampled);
  EXPECT_EQ(s.series.size(), 500);
  EXPECT_NEAR(s.series.sample_rate, 100.0, 1e-9);
  EXPECT_NEAR(rms(s.series.samples), amplitude / std::sqrt(2.0), 0.01 * amplitude / std::sqrt(2.0));
}

TEST(LoadSignal, HeaderRateSingleColumn) {
  const LoadedSignal s = parse_signal("# sample_rate_hz=250\n1\n2\n3\n");
  EXPECT_EQ(s.series.sample_rate, 250.0);
  EXPECT_EQ(s.series.samples, Eigen::Vector3d(1, 2, 3));
}

TEST(LoadSignal, ShuffledTimeIsRejected) {
  EXPECT_THROW(parse_signal("0,1\n0.02,2\n0.01,3\n"), ParseError);
}

TEST(LoadSignal, SingleSampleIsRejected) {
  EXPECT_THROW(parse_signal("0,1\n"), ParseError);
  EXPECT_THROW(parse_signal(""), ParseError);
}

TEST(LoadSignal, JitteredTimeIsResampled) {
  const LoadedSignal s = parse_signal("0,0\n0.1,1\n0.25,2.5\n0.3,3\n");
  EXPECT_TRUE(s.resampled);
  EXPECT_NEAR(s.series.sample_rate, 10.0, 1e-12);
  // Linear data stays linear.
  for (Eigen::Index i = 0; i < s.series.size(); ++i) EXPECT_NEAR(s.series.samples(i), i, 1e-12);
}

TEST(LoadSignal, MissingFile) {
  EXPECT_THROW(load_signal("/nonexistent/signal.csv"), IoError);
}

TEST(LoadSignal, SaveRoundTrip) {
  TempDir dir("signal");
  const SignalSeries a = generate_random_vibration(0.5, 10, 0.3, 5, 100, 2);
  save_signal(a, dir.file("a.csv"));
  const LoadedSignal b = load_signal(dir.file("a.csv"));
  EXPECT_EQ(b.series.samples, a.samples);
  EXPECT_NEAR(b.series.sample_rate, a.sample_rate, 1e-9);
}

SignalSeries series(const Eigen::VectorXd& x, double fs) {
  SignalSeries s;
  s.sample_rate = fs;
  s.samples = x;
  return s;
}

TEST(AccelerationToPose, SinusoidIntegratesAnalytically) {
  const double fs = 1000, f = 2.0, a = 0.5;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(10000, 0, 9999) / fs;
  const Eigen::VectorXd acc = a * (2 * kPi * f * t).array().sin();
  const SignalSeries x = acceleration_to_pose(series(acc, fs), 0.05);
  const Eigen::VectorXd expected = -a / std::pow(2 * kPi * f, 2) * (2 * kPi * f * t).array().sin();
  EXPECT_LT((x.samples - expected).cwiseAbs().maxCoeff(), 0.01 * a / std::pow(2 * kPi * f, 2));
}

TEST(AccelerationToPose, ZeroInputZeroPose) {
  const SignalSeries x = acceleration_to_pose(series(Eigen::VectorXd::Zero(4000), 1000), 0.05);
  EXPECT_EQ(x.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(AccelerationToPose, ConstantOffsetDoesNotDrift) {
  const double a = 0.2, corner = 0.05;
  const SignalSeries x = acceleration_to_pose(series(Eigen::VectorXd::Constant(100000, a), 1000), corner);
  EXPECT_LT(x.samples.cwiseAbs().maxCoeff(), a / std::pow(2 * kPi * corner, 2));
}

TEST(AccelerationToPose, ZeroMeanPosition) {
  const SignalSeries acc = generate_random_vibration(0.1, 12, 0.3, 30, 1000, 5);
  const SignalSeries x = acceleration_to_pose(acc, 0.05);
  EXPECT_LT(std::abs(x.samples.mean()), 1e-12);
}

TEST(AccelerationToPose, DoubleDifferenceRecoversInput) {
  const SignalSeries acc = generate_random_vibration(0.5, 10, 0.3, 60, 1000, 21);
  const SignalSeries x = acceleration_to_pose(acc, 0.05);
  const Eigen::Index n = x.size();
  const double fs2 = acc.sample_rate * acc.sample_rate;
  const Eigen::VectorXd dd =
      (x.samples.segment(2, n - 2) - 2 * x.samples.segment(1, n - 2) + x.samples.head(n - 2)) * fs2;
  const Eigen::VectorXd ref = acc.samples.segment(1, n - 2);
  EXPECT_LT(rms(dd - ref) / rms(ref), 0.02);
}

TEST(AccelerationToPose, CornerMustBePositive) {
  EXPECT_THROW(acceleration_to_pose(series(Eigen::VectorXd::Zero(10), 100), 0.0), InvalidArgument);
}

}  // namespace
}  // namespace ehm
