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

// Small models and helpers shared by the test binaries.

#ifndef EHM_TESTS_SUPPORT_HPP_
#define EHM_TESTS_SUPPORT_HPP_

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "ehm/model.hpp"
#include "ehm/simulation.hpp"

namespace ehm::testing {

inline std::string data_path(const std::string& rel) {
  return std::string(EHM_DATA_DIR) + "/" + rel;
}

inline BodyModel reference_model() { return load_model_file(data_path("ehm.json")); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ehm_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string vec(double x, double y, double z) {
  return "[" + num(x) + ", " + num(y) + ", " + num(z) + "]";
}

// Welded base plus a chain of point-like links hanging from it, all in m.
// kinds cycles through the listed joint types.
inline std::string chain_json(int links, const std::string& base,
                              const Eigen::Vector3d& gravity,
                              const std::vector<std::string>& kinds,
                              std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5), w(0.9, 1.1);
  std::string segs, joints;
  segs += "{\"name\": \"s0\", \"mass\": " + num(u(rng)) + ", \"inertia\": " +
          vec(0.02 * w(rng), 0.025 * w(rng), 0.03 * w(rng)) +
          ", \"cog\": [0, 0, 0]}";
  for (int i = 1; i <= links; ++i) {
    const double z = -0.3 * i;
    segs += ",\n{\"name\": \"s" + std::to_string(i) + "\", \"mass\": " +
            num(u(rng)) + ", \"inertia\": " +
            vec(0.02 * w(rng), 0.025 * w(rng), 0.03 * w(rng)) +
            ", \"cog\": " + vec(0.05 * u(rng), -0.04 * u(rng), z) + "}";
    const std::string& kind = kinds[static_cast<size_t>(i - 1) % kinds.size()];
    if (!joints.empty()) joints += ",\n";
    joints += "{\"name\": \"j" + std::to_string(i) + "\", \"parent\": \"s" +
              std::to_string(i - 1) + "\", \"child\": \"s" + std::to_string(i) +
              "\", \"type\": \"" + kind + "\", \"position\": " +
              vec(0.0, 0.0, z + 0.15);
    if (kind == "revolute" || kind == "prismatic" || kind == "spherical_translation") {
      joints += ", \"axis\": " + std::string(i % 2 ? "[0, 1, 0]" : "[1, 0, 0]");
    }
    joints += "}";
  }
  return "{\"name\": \"chain\", \"units\": {\"length\": \"m\"}, \"gravity\": " +
         vec(gravity.x(), gravity.y(), gravity.z()) + ", \"base\": \"" + base +
         "\", \"root\": \"s0\", \"segments\": [" + segs + "], \"joints\": [" +
         joints + "]}";
}

// Base-excited single DoF: 1 kg on a vertical spring-damper, no gravity.
inline std::string sdof_json(double mass, double fn, double zeta) {
  const double w = 2.0 * 3.14159265358979323846 * fn;
  const double k = mass * w * w, c = 2.0 * zeta * w * mass;
  return R"({"name": "sdof", "units": {"length": "m"}, "gravity": [0, 0, 0],
    "base": "fixed", "root": "seat",
    "segments": [
      {"name": "seat", "mass": 1, "inertia": [0.01, 0.01, 0.01], "cog": [0, 0, 0]},
      {"name": "body", "mass": )" + num(mass) + R"(, "inertia": [0.01, 0.01, 0.01], "cog": [0, 0, 0.2]}],
    "joints": [{"name": "spring", "parent": "seat", "child": "body", "type": "prismatic",
                "position": [0, 0, 0.2], "axis": [0, 0, 1]}],
    "restraints": [{"joint": "spring", "mode": "cardan", "stiffness": [)" + num(k) +
         R"(], "damping": [)" + num(c) + R"(]}],
    "markers": [{"name": "body", "segment": "body", "point": [0, 0, 0.2]}]})";
}

// Two masses in series on vertical spring-dampers: the recovery problem.
inline std::string two_mass_json(double k1, double c1, double k2, double c2) {
  return R"({"name": "two_mass", "units": {"length": "m"}, "gravity": [0, 0, 0],
    "base": "fixed", "root": "seat",
    "segments": [
      {"name": "seat", "mass": 1, "inertia": [0.01, 0.01, 0.01], "cog": [0, 0, 0]},
      {"name": "lower", "mass": 2, "inertia": [0.01, 0.01, 0.01], "cog": [0, 0, 0.2]},
      {"name": "upper", "mass": 1, "inertia": [0.01, 0.01, 0.01], "cog": [0, 0, 0.4]}],
    "joints": [
      {"name": "lower_spring", "parent": "seat", "child": "lower", "type": "prismatic",
       "position": [0, 0, 0.1], "axis": [0, 0, 1]},
      {"name": "upper_spring", "parent": "lower", "child": "upper", "type": "prismatic",
       "position": [0, 0, 0.3], "axis": [0, 0, 1]}],
    "restraints": [
      {"joint": "lower_spring", "mode": "cardan", "stiffness": [)" + num(k1) +
         R"(], "damping": [)" + num(c1) + R"(]},
      {"joint": "upper_spring", "mode": "cardan", "stiffness": [)" + num(k2) +
         R"(], "damping": [)" + num(c2) + R"(]}],
    "markers": [{"name": "lower", "segment": "lower", "point": [0, 0, 0.2]},
                {"name": "upper", "segment": "upper", "point": [0, 0, 0.4]}]})";
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace ehm::testing

#endif  // EHM_TESTS_SUPPORT_HPP_
