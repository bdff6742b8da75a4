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

// Seated body model: segments, joint tree, restraints, contact geometry and
// the seat environment. Loaded from a JSON key tree (comments allowed) whose
// lengths are in cm by default; everything in memory is SI.

#ifndef EHM_MODEL_HPP_
#define EHM_MODEL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehm/spatial.hpp"

namespace ehm {

// Owner name used for geometry and anchors fixed to the seat frame.
inline constexpr std::string_view kEnvironment = "environment";

struct Segment {
  std::string name;
  double mass = 0.0;                              // kg
  Vector3d inertia_diag = Vector3d::Ones();       // kg m^2 about the CoG
  Vector3d cog = Vector3d::Zero();                // m, model frame
  bool operator==(const Segment&) const = default;
};

enum class JointKind {
  kSpherical,
  kUniversal,                 // rotation about x, then about the new y
  kRevolute,
  kSphericalPlusTranslation,  // translation along axis, then spherical
  kPrismatic,
  kLocked,
};

int dof_count(JointKind kind);
std::string_view to_string(JointKind kind);
JointKind joint_kind_from_string(std::string_view text);

struct JointSpec {
  std::string name;
  std::string parent;
  std::string child;
  JointKind kind = JointKind::kSpherical;
  Vector3d position = Vector3d::Zero();  // m, model frame
  Vector3d axis = Vector3d::UnitZ();     // revolute/prismatic/translation axis
  // Fixed child pose relative to the joint frame when kind == kLocked.
  Matrix3d lock_rotation = Matrix3d::Identity();
  Vector3d lock_translation = Vector3d::Zero();

  int dof() const { return dof_count(kind); }
  bool operator==(const JointSpec&) const = default;
};

enum class RestraintMode { kCardan, kPid };

// Per-DoF linear spring-damper, or PID when mode == kPid. For spherical DoF
// the coordinates are Cardan angles (x-y-z) of the relative rotation.
struct RestraintSpec {
  std::string joint;
  RestraintMode mode = RestraintMode::kPid;
  std::vector<double> stiffness;       // N m/rad or N/m
  std::vector<double> damping;         // N m s/rad or N s/m
  std::vector<double> integral_gain;   // PID only
  std::vector<double> setpoint;        // neutral coordinate values
  std::vector<double> integral_clamp;  // |integral| bound; empty -> default
  bool operator==(const RestraintSpec&) const = default;
};

enum class GeomKind { kSuperellipsoid, kPlane };

struct ContactGeom {
  std::string name;
  std::string owner;  // segment name or kEnvironment
  GeomKind kind = GeomKind::kSuperellipsoid;
  Vector3d semi_axes = Vector3d::Ones();  // m
  int degree = 2;
  // Superellipsoid centre / plane point, in the model frame at the
  // reference posture (seat frame for the environment).
  Vector3d center = Vector3d::Zero();
  Matrix3d rotation = Matrix3d::Identity();  // shape axes in model frame
  Vector3d normal = Vector3d::UnitZ();       // plane only
  bool operator==(const ContactGeom&) const = default;
};

struct ContactParams {
  double stiffness = 0.0;   // N/m
  double damping = 0.0;     // N s/m
  double friction = 0.0;    // Coulomb coefficient
  double v_reg = 0.01;      // m/s
  bool operator==(const ContactParams&) const = default;
};

struct ContactPairSpec {
  std::string name;
  std::string slave;   // superellipsoid geometry on a segment
  std::string master;  // plane or superellipsoid
  ContactParams params;
  bool operator==(const ContactPairSpec&) const = default;
};

// Linear spring-damper between a segment point and a seat-fixed anchor.
struct PointRestraintSpec {
  std::string name;
  std::string segment;
  Vector3d point = Vector3d::Zero();   // model frame
  Vector3d anchor = Vector3d::Zero();  // seat frame
  double stiffness = 0.0;
  double damping = 0.0;
  bool operator==(const PointRestraintSpec&) const = default;
};

struct Marker {
  std::string name;
  std::string segment;
  Vector3d point = Vector3d::Zero();  // model frame
  bool operator==(const Marker&) const = default;
};

enum class BaseKind { kFree, kFixed };

struct BodyModel {
  std::string name;
  std::string root;
  BaseKind base = BaseKind::kFree;
  Vector3d gravity{0.0, 0.0, -9.81};
  std::vector<Segment> segments;
  std::vector<JointSpec> joints;
  std::vector<RestraintSpec> restraints;
  std::vector<ContactGeom> geometry;
  std::vector<ContactPairSpec> contacts;
  std::vector<PointRestraintSpec> point_restraints;
  std::vector<Marker> markers;

  std::optional<int> segment_index(std::string_view name) const;
  std::optional<int> joint_index(std::string_view name) const;
  std::optional<int> geometry_index(std::string_view name) const;
  std::optional<int> contact_index(std::string_view name) const;
  const RestraintSpec* restraint_for(std::string_view joint) const;
  RestraintSpec* restraint_for(std::string_view joint);

  bool operator==(const BodyModel&) const = default;
};

// Parses and cross-checks a model config. Throws ParseError, ReferenceError
// or UnitError. load_model also runs validate_model and throws ParseError on
// the first failure; parse_model skips that step.
BodyModel parse_model(std::string_view config_text);
BodyModel load_model(std::string_view config_text);
BodyModel load_model_file(const std::string& path);
BodyModel parse_model_file(const std::string& path);

// Canonical config text (lengths written in m at full precision), such that
// load_model(serialize_model(m)) == m.
std::string serialize_model(const BodyModel& model);

struct JointReport {
  std::string name;
  std::string kind;
  int dof = 0;
};

struct ValidationReport {
  double total_mass = 0.0;
  int internal_dof = 0;
  int base_dof = 0;
  std::vector<JointReport> joints;
  bool connected = false;
  std::vector<std::string> inertia_violations;  // segments failing triangle
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  std::string to_text() const;
  std::string to_json() const;
};

ValidationReport validate_model(const BodyModel& model);

}  // namespace ehm

#endif  // EHM_MODEL_HPP_
