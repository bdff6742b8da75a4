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

#include <string>

#include "ehm/errors.hpp"
#include "ehm/model.hpp"
#include "support.hpp"

namespace ehm {
namespace {

using testing::reference_model;

struct TableJoint {
  const char* name;
  const char* child;
  const char* parent;
  const char* kind;
  double x, y, z;  // m
};

// Joint table of the reference model, cm already shifted to m by hand.
constexpr TableJoint kJoints[] = {
    {"J1_upper_neck", "head", "neck", "spherical", -0.0885, 0, 0.6304},
    {"J2_lower_neck", "neck", "torso_upper", "universal", -0.1085, 0, 0.5139},
    {"J3_T12", "torso_upper", "torso_middle", "spherical_translation", -0.1601, 0, 0.2290},
    {"J4_L4L5", "torso_middle", "torso_lower", "spherical", -0.1250, 0, 0.0814},
    {"J5_waist", "torso_lower", "pelvis", "locked", -0.0795, 0, -0.0021},
    {"J6_hip_right", "thigh_right", "pelvis", "spherical", 0.0254, 0.0886, 0.0178},
    {"J7_hip_left", "thigh_left", "pelvis", "spherical", 0.0254, -0.0886, 0.0178},
    {"J8_knee_right", "leg_right", "thigh_right", "revolute", 0.4308, 0.1401, 0.0865},
    {"J9_knee_left", "leg_left", "thigh_left", "revolute", 0.4308, -0.1401, 0.0865},
    {"J10_ankle_right", "foot_right", "leg_right", "revolute", 0.6940, 0.1575, -0.3067},
    {"J11_ankle_left", "foot_left", "leg_left", "revolute", 0.6940, -0.1575, -0.3067},
};

struct TableSegment {
  const char* name;
  int degree;
  double mass, ixx, iyy, izz, x, y, z;
};

constexpr TableSegment kSegments[] = {
    {"head", 2, 6.23, 0.031, 0.031, 0.020, -0.05461, 0, 0.69104},
    {"neck", 2, 1.6, 0.003, 0.004, 0.005, -0.09420, 0, 0.57393},
    {"torso_upper", 3, 8.93, 0.238, 0.146, 0.181, -0.08231, 0, 0.34692},
    {"torso_middle", 3, 7.7, 0.238, 0.146, 0.181, -0.03827, 0, 0.15927},
    {"torso_lower", 3, 10.70, 0.137, 0.078, 0.117, 0.002164, 0, 0.05172},
    {"pelvis", 2, 10.93, 0.115, 0.050, 0.151, 0, 0, 0},
    {"thigh_right", 3, 7.7, 0.007, 0.129, 0.129, 0.21859, 0.1124, 0.03450},
    {"thigh_left", 3, 7.7, 0.007, 0.129, 0.129, 0.21859, -0.1124, 0.03450},
    {"leg_right", 3, 3.58, 0.031, 0.031, 0.020, 0.55405, 0.148, -0.09823},
    {"leg_left", 3, 3.58, 0.031, 0.031, 0.020, 0.55405, -0.148, -0.09823},
    {"foot_right", 3, 1.116, 0.001, 0.005, 0.004, 0.75409, 0.1659, -0.31332},
    {"foot_left", 3, 1.116, 0.001, 0.005, 0.004, 0.75409, -0.1659, -0.31332},
};

TEST(LoadModel, ReferenceHasTwelveSegmentsElevenJointsPelvisRoot) {
  const BodyModel m = reference_model();
  EXPECT_EQ(m.segments.size(), 12u);
  EXPECT_EQ(m.joints.size(), 11u);
  EXPECT_EQ(m.root, "pelvis");
  EXPECT_EQ(m.base, BaseKind::kFree);
  EXPECT_EQ(m.gravity, Vector3d(0, 0, -9.81));
}

TEST(LoadModel, UpperNeckPositionConvertedToMetres) {
  const BodyModel m = reference_model();
  const JointSpec& j = m.joints[static_cast<size_t>(*m.joint_index("J1_upper_neck"))];
  EXPECT_EQ(j.position, Vector3d(-0.0885, 0, 0.6304));
}

TEST(LoadModel, JointTableMatchesBitExactly) {
  const BodyModel m = reference_model();
  for (const TableJoint& t : kJoints) {
    SCOPED_TRACE(t.name);
    const auto i = m.joint_index(t.name);
    ASSERT_TRUE(i.has_value());
    const JointSpec& j = m.joints[static_cast<size_t>(*i)];
    EXPECT_EQ(j.child, t.child);
    EXPECT_EQ(j.parent, t.parent);
    EXPECT_EQ(to_string(j.kind), t.kind);
    EXPECT_EQ(j.position, Vector3d(t.x, t.y, t.z));
  }
}

TEST(LoadModel, SegmentTableMatchesBitExactly) {
  const BodyModel m = reference_model();
  for (const TableSegment& t : kSegments) {
    SCOPED_TRACE(t.name);
    const auto i = m.segment_index(t.name);
    ASSERT_TRUE(i.has_value());
    const Segment& s = m.segments[static_cast<size_t>(*i)];
    EXPECT_EQ(s.mass, t.mass);
    EXPECT_EQ(s.inertia_diag, Vector3d(t.ixx, t.iyy, t.izz));
    EXPECT_EQ(s.cog, Vector3d(t.x, t.y, t.z));
    const auto g = m.geometry_index(std::string(t.name) + "_e");
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(m.geometry[static_cast<size_t>(*g)].degree, t.degree);
  }
}

TEST(LoadModel, DanglingSegmentReferenceIsReferenceError) {
  const std::string text = R"({"units": {"length": "m"}, "root": "pelvis",
    "segments": [{"name": "pelvis", "mass": 1, "inertia": [1, 1, 1], "cog": [0, 0, 0]}],
    "joints": [{"name": "j", "parent": "pelvis", "child": "torso_upper",
                "type": "spherical", "position": [0, 0, 0]}]})";
  try {
    load_model(text);
    FAIL() << "expected ReferenceError";
  } catch (const ReferenceError& e) {
    EXPECT_NE(std::string(e.what()).find("torso_upper"), std::string::npos);
  }
}

TEST(LoadModel, MalformedTextIsParseError) {
  EXPECT_THROW(load_model("{\"segments\": [}"), ParseError);
}

TEST(LoadModel, NegativeMassIsUnitError) {
  const std::string text = R"({"segments": [{"name": "a", "mass": -1,
    "inertia": [1, 1, 1], "cog": [0, 0, 0]}]})";
  EXPECT_THROW(load_model(text), UnitError);
}

TEST(LoadModel, RestraintLengthMustMatchDof) {
  const std::string text = R"({"units": {"length": "m"},
    "segments": [{"name": "a", "mass": 1, "inertia": [1, 1, 1], "cog": [0, 0, 0]},
                 {"name": "b", "mass": 1, "inertia": [1, 1, 1], "cog": [0, 0, 1]}],
    "joints": [{"name": "j", "parent": "a", "child": "b", "type": "universal",
                "position": [0, 0, 0.5]}],
    "restraints": [{"joint": "j", "stiffness": [1, 2, 3], "damping": [1, 1, 1]}]})";
  EXPECT_THROW(load_model(text), UnitError);
}

TEST(LoadModel, MissingFileIsIoError) {
  EXPECT_THROW(load_model_file("/nonexistent/ehm.json"), IoError);
}

TEST(ValidateModel, ReferenceTotalMassAndDof) {
  const ValidationReport r = validate_model(reference_model());
  const double hand_sum = 6.23 + 1.6 + 8.93 + 7.7 + 10.70 + 10.93 + 2 * 7.7 +
                          2 * 3.58 + 2 * 1.116;
  EXPECT_NEAR(r.total_mass, 70.882, 1e-12);
  EXPECT_NEAR(r.total_mass, hand_sum, 1e-12);
  EXPECT_EQ(r.internal_dof, 3 + 2 + 4 + 3 + 0 + 3 + 3 + 1 + 1 + 1 + 1);
  EXPECT_EQ(r.base_dof, 6);
  EXPECT_TRUE(r.connected);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.inertia_violations.empty());
}

TEST(ValidateModel, PerJointDofFollowsKind) {
  const ValidationReport r = validate_model(reference_model());
  ASSERT_EQ(r.joints.size(), 11u);
  const int expected[] = {3, 2, 4, 3, 0, 3, 3, 1, 1, 1, 1};
  for (size_t i = 0; i < 11; ++i) EXPECT_EQ(r.joints[i].dof, expected[i]) << i;
}

TEST(ValidateModel, DisconnectedFootClearsConnectivity) {
  BodyModel m = reference_model();
  for (size_t i = 0; i < m.joints.size(); ++i) {
    if (m.joints[i].name == "J11_ankle_left") {
      m.joints.erase(m.joints.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  std::erase_if(m.restraints, [](const RestraintSpec& r) { return r.joint == "J11_ankle_left"; });
  const ValidationReport r = validate_model(m);
  EXPECT_FALSE(r.connected);
  EXPECT_FALSE(r.ok());
}

TEST(ValidateModel, InertiaTriangleViolationFlagged) {
  BodyModel m = reference_model();
  m.segments[0].inertia_diag = Vector3d(1.0, 0.1, 0.1);
  const ValidationReport r = validate_model(m);
  ASSERT_EQ(r.inertia_violations.size(), 1u);
  EXPECT_EQ(r.inertia_violations[0], "head");
}

TEST(ValidateModel, ReportHasTextAndJsonForms) {
  const ValidationReport r = validate_model(reference_model());
  EXPECT_NE(r.to_text().find("70.882"), std::string::npos);
  EXPECT_NE(r.to_json().find("\"internal_dof\""), std::string::npos);
}

TEST(Serialize, RoundTripIsIdentity) {
  const BodyModel m = reference_model();
  const BodyModel back = load_model(serialize_model(m));
  EXPECT_TRUE(back == m);
  EXPECT_EQ(serialize_model(back), serialize_model(m));
}

TEST(Serialize, RoundTripOnChainWithEveryJointKind) {
  const BodyModel m = load_model(testing::chain_json(
      6, "fixed", Vector3d(0, 0, -9.81),
      {"spherical", "universal", "revolute", "spherical_translation", "prismatic", "locked"}));
  EXPECT_TRUE(load_model(serialize_model(m)) == m);
}

}  // namespace
}  // namespace ehm
