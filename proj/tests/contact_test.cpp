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
#include <limits>
#include <random>

#include <Eigen/Geometry>

#include "ehm/contact.hpp"
#include "ehm/errors.hpp"

namespace ehm {
namespace {

ContactGeom ellipsoid(const Vector3d& axes, int degree = 2) {
  ContactGeom g;
  g.name = "a";
  g.kind = GeomKind::kSuperellipsoid;
  g.semi_axes = axes;
  g.degree = degree;
  return g;
}

ContactGeom ground() {
  ContactGeom g;
  g.name = "ground";
  g.kind = GeomKind::kPlane;
  g.normal = Vector3d::UnitZ();
  return g;
}

Pose at(const Vector3d& p, const Matrix3d& r = Matrix3d::Identity()) {
  Pose pose;
  pose.position = p;
  pose.rotation = r;
  return pose;
}

// Surface points by radial projection of random directions, world frame.
std::vector<Vector3d> surface_samples(const ContactGeom& g, const Pose& pose, int count,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<Vector3d> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const Vector3d u(n(rng), n(rng), n(rng));
    double f = 0.0;
    for (int i = 0; i < 3; ++i) f += std::pow(std::abs(u(i) / g.semi_axes(i)), g.degree);
    out.push_back(pose.position + pose.rotation * (u / std::pow(f, 1.0 / g.degree)));
  }
  return out;
}

TEST(SpherePlane, ShallowPenetration) {
  const ContactResult r = detect_penetration(ellipsoid(Vector3d::Constant(0.1)),
                                             at(Vector3d(0, 0, 0.09)), ground(), Pose{});
  ASSERT_TRUE(r.in_contact);
  EXPECT_NEAR(r.depth, 0.01, 1e-15);
  EXPECT_EQ(r.normal, Vector3d::UnitZ());
  EXPECT_LT((r.point - Vector3d(0, 0, -0.01)).norm(), 1e-15);
}

TEST(SpherePlane, SeparatedSphereIsNotInContact) {
  const ContactResult r = detect_penetration(ellipsoid(Vector3d::Constant(0.1)),
                                             at(Vector3d(0, 0, 0.2)), ground(), Pose{});
  EXPECT_FALSE(r.in_contact);
  EXPECT_EQ(contact_force(r, {10000, 500, 0.5, 0.01}), Vector3d::Zero());
}

TEST(SphereSphere, EqualSpheresOnXAxis) {
  ContactGeom b = ellipsoid(Vector3d::Constant(0.1));
  b.name = "b";
  const ContactResult r = detect_penetration(ellipsoid(Vector3d::Constant(0.1)), Pose{}, b,
                                             at(Vector3d(0.19, 0, 0)));
  ASSERT_TRUE(r.in_contact);
  EXPECT_NEAR(r.depth, 0.01, 1e-9);
  EXPECT_NEAR(std::abs(r.normal.x()), 1.0, 1e-9);
  EXPECT_NEAR(r.normal.norm(), 1.0, 1e-12);
}

TEST(SphereSphere, FarApartIsNotInContact) {
  const ContactResult r = detect_penetration(ellipsoid(Vector3d::Constant(0.1)), Pose{},
                                             ellipsoid(Vector3d::Constant(0.1)),
                                             at(Vector3d(0.25, 0.01, 0)));
  EXPECT_FALSE(r.in_contact);
}

TEST(Superellipsoid, SupportMatchesSampledSurface) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int degree : {2, 3, 4, 6}) {
    const ContactGeom g = ellipsoid(Vector3d(0.12, 0.08, 0.05), degree);
    const auto pts = surface_samples(g, Pose{}, 200000, 11);
    for (int k = 0; k < 5; ++k) {
      const Vector3d dir = Vector3d(n(rng), n(rng), n(rng)).normalized();
      double best = -1e300;
      for (const auto& p : pts) best = std::max(best, dir.dot(p));
      const Vector3d s = superellipsoid_support(g.semi_axes, degree, dir);
      EXPECT_NEAR(superellipsoid_inside_outside(g.semi_axes, degree, s), 1.0, 1e-9);
      EXPECT_NEAR(dir.dot(s), superellipsoid_support_value(g.semi_axes, degree, dir), 1e-12);
      EXPECT_GE(dir.dot(s), best - 1e-12);
      EXPECT_LT(dir.dot(s) - best, 1e-4) << "degree " << degree;
    }
  }
}

TEST(Superellipsoid, RotatedPlaneDepthMatchesBruteForce) {
  const ContactGeom g = ellipsoid(Vector3d(0.15, 0.1, 0.06), 4);
  const Matrix3d rot =
      (Eigen::AngleAxisd(0.4, Vector3d::UnitX()) * Eigen::AngleAxisd(-0.3, Vector3d::UnitY()))
          .toRotationMatrix();
  const Pose pose = at(Vector3d(0.02, -0.01, 0.07), rot);
  const ContactResult r = detect_penetration(g, pose, ground(), Pose{});
  double lowest = 1e300;
  for (const auto& p : surface_samples(g, pose, 400000, 3)) lowest = std::min(lowest, p.z());
  ASSERT_TRUE(r.in_contact);
  EXPECT_NEAR(r.depth, -lowest, 2e-5);
  EXPECT_GE(r.depth, -lowest - 1e-12);
}

// Depth of a ball into a convex body is r - dist(centre, body).
TEST(Superellipsoid, DepthAgainstBallMatchesDistanceOracle) {
  const Matrix3d rot = Eigen::AngleAxisd(0.7, Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  for (int degree : {2, 4}) {
    const ContactGeom a = ellipsoid(Vector3d(0.14, 0.09, 0.06), degree);
    const Pose pa = at(Vector3d::Zero(), rot);
    ContactGeom ball = ellipsoid(Vector3d::Constant(0.05));
    ball.name = "ball";
    const Vector3d centre = rot * Vector3d(0.16, 0.03, 0.02);
    const ContactResult r = detect_penetration(a, pa, ball, at(centre));
    double dist = 1e300;
    for (const auto& p : surface_samples(a, pa, 400000, 8)) dist = std::min(dist, (p - centre).norm());
    ASSERT_LT(dist, 0.05);
    ASSERT_TRUE(r.in_contact);
    EXPECT_NEAR(r.depth, 0.05 - dist, 5e-5) << "degree " << degree;
    EXPECT_NEAR(r.normal.norm(), 1.0, 1e-12);
  }
}

TEST(Detection, IsDeterministic) {
  const ContactGeom a = ellipsoid(Vector3d(0.14, 0.09, 0.06), 4);
  ContactGeom b = ellipsoid(Vector3d(0.1, 0.1, 0.08), 2);
  b.name = "b";
  const Pose pb = at(Vector3d(0.1, 0.05, 0.1));
  const ContactResult r1 = detect_penetration(a, Pose{}, b, pb);
  const ContactResult r2 = detect_penetration(a, Pose{}, b, pb);
  EXPECT_EQ(r1.depth, r2.depth);
  EXPECT_EQ(r1.normal, r2.normal);
  EXPECT_EQ(r1.point, r2.point);
}

TEST(Detection, NanPoseIsRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(detect_penetration(ellipsoid(Vector3d::Constant(0.1)), at(Vector3d(0, nan, 0)),
                                  ground(), Pose{}),
               InvalidArgument);
}

TEST(Detection, RelativeVelocityAtContactPoint) {
  BodyVelocity va;
  va.linear = Vector3d(0.1, 0, -0.2);
  va.angular = Vector3d(0, 0, 1);
  const ContactResult r = detect_penetration(ellipsoid(Vector3d::Constant(0.1)),
                                             at(Vector3d(0, 0, 0.09)), ground(), Pose{}, va);
  // Point (0, 0, -0.01): the spin about z adds nothing there.
  EXPECT_LT((r.relative_velocity - Vector3d(0.1, 0, -0.2)).norm(), 1e-15);
}

ContactResult contact_with(double depth, const Vector3d& velocity) {
  ContactResult r;
  r.in_contact = true;
  r.depth = depth;
  r.normal = Vector3d::UnitZ();
  r.relative_velocity = velocity;
  return r;
}

TEST(ContactForce, ElasticTermByHand) {
  const Vector3d f = contact_force(contact_with(0.01, Vector3d::Zero()), {10000, 500, 0.5, 0.01});
  EXPECT_NEAR(f.z(), 100.0, 1e-12);
  EXPECT_EQ(f.head<2>(), Eigen::Vector2d::Zero());
}

TEST(ContactForce, FastSeparationIsClampedToZero) {
  const Vector3d f = contact_force(contact_with(0.001, Vector3d(0, 0, 1.0)), {10000, 500, 0.5, 0.01});
  EXPECT_EQ(f, Vector3d::Zero());
}

TEST(ContactForce, FrictionSaturatesAtCoulombLimit) {
  const Vector3d f = contact_force(contact_with(0.01, Vector3d(5.0, 0, 0)), {10000, 0, 0.5, 0.01});
  EXPECT_NEAR(f.z(), 100.0, 1e-12);
  EXPECT_NEAR(f.x(), -50.0, 1e-9);
}

TEST(ContactForce, NormalNonNegativeAndFrictionBoundedProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1), pos(0, 1);
  for (int k = 0; k < 10000; ++k) {
    const ContactParams p{1e5 * pos(rng), 1e3 * pos(rng), pos(rng), 0.001 + 0.1 * pos(rng)};
    const Vector3d f = contact_force(contact_with(0.02 * pos(rng), Vector3d(u(rng), u(rng), u(rng))), p);
    ASSERT_GE(f.z(), 0.0);
    ASSERT_LE(f.head<2>().norm(), p.friction * f.z() * (1 + 1e-12));
  }
}

TEST(ContactForce, ContinuousAtOnset) {
  const ContactParams p{50000, 500, 0.4, 0.01};
  double previous = 1e300;
  for (double d = 1e-3; d > 1e-12; d *= 0.1) {
    const double f = contact_force(contact_with(d, Vector3d(0.3, 0, 0)), p).norm();
    EXPECT_LT(f, previous);
    previous = f;
  }
  EXPECT_LT(previous, 1e-6);
}

// Ball dropped on the ground: each bounce leaves it with less energy.
TEST(ContactForce, DampedBounceDissipates) {
  const ContactGeom ball = ellipsoid(Vector3d::Constant(0.1));
  const ContactParams p{20000, 40, 0, 0.01};
  const double m = 1.0, g = 9.81, dt = 1e-5;
  double z = 0.2, vz = 0.0;
  auto energy = [&] { return 0.5 * m * vz * vz + m * g * z; };
  const double e0 = energy();
  bool touched = false;
  for (int k = 0; k < 200000; ++k) {
    BodyVelocity v;
    v.linear = Vector3d(0, 0, vz);
    const ContactResult r = detect_penetration(ball, at(Vector3d(0, 0, z)), ground(), Pose{}, v);
    touched = touched || r.in_contact;
    const double fz = contact_force(r, p).z();
    vz += dt * (fz / m - g);
    z += dt * vz;
    if (!r.in_contact && touched && vz > 0) {
      EXPECT_LE(energy(), e0);
      touched = false;
    }
  }
  EXPECT_LT(energy(), e0);
}

}  // namespace
}  // namespace ehm
