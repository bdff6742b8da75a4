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

#include "ehm/contact.hpp"

#include <algorithm>
#include <cmath>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

constexpr int kMaxIterations = 100;
constexpr double kGradientTolerance = 1e-10;  // m
constexpr double kDepthTolerance = 1e-10;     // m, per-iteration decrease

bool finite_pose(const Pose& pose) {
  return pose.rotation.allFinite() && pose.position.allFinite();
}

struct PlacedShape {
  const ContactGeom* geom;
  const Pose* pose;

  Vector3d support(const Vector3d& world_dir) const {
    const Vector3d local = pose->rotation.transpose() * world_dir;
    return pose->position +
           pose->rotation *
               superellipsoid_support(geom->semi_axes, geom->degree, local);
  }
};

}  // namespace

namespace {

// t^(1 / (n - 1)) and s^(1 / n), with cheap forms for the usual degrees.
inline double root_n_minus_1(double t, int n) {
  switch (n) {
    case 3: return std::sqrt(t);
    case 4: return std::cbrt(t);
    default: return std::pow(t, 1.0 / (n - 1.0));
  }
}

inline double root_n(double s, int n) {
  switch (n) {
    case 3: return std::cbrt(s);
    case 4: return std::sqrt(std::sqrt(s));
    default: return std::pow(s, 1.0 / n);
  }
}

}  // namespace

// The support function is the dual norm ||a o u||_m with m = n / (n - 1);
// the maximiser follows from equality in Hoelder's inequality. With
// t = |a o u| / max|a o u| and p = t^(m-1), ||.||_m = max * S^(1/m) where
// S = sum t p, and the maximiser is a sign(w) p / S^(1/n).
Vector3d superellipsoid_support(const Vector3d& semi_axes, int degree,
                                const Vector3d& direction) {
  const Vector3d w = semi_axes.cwiseProduct(direction);
  if (degree == 2) {
    const double norm = w.norm();
    if (norm == 0.0) return Vector3d::Zero();
    return semi_axes.cwiseProduct(w / norm);
  }
  const double scale = w.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Vector3d::Zero();
  Vector3d p;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = std::abs(w(i)) / scale;
    p(i) = root_n_minus_1(t, degree);
    sum += t * p(i);
  }
  const double denom = root_n(sum, degree);
  Vector3d out;
  for (int i = 0; i < 3; ++i) {
    out(i) = semi_axes(i) * std::copysign(p(i) / denom, w(i));
  }
  return out;
}

double superellipsoid_support_value(const Vector3d& semi_axes, int degree,
                                    const Vector3d& direction) {
  const Vector3d w = semi_axes.cwiseProduct(direction);
  if (degree == 2) return w.norm();
  const double scale = w.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = std::abs(w(i)) / scale;
    sum += t * root_n_minus_1(t, degree);
  }
  // S^(1/m) = S / S^(1/n).
  return scale * sum / root_n(sum, degree);
}

double superellipsoid_inside_outside(const Vector3d& semi_axes, int degree,
                                     const Vector3d& point) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    sum += std::pow(std::abs(point(i) / semi_axes(i)), degree);
  }
  return sum;
}

ContactResult detect_penetration(const ContactGeom& a, const Pose& pose_a,
                                 const ContactGeom& b, const Pose& pose_b,
                                 const BodyVelocity& velocity_a,
                                 const BodyVelocity& velocity_b,
                                 Vector3d* direction_hint) {
  if (!finite_pose(pose_a) || !finite_pose(pose_b)) {
    throw InvalidArgument("detect_penetration: non-finite pose for '" +
                          a.name + "' / '" + b.name + "'");
  }
  if (a.kind != GeomKind::kSuperellipsoid) {
    throw InvalidArgument("detect_penetration: geometry A ('" + a.name +
                          "') must be a superellipsoid");
  }
  const PlacedShape shape_a{&a, &pose_a};
  ContactResult result;

  if (b.kind == GeomKind::kPlane) {
    const Vector3d normal = (pose_b.rotation * b.normal).normalized();
    const Vector3d deepest = shape_a.support(-normal);
    const double depth = normal.dot(pose_b.position - deepest);
    if (depth > 0.0) {
      result.in_contact = true;
      result.depth = depth;
      result.point = deepest;
      result.normal = normal;
    }
  } else {
    const PlacedShape shape_b{&b, &pose_b};
    // Bounding-sphere rejection.
    const Vector3d d = pose_b.position - pose_a.position;
    if (d.norm() > a.semi_axes.norm() + b.semi_axes.norm()) return result;

    // Overlap along n (pointing from A to B) is
    //   g(n) = max_A n.x - min_B n.x = h_A(n) + h_B(-n).
    // The shapes intersect iff g > 0 for every n; the depth is min g.
    Vector3d n = d.norm() > 1e-12 ? Vector3d(d.normalized()) : Vector3d::UnitZ();
    auto overlap = [&](const Vector3d& dir, Vector3d& sa, Vector3d& sb) {
      sa = shape_a.support(dir);
      sb = shape_b.support(-dir);
      return dir.dot(sa - sb);
    };
    Vector3d sa, sb;
    double g = overlap(n, sa, sb);
    if (g <= 0.0) return result;
    if (direction_hint && direction_hint->squaredNorm() > 0.5) {
      Vector3d ha, hb;
      const double gh = overlap(*direction_hint, ha, hb);
      if (gh <= 0.0) return result;
      if (gh < g) {
        n = *direction_hint;
        g = gh;
        sa = ha;
        sb = hb;
      }
    }
    const double scale = a.semi_axes.maxCoeff() + b.semi_axes.maxCoeff();
    double step = 1.0;
    for (int it = 0; it < kMaxIterations; ++it) {
      const Vector3d delta = sa - sb;
      const Vector3d grad = delta - delta.dot(n) * n;
      const double grad_norm = grad.norm();
      if (grad_norm < kGradientTolerance) break;
      bool accepted = false;
      const double previous = g;
      while (step > 1e-12) {
        const Vector3d trial = (n - step * grad / scale).normalized();
        Vector3d ta, tb;
        const double gt = overlap(trial, ta, tb);
        if (gt < g) {
          n = trial;
          g = gt;
          sa = ta;
          sb = tb;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      if (g <= 0.0) return result;  // separating direction found
      if (previous - g < kDepthTolerance) break;
      step = std::min(1.0, step * 2.0);
    }
    result.in_contact = true;
    result.depth = g;
    result.point = sa;
    result.normal = -n;
    if (direction_hint) *direction_hint = n;
  }
  if (result.in_contact) {
    result.relative_velocity = velocity_a.at(pose_a, result.point) -
                               velocity_b.at(pose_b, result.point);
  }
  return result;
}

Vector3d contact_force(const ContactResult& result,
                       const ContactParams& params) {
  if (!result.in_contact) return Vector3d::Zero();
  const double v_n = result.normal.dot(result.relative_velocity);
  const double fn =
      std::max(0.0, params.stiffness * result.depth - params.damping * v_n);
  Vector3d force = fn * result.normal;
  const Vector3d v_t = result.relative_velocity - v_n * result.normal;
  const double speed = v_t.norm();
  if (fn > 0.0 && params.friction > 0.0 && speed > 0.0) {
    force -= params.friction * fn * std::tanh(speed / params.v_reg) *
             (v_t / speed);
  }
  return force;
}

}  // namespace ehm
