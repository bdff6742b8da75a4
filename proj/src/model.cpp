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

#include "ehm/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

using Json = nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

const Json& require(const Json& node, const char* key, const std::string& ctx) {
  auto it = node.find(key);
  if (it == node.end()) {
    throw ParseError(ctx + ": missing key '" + key + "'");
  }
  return *it;
}

double as_number(const Json& node, const std::string& ctx) {
  if (!node.is_number()) throw ParseError(ctx + ": expected a number");
  return node.get<double>();
}

std::string as_string(const Json& node, const std::string& ctx) {
  if (!node.is_string()) throw ParseError(ctx + ": expected a string");
  return node.get<std::string>();
}

Vector3d as_vec3(const Json& node, const std::string& ctx,
                 double scale = 1.0) {
  if (!node.is_array() || node.size() != 3) {
    throw ParseError(ctx + ": expected an array of 3 numbers");
  }
  Vector3d v;
  for (int i = 0; i < 3; ++i) v(i) = as_number(node[i], ctx) * scale;
  return v;
}

// Shifts the decimal point of the shortest round-trip representation, so a
// table value like -8.85 cm becomes exactly the double nearest -0.0885 m.
double convert_length(double value, double divisor) {
  if (divisor == 1.0) return value;
  const int shift = divisor == 100.0 ? 2 : 3;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf) - 8, value,
                                 std::chars_format::scientific);
  std::string text(buf, res.ptr);
  const size_t e = text.find('e');
  const int exponent = std::stoi(text.substr(e + 1)) - shift;
  text = text.substr(0, e) + "e" + std::to_string(exponent);
  return std::strtod(text.c_str(), nullptr);
}

Vector3d as_length3(const Json& node, const std::string& ctx, double divisor) {
  Vector3d v = as_vec3(node, ctx);
  for (int i = 0; i < 3; ++i) v(i) = convert_length(v(i), divisor);
  return v;
}

std::vector<double> as_vector(const Json& node, const std::string& ctx) {
  if (!node.is_array()) throw ParseError(ctx + ": expected an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& e : node) out.push_back(as_number(e, ctx));
  return out;
}

Matrix3d parse_rotation(const Json& node, const std::string& ctx) {
  if (auto it = node.find("rotation"); it != node.end()) {
    if (!it->is_array() || it->size() != 3) {
      throw ParseError(ctx + ": rotation must be a 3x3 row-major array");
    }
    Matrix3d r;
    for (int i = 0; i < 3; ++i) r.row(i) = as_vec3((*it)[i], ctx).transpose();
    if (!(r.transpose() * r).isIdentity(1e-9) || r.determinant() < 0.0) {
      throw UnitError(ctx + ": rotation is not a proper rotation matrix");
    }
    return r;
  }
  if (auto it = node.find("rotation_deg"); it != node.end()) {
    return cardan_to_rotation<double>(as_vec3(*it, ctx, kPi / 180.0));
  }
  return Matrix3d::Identity();
}

Vector3d unit_axis(const Vector3d& axis, const std::string& ctx) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw UnitError(ctx + ": axis must be a finite non-zero vector");
  }
  return std::abs(n - 1.0) > 1e-12 ? Vector3d(axis / n) : axis;
}

Json rotation_json(const Matrix3d& r) {
  Json rows = Json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({r(i, 0), r(i, 1), r(i, 2)});
  return rows;
}

Json vec_json(const Vector3d& v) { return Json::array({v(0), v(1), v(2)}); }

void require_nonnegative(const std::vector<double>& values,
                         const std::string& ctx) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw UnitError(ctx + " must be finite and >= 0");
    }
  }
}

}  // namespace

int dof_count(JointKind kind) {
  switch (kind) {
    case JointKind::kSpherical: return 3;
    case JointKind::kUniversal: return 2;
    case JointKind::kRevolute: return 1;
    case JointKind::kSphericalPlusTranslation: return 4;
    case JointKind::kPrismatic: return 1;
    case JointKind::kLocked: return 0;
  }
  return 0;
}

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kSpherical: return "spherical";
    case JointKind::kUniversal: return "universal";
    case JointKind::kRevolute: return "revolute";
    case JointKind::kSphericalPlusTranslation: return "spherical_translation";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kLocked: return "locked";
  }
  return "unknown";
}

JointKind joint_kind_from_string(std::string_view text) {
  static const std::map<std::string, JointKind, std::less<>> kinds = {
      {"spherical", JointKind::kSpherical},
      {"universal", JointKind::kUniversal},
      {"revolute", JointKind::kRevolute},
      {"spherical_translation", JointKind::kSphericalPlusTranslation},
      {"prismatic", JointKind::kPrismatic},
      {"locked", JointKind::kLocked},
  };
  auto it = kinds.find(text);
  if (it == kinds.end()) {
    throw ParseError("unknown joint type '" + std::string(text) + "'");
  }
  return it->second;
}

std::optional<int> BodyModel::segment_index(std::string_view n) const {
  for (size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> BodyModel::joint_index(std::string_view n) const {
  for (size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> BodyModel::geometry_index(std::string_view n) const {
  for (size_t i = 0; i < geometry.size(); ++i) {
    if (geometry[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> BodyModel::contact_index(std::string_view n) const {
  for (size_t i = 0; i < contacts.size(); ++i) {
    if (contacts[i].name == n) return static_cast<int>(i);
  }
  return std::nullopt;
}

const RestraintSpec* BodyModel::restraint_for(std::string_view joint) const {
  for (const auto& r : restraints) {
    if (r.joint == joint) return &r;
  }
  return nullptr;
}

RestraintSpec* BodyModel::restraint_for(std::string_view joint) {
  for (auto& r : restraints) {
    if (r.joint == joint) return &r;
  }
  return nullptr;
}

BodyModel parse_model(std::string_view config_text) {
  Json root;
  try {
    root = Json::parse(config_text, nullptr, /*allow_exceptions=*/true,
                       /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!root.is_object()) throw ParseError("model config must be an object");

  double divisor = 100.0;
  if (auto it = root.find("units"); it != root.end()) {
    const std::string unit =
        as_string(require(*it, "length", "units"), "units.length");
    if (unit == "cm") {
      divisor = 100.0;
    } else if (unit == "mm") {
      divisor = 1000.0;
    } else if (unit == "m") {
      divisor = 1.0;
    } else {
      throw ParseError("units.length must be one of cm, mm, m");
    }
  }

  BodyModel model;
  model.name = root.value("name", std::string("model"));
  if (auto it = root.find("gravity"); it != root.end()) {
    model.gravity = as_vec3(*it, "gravity");
  }
  if (auto it = root.find("base"); it != root.end()) {
    const std::string base = as_string(*it, "base");
    if (base == "free") {
      model.base = BaseKind::kFree;
    } else if (base == "fixed") {
      model.base = BaseKind::kFixed;
    } else {
      throw ParseError("base must be 'free' or 'fixed'");
    }
  }

  std::set<std::string> names;
  auto unique = [&names](const std::string& kind, const std::string& name) {
    if (name.empty()) throw ParseError(kind + " with empty name");
    if (!names.insert(kind + ":" + name).second) {
      throw ParseError("duplicate " + kind + " '" + name + "'");
    }
  };

  for (const auto& s : require(root, "segments", "model")) {
    Segment seg;
    seg.name = as_string(require(s, "name", "segment"), "segment.name");
    const std::string ctx = "segment '" + seg.name + "'";
    unique("segment", seg.name);
    seg.mass = as_number(require(s, "mass", ctx), ctx + ".mass");
    seg.inertia_diag = as_vec3(require(s, "inertia", ctx), ctx + ".inertia");
    seg.cog = as_length3(require(s, "cog", ctx), ctx + ".cog", divisor);
    if (!(seg.mass > 0.0) || !std::isfinite(seg.mass)) {
      throw UnitError(ctx + ": mass must be > 0");
    }
    if (!(seg.inertia_diag.minCoeff() > 0.0) || !seg.inertia_diag.allFinite()) {
      throw UnitError(ctx + ": inertia components must be > 0");
    }
    model.segments.push_back(seg);
  }

  model.root = root.contains("root") ? as_string(root["root"], "root")
                                     : (model.segments.empty()
                                            ? std::string()
                                            : model.segments.front().name);
  if (!model.segment_index(model.root)) {
    throw ReferenceError("root segment '" + model.root + "' does not exist");
  }

  if (auto it = root.find("joints"); it != root.end()) {
    for (const auto& j : *it) {
      JointSpec joint;
      joint.name = as_string(require(j, "name", "joint"), "joint.name");
      const std::string ctx = "joint '" + joint.name + "'";
      unique("joint", joint.name);
      joint.parent = as_string(require(j, "parent", ctx), ctx + ".parent");
      joint.child = as_string(require(j, "child", ctx), ctx + ".child");
      joint.kind =
          joint_kind_from_string(as_string(require(j, "type", ctx), ctx));
      joint.position =
          as_length3(require(j, "position", ctx), ctx + ".position", divisor);
      if (!joint.position.allFinite()) {
        throw UnitError(ctx + ": position must be finite");
      }
      for (const auto* end : {&joint.parent, &joint.child}) {
        if (!model.segment_index(*end)) {
          throw ReferenceError(ctx + " references unknown segment '" + *end +
                               "'");
        }
      }
      if (auto a = j.find("axis"); a != j.end()) {
        joint.axis = unit_axis(as_vec3(*a, ctx + ".axis"), ctx);
      } else if (joint.kind == JointKind::kRevolute ||
                 joint.kind == JointKind::kPrismatic) {
        throw ParseError(ctx + ": revolute/prismatic joints need an axis");
      }
      if (joint.kind == JointKind::kLocked) {
        joint.lock_rotation = parse_rotation(j, ctx);
        if (auto t = j.find("lock_translation"); t != j.end()) {
          joint.lock_translation =
              as_length3(*t, ctx + ".lock_translation", divisor);
        }
      }
      model.joints.push_back(joint);
    }
  }

  if (auto it = root.find("restraints"); it != root.end()) {
    for (const auto& r : *it) {
      RestraintSpec spec;
      spec.joint = as_string(require(r, "joint", "restraint"), "restraint");
      const std::string ctx = "restraint on '" + spec.joint + "'";
      unique("restraint", spec.joint);
      auto ji = model.joint_index(spec.joint);
      if (!ji) throw ReferenceError(ctx + ": unknown joint");
      const size_t dof = static_cast<size_t>(model.joints[*ji].dof());
      const std::string mode = r.value("mode", std::string("pid"));
      if (mode == "pid") {
        spec.mode = RestraintMode::kPid;
      } else if (mode == "cardan") {
        spec.mode = RestraintMode::kCardan;
      } else {
        throw ParseError(ctx + ": mode must be 'pid' or 'cardan'");
      }
      spec.stiffness = as_vector(require(r, "stiffness", ctx), ctx);
      spec.damping = as_vector(require(r, "damping", ctx), ctx);
      auto optional_vector = [&](const char* key) {
        auto k = r.find(key);
        return k == r.end() ? std::vector<double>(dof, 0.0)
                            : as_vector(*k, ctx + "." + key);
      };
      spec.integral_gain = optional_vector("integral_gain");
      spec.setpoint = optional_vector("setpoint");
      if (auto k = r.find("integral_clamp"); k != r.end()) {
        spec.integral_clamp = as_vector(*k, ctx + ".integral_clamp");
      }
      for (const auto* v : {&spec.stiffness, &spec.damping,
                            &spec.integral_gain, &spec.setpoint}) {
        if (v->size() != dof) {
          throw UnitError(ctx + ": array lengths must equal the joint DoF (" +
                          std::to_string(dof) + ")");
        }
      }
      if (!spec.integral_clamp.empty() && spec.integral_clamp.size() != dof) {
        throw UnitError(ctx + ": integral_clamp length must equal joint DoF");
      }
      require_nonnegative(spec.stiffness, ctx + " stiffness");
      require_nonnegative(spec.damping, ctx + " damping");
      require_nonnegative(spec.integral_gain, ctx + " integral gain");
      require_nonnegative(spec.integral_clamp, ctx + " integral clamp");
      model.restraints.push_back(spec);
    }
  }

  if (auto it = root.find("geometry"); it != root.end()) {
    for (const auto& g : *it) {
      ContactGeom geom;
      geom.name = as_string(require(g, "name", "geometry"), "geometry.name");
      const std::string ctx = "geometry '" + geom.name + "'";
      unique("geometry", geom.name);
      geom.owner = as_string(require(g, "owner", ctx), ctx + ".owner");
      if (geom.owner != kEnvironment && !model.segment_index(geom.owner)) {
        throw ReferenceError(ctx + ": unknown owner '" + geom.owner + "'");
      }
      const std::string type = as_string(require(g, "type", ctx), ctx);
      if (type == "superellipsoid" || type == "ellipsoid") {
        geom.kind = GeomKind::kSuperellipsoid;
        geom.semi_axes = as_length3(require(g, "semi_axes", ctx),
                                    ctx + ".semi_axes", divisor);
        geom.degree = g.value("degree", 2);
        geom.center =
            as_length3(require(g, "center", ctx), ctx + ".center", divisor);
        geom.rotation = parse_rotation(g, ctx);
        if (!(geom.semi_axes.minCoeff() > 0.0)) {
          throw UnitError(ctx + ": semi-axes must be > 0");
        }
        if (geom.degree < 2) throw UnitError(ctx + ": degree must be >= 2");
      } else if (type == "plane") {
        geom.kind = GeomKind::kPlane;
        geom.center =
            as_length3(require(g, "point", ctx), ctx + ".point", divisor);
        geom.normal =
            unit_axis(as_vec3(require(g, "normal", ctx), ctx + ".normal"), ctx);
      } else {
        throw ParseError(ctx + ": type must be 'superellipsoid' or 'plane'");
      }
      model.geometry.push_back(geom);
    }
  }

  if (auto it = root.find("contacts"); it != root.end()) {
    for (const auto& c : *it) {
      ContactPairSpec pair;
      pair.name = as_string(require(c, "name", "contact"), "contact.name");
      const std::string ctx = "contact '" + pair.name + "'";
      unique("contact", pair.name);
      pair.slave = as_string(require(c, "slave", ctx), ctx + ".slave");
      pair.master = as_string(require(c, "master", ctx), ctx + ".master");
      auto si = model.geometry_index(pair.slave);
      auto mi = model.geometry_index(pair.master);
      if (!si) throw ReferenceError(ctx + ": unknown geometry " + pair.slave);
      if (!mi) throw ReferenceError(ctx + ": unknown geometry " + pair.master);
      if (model.geometry[*si].kind != GeomKind::kSuperellipsoid ||
          model.geometry[*si].owner == kEnvironment) {
        throw ParseError(ctx + ": slave must be a segment superellipsoid");
      }
      pair.params.stiffness = as_number(require(c, "stiffness", ctx), ctx);
      pair.params.damping = as_number(require(c, "damping", ctx), ctx);
      pair.params.friction = c.contains("friction")
                                 ? as_number(c["friction"], ctx)
                                 : 0.0;
      pair.params.v_reg = c.contains("v_reg") ? as_number(c["v_reg"], ctx)
                                              : 0.01;
      require_nonnegative({pair.params.stiffness, pair.params.damping,
                           pair.params.friction},
                          ctx + " parameters");
      if (!(pair.params.v_reg > 0.0)) throw UnitError(ctx + ": v_reg must be > 0");
      model.contacts.push_back(pair);
    }
  }

  if (auto it = root.find("point_restraints"); it != root.end()) {
    for (const auto& p : *it) {
      PointRestraintSpec spec;
      spec.name = as_string(require(p, "name", "point restraint"), "name");
      const std::string ctx = "point restraint '" + spec.name + "'";
      unique("point_restraint", spec.name);
      spec.segment = as_string(require(p, "segment", ctx), ctx);
      if (!model.segment_index(spec.segment)) {
        throw ReferenceError(ctx + ": unknown segment '" + spec.segment + "'");
      }
      spec.point = as_length3(require(p, "point", ctx), ctx, divisor);
      spec.anchor = as_length3(require(p, "anchor", ctx), ctx, divisor);
      spec.stiffness = as_number(require(p, "stiffness", ctx), ctx);
      spec.damping = as_number(require(p, "damping", ctx), ctx);
      require_nonnegative({spec.stiffness, spec.damping}, ctx);
      model.point_restraints.push_back(spec);
    }
  }

  if (auto it = root.find("markers"); it != root.end()) {
    for (const auto& m : *it) {
      Marker marker;
      marker.name = as_string(require(m, "name", "marker"), "marker.name");
      const std::string ctx = "marker '" + marker.name + "'";
      unique("marker", marker.name);
      marker.segment = as_string(require(m, "segment", ctx), ctx);
      if (!model.segment_index(marker.segment)) {
        throw ReferenceError(ctx + ": unknown segment '" + marker.segment +
                             "'");
      }
      marker.point = as_length3(require(m, "point", ctx), ctx, divisor);
      model.markers.push_back(marker);
    }
  }
  return model;
}

BodyModel load_model(std::string_view config_text) {
  BodyModel model = parse_model(config_text);
  const ValidationReport report = validate_model(model);
  if (!report.ok()) throw ParseError("invalid model: " + report.failures.front());
  return model;
}

namespace {

std::string read_model_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

BodyModel load_model_file(const std::string& path) {
  return load_model(read_model_text(path));
}

BodyModel parse_model_file(const std::string& path) {
  return parse_model(read_model_text(path));
}

std::string serialize_model(const BodyModel& model) {
  Json root;
  root["name"] = model.name;
  root["units"] = {{"length", "m"}};
  root["gravity"] = vec_json(model.gravity);
  root["base"] = model.base == BaseKind::kFree ? "free" : "fixed";
  root["root"] = model.root;

  Json segments = Json::array();
  for (const auto& s : model.segments) {
    segments.push_back({{"name", s.name},
                        {"mass", s.mass},
                        {"inertia", vec_json(s.inertia_diag)},
                        {"cog", vec_json(s.cog)}});
  }
  root["segments"] = segments;

  Json joints = Json::array();
  for (const auto& j : model.joints) {
    Json node = {{"name", j.name},
                 {"parent", j.parent},
                 {"child", j.child},
                 {"type", std::string(to_string(j.kind))},
                 {"position", vec_json(j.position)},
                 {"axis", vec_json(j.axis)}};
    if (j.kind == JointKind::kLocked) {
      node["rotation"] = rotation_json(j.lock_rotation);
      node["lock_translation"] = vec_json(j.lock_translation);
    }
    joints.push_back(node);
  }
  root["joints"] = joints;

  Json restraints = Json::array();
  for (const auto& r : model.restraints) {
    Json node = {{"joint", r.joint},
                 {"mode", r.mode == RestraintMode::kPid ? "pid" : "cardan"},
                 {"stiffness", r.stiffness},
                 {"damping", r.damping},
                 {"integral_gain", r.integral_gain},
                 {"setpoint", r.setpoint}};
    if (!r.integral_clamp.empty()) node["integral_clamp"] = r.integral_clamp;
    restraints.push_back(node);
  }
  root["restraints"] = restraints;

  Json geometry = Json::array();
  for (const auto& g : model.geometry) {
    Json node = {{"name", g.name}, {"owner", g.owner}};
    if (g.kind == GeomKind::kSuperellipsoid) {
      node["type"] = "superellipsoid";
      node["semi_axes"] = vec_json(g.semi_axes);
      node["degree"] = g.degree;
      node["center"] = vec_json(g.center);
      node["rotation"] = rotation_json(g.rotation);
    } else {
      node["type"] = "plane";
      node["point"] = vec_json(g.center);
      node["normal"] = vec_json(g.normal);
    }
    geometry.push_back(node);
  }
  root["geometry"] = geometry;

  Json contacts = Json::array();
  for (const auto& c : model.contacts) {
    contacts.push_back({{"name", c.name},
                        {"slave", c.slave},
                        {"master", c.master},
                        {"stiffness", c.params.stiffness},
                        {"damping", c.params.damping},
                        {"friction", c.params.friction},
                        {"v_reg", c.params.v_reg}});
  }
  root["contacts"] = contacts;

  Json points = Json::array();
  for (const auto& p : model.point_restraints) {
    points.push_back({{"name", p.name},
                      {"segment", p.segment},
                      {"point", vec_json(p.point)},
                      {"anchor", vec_json(p.anchor)},
                      {"stiffness", p.stiffness},
                      {"damping", p.damping}});
  }
  root["point_restraints"] = points;

  Json markers = Json::array();
  for (const auto& m : model.markers) {
    markers.push_back(
        {{"name", m.name}, {"segment", m.segment}, {"point", vec_json(m.point)}});
  }
  root["markers"] = markers;
  return root.dump(2) + "\n";
}

ValidationReport validate_model(const BodyModel& model) {
  ValidationReport report;
  report.base_dof = model.base == BaseKind::kFree ? 6 : 0;

  for (const auto& s : model.segments) {
    report.total_mass += s.mass;
    if (!(s.mass > 0.0)) {
      report.failures.push_back("segment '" + s.name + "' has mass <= 0");
    }
    const Vector3d& i = s.inertia_diag;
    if (!(i.minCoeff() > 0.0) || i(0) > i(1) + i(2) || i(1) > i(0) + i(2) ||
        i(2) > i(0) + i(1)) {
      report.inertia_violations.push_back(s.name);
      report.failures.push_back("segment '" + s.name +
                                "' violates the inertia triangle inequality");
    }
  }

  for (const auto& j : model.joints) {
    report.joints.push_back({j.name, std::string(to_string(j.kind)), j.dof()});
    report.internal_dof += j.dof();
    if (j.parent == j.child) {
      report.failures.push_back("joint '" + j.name + "' has parent == child");
    }
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      report.failures.push_back("joint '" + j.name + "' axis is not unit");
    }
    const RestraintSpec* r = model.restraint_for(j.name);
    if (r && r->stiffness.size() != static_cast<size_t>(j.dof())) {
      report.failures.push_back("restraint on '" + j.name +
                                "' does not match the joint DoF");
    }
  }
  for (const auto& r : model.restraints) {
    if (!model.joint_index(r.joint)) {
      report.failures.push_back("restraint references unknown joint '" +
                                r.joint + "'");
    }
  }

  // Tree check: every non-root segment is the child of exactly one joint,
  // the root of none, and everything is reachable from the root.
  const size_t n = model.segments.size();
  std::vector<int> parent_count(n, 0);
  std::multimap<std::string, std::string> children;
  bool references_ok = true;
  for (const auto& j : model.joints) {
    auto c = model.segment_index(j.child);
    auto p = model.segment_index(j.parent);
    if (!c || !p) {
      references_ok = false;
      continue;
    }
    ++parent_count[*c];
    children.emplace(j.parent, j.child);
  }
  bool tree = references_ok && model.segment_index(model.root).has_value();
  if (tree) {
    for (size_t i = 0; i < n; ++i) {
      const bool is_root = model.segments[i].name == model.root;
      if (parent_count[i] != (is_root ? 0 : 1)) tree = false;
    }
  }
  if (tree) {
    std::set<std::string> seen;
    std::vector<std::string> stack{model.root};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) {
        tree = false;
        break;
      }
      auto [lo, hi] = children.equal_range(cur);
      for (auto it = lo; it != hi; ++it) stack.push_back(it->second);
    }
    if (seen.size() != n) tree = false;
  }
  report.connected = tree;
  if (!tree) {
    report.failures.push_back("joint graph is not a tree spanning all "
                              "segments from the root");
  }
  return report;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out.precision(10);
  out << "total_mass_kg: " << total_mass << "\n";
  out << "internal_dof: " << internal_dof << "\n";
  out << "base_dof: " << base_dof << "\n";
  out << "connected: " << (connected ? "true" : "false") << "\n";
  out << "joints:\n";
  for (const auto& j : joints) {
    out << "  " << j.name << " " << j.kind << " dof=" << j.dof << "\n";
  }
  out << "inertia_triangle_violations: " << inertia_violations.size() << "\n";
  out << "failures: " << failures.size() << "\n";
  for (const auto& f : failures) out << "  - " << f << "\n";
  return out.str();
}

std::string ValidationReport::to_json() const {
  Json root;
  root["total_mass_kg"] = total_mass;
  root["internal_dof"] = internal_dof;
  root["base_dof"] = base_dof;
  root["connected"] = connected;
  Json js = Json::array();
  for (const auto& j : joints) {
    js.push_back({{"name", j.name}, {"kind", j.kind}, {"dof", j.dof}});
  }
  root["joints"] = js;
  root["inertia_triangle_violations"] = inertia_violations;
  root["failures"] = failures;
  return root.dump(2) + "\n";
}

}  // namespace ehm
