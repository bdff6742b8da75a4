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

#include "ehm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <json.hpp>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Matrix3d quaternion_rotation(const Eigen::VectorXd& q, int index) {
  const Eigen::Quaterniond quat(q(index), q(index + 1), q(index + 2),
                                q(index + 3));
  return quat.toRotationMatrix();
}

long steps_in(double span, double dt) {
  return static_cast<long>(std::llround(span / dt));
}

}  // namespace

Axis axis_from_string(const std::string& text) {
  if (text == "x" || text == "X") return Axis::kX;
  if (text == "y" || text == "Y") return Axis::kY;
  if (text == "z" || text == "Z") return Axis::kZ;
  throw InvalidArgument("unknown axis '" + text + "' (expected x, y or z)");
}

char axis_letter(Axis axis) { return "xyz"[static_cast<int>(axis)]; }

Scenario load_scenario(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    s.duration = j.value("duration", s.duration);
    s.step = j.value("step", s.step);
    s.settle_time = j.value("settle_time", s.settle_time);
    s.decimation = j.value("decimation", s.decimation);
    s.highpass_corner = j.value("highpass_corner", s.highpass_corner);
    s.divergence_bound = j.value("divergence_bound", s.divergence_bound);
    s.log_contacts = j.value("log_contacts", s.log_contacts);
    s.record_settling = j.value("record_settling", s.record_settling);
    if (j.contains("excitation")) {
      for (const json& e : j.at("excitation")) {
        ExcitationSpec x;
        x.axis = axis_from_string(e.at("axis").get<std::string>());
        if (e.contains("band")) {
          x.band_low = e.at("band").at(0).get<double>();
          x.band_high = e.at("band").at(1).get<double>();
        }
        x.rms = e.value("rms", x.rms);
        x.seed = e.value("seed", x.seed);
        x.sample_rate = e.value("sample_rate", x.sample_rate);
        if (e.contains("file")) {
          std::filesystem::path p = e.at("file").get<std::string>();
          if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
          x.file = p.string();
        }
        s.excitation.push_back(x);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!(s.duration > 0.0)) throw ParseError("scenario: duration must be > 0");
  if (!(s.step > 0.0)) throw ParseError("scenario: step must be > 0");
  if (s.settle_time < 0.0 || s.settle_time >= s.duration) {
    throw ParseError("scenario: settle_time must lie in [0, duration)");
  }
  if (s.decimation < 1) throw ParseError("scenario: decimation must be >= 1");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return load_scenario(read_file(path, "scenario"), dir);
}

Scenario default_scenario(Axis axis, std::uint64_t seed) {
  Scenario s;
  s.name = std::string("random_") + axis_letter(axis);
  ExcitationSpec e;
  e.axis = axis;
  e.seed = seed;
  s.excitation.push_back(e);
  return s;
}

// SeatMotion ---------------------------------------------------------------

SeatMotion::SeatMotion(const Scenario& scenario) : start_(scenario.settle_time) {
  for (const ExcitationSpec& e : scenario.excitation) {
    const int a = static_cast<int>(e.axis);
    if (active_[a]) {
      throw InvalidArgument(std::string("axis ") + axis_letter(e.axis) +
                            " excited twice");
    }
    SignalSeries acc;
    if (!e.file.empty()) {
      acc = load_signal(e.file).series;
    } else {
      acc = generate_random_vibration(e.band_low, e.band_high, e.rms,
                                      scenario.excitation_duration(),
                                      e.sample_rate, e.seed);
    }
    acc.label = std::string("seat_a") + axis_letter(e.axis);
    axes_[a] = integrate_acceleration(acc, scenario.highpass_corner);
    active_[a] = true;
  }
}

double SeatMotion::sample(const SignalSeries& s, double t) const {
  const Eigen::Index n = s.size();
  if (n == 0) return 0.0;
  const double x = (t - start_) * s.sample_rate;
  if (x <= 0.0) return x < 0.0 ? 0.0 : s.samples(0);
  if (x >= static_cast<double>(n - 1)) return s.samples(n - 1);
  const auto k = static_cast<Eigen::Index>(x);
  const double w = x - static_cast<double>(k);
  return (1.0 - w) * s.samples(k) + w * s.samples(k + 1);
}

Vector3d SeatMotion::position(double t) const {
  Vector3d out = Vector3d::Zero();
  for (int a = 0; a < 3; ++a) {
    if (active_[a]) out(a) = sample(axes_[a].position, t);
  }
  return out;
}

Vector3d SeatMotion::velocity(double t) const {
  Vector3d out = Vector3d::Zero();
  for (int a = 0; a < 3; ++a) {
    if (active_[a]) out(a) = sample(axes_[a].velocity, t);
  }
  return out;
}

Vector3d SeatMotion::acceleration(double t) const {
  Vector3d out = Vector3d::Zero();
  for (int a = 0; a < 3; ++a) {
    if (active_[a]) out(a) = sample(axes_[a].acceleration, t);
  }
  return out;
}

// Trajectory ---------------------------------------------------------------

int Trajectory::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

SignalSeries Trajectory::series(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ReferenceError("trajectory has no channel '" + name + "'");
  SignalSeries s;
  s.sample_rate = sample_rate;
  s.samples = data.col(c);
  s.label = name;
  return s;
}

std::string format_trajectory(const Trajectory& trajectory) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "# sample_rate_hz=%.17g\n",
                trajectory.sample_rate);
  out += buf;
  for (size_t c = 0; c < trajectory.columns.size(); ++c) {
    if (c) out += ',';
    out += trajectory.columns[c];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < trajectory.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < trajectory.data.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), c ? ",%.17g" : "%.17g",
                    trajectory.data(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_trajectory(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trajectory '" + path + "'");
  out << format_trajectory(trajectory);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Trajectory parse_trajectory(const std::string& text) {
  Trajectory t;
  std::istringstream in(text);
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("sample_rate_hz=");
      if (eq != std::string::npos) {
        t.sample_rate = std::stod(line.substr(eq + 15));
      }
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    if (t.columns.empty()) {
      while (std::getline(row, cell, ',')) t.columns.push_back(cell);
      continue;
    }
    size_t count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("trajectory: bad number '" + cell + "'");
      }
      ++count;
    }
    if (count != t.columns.size()) {
      throw ParseError("trajectory: row has " + std::to_string(count) +
                       " cells, header has " +
                       std::to_string(t.columns.size()));
    }
  }
  if (t.columns.empty()) throw ParseError("trajectory: missing header");
  const auto cols = static_cast<Eigen::Index>(t.columns.size());
  const auto rows = static_cast<Eigen::Index>(values.size()) / cols;
  t.data = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                    Eigen::RowMajor>>(values.data(), rows, cols);
  if (t.sample_rate <= 0.0 && rows >= 2 && t.column("time") == 0) {
    t.sample_rate = 1.0 / (t.data(1, 0) - t.data(0, 0));
  }
  return t;
}

Trajectory load_trajectory(const std::string& path) {
  return parse_trajectory(read_file(path, "trajectory"));
}

// Simulator ----------------------------------------------------------------

Simulator::Simulator(const BodyModel& model, const Scenario& scenario)
    : model_(model), scenario_(scenario) {
  if (!(scenario_.step > 0.0)) throw InvalidArgument("step must be > 0");
  if (!(scenario_.duration > 0.0)) throw InvalidArgument("duration must be > 0");
  mb_ = std::make_unique<Multibody>(model_);
  solver_ = std::make_unique<ArticulatedBodySolver>(*mb_);
  seat_ = SeatMotion(scenario_);

  int pid_count = 0;
  for (const RestraintSpec& spec : model_.restraints) {
    const auto j = model_.joint_index(spec.joint);
    if (!j) throw ReferenceError("restraint on unknown joint '" + spec.joint + "'");
    Restraint r;
    r.joint = *j;
    r.mode = spec.mode;
    r.coords = mb_->joint_coordinates(*j);
    const auto n = static_cast<Eigen::Index>(r.coords.size());
    if (n == 0) continue;  // locked joint
    if (static_cast<Eigen::Index>(spec.stiffness.size()) != n ||
        static_cast<Eigen::Index>(spec.damping.size()) != n) {
      throw ReferenceError("restraint '" + spec.joint +
                           "' does not match the joint DoF");
    }
    r.stiffness = Eigen::Map<const Eigen::VectorXd>(spec.stiffness.data(), n);
    r.damping = Eigen::Map<const Eigen::VectorXd>(spec.damping.data(), n);
    r.setpoint = spec.setpoint.empty()
                     ? Eigen::VectorXd::Zero(n)
                     : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                           spec.setpoint.data(), n));
    if (r.mode == RestraintMode::kPid) r.pid = pid_count++;
    restraints_.push_back(std::move(r));
  }

  for (const ContactPairSpec& spec : model_.contacts) {
    ContactPair p;
    p.name = spec.name;
    p.params = spec.params;
    p.slave = *model_.geometry_index(spec.slave);
    p.master = *model_.geometry_index(spec.master);
    const ContactGeom& gs = model_.geometry[static_cast<size_t>(p.slave)];
    const ContactGeom& gm = model_.geometry[static_cast<size_t>(p.master)];
    const auto ss = model_.segment_index(gs.owner);
    if (!ss) throw ReferenceError("contact slave must sit on a segment");
    p.slave_segment = *ss;
    const auto ms = model_.segment_index(gm.owner);
    p.master_segment = ms ? *ms : -1;
    pairs_.push_back(p);
  }
  normal_force_.assign(pairs_.size(), 0.0);
  hints_.assign(pairs_.size(), Vector3d::Zero());

  for (const Marker& m : model_.markers) {
    const auto s = model_.segment_index(m.segment);
    if (!s) throw ReferenceError("marker '" + m.name + "' on unknown segment");
    marker_segments_.push_back(*s);
  }
  wrenches_.assign(model_.segments.size(), Wrench{});
  tau_ = Eigen::VectorXd::Zero(mb_->nv());
  qdd_ = Eigen::VectorXd::Zero(mb_->nv());
}

State Simulator::initial_state() const {
  State s;
  s.time = 0.0;
  s.q = mb_->neutral_configuration();
  s.v = Eigen::VectorXd::Zero(mb_->nv());
  for (size_t i = 0; i < restraints_.size(); ++i) {
    const Restraint& r = restraints_[i];
    if (r.pid < 0) continue;
    const RestraintSpec& spec = *model_.restraint_for(
        model_.joints[static_cast<size_t>(r.joint)].name);
    const int n = static_cast<int>(r.coords.size());
    PidState pid = PidState::zeros(n);
    pid.kp = r.stiffness;
    pid.kd = r.damping;
    for (int k = 0; k < n; ++k) {
      const auto ks = static_cast<size_t>(k);
      pid.ki(k) = ks < spec.integral_gain.size() ? spec.integral_gain[ks] : 0.0;
      pid.clamp(k) = ks < spec.integral_clamp.size()
                         ? spec.integral_clamp[ks]
                         : default_integral_clamp(pid.kp(k), pid.ki(k));
    }
    s.pid.push_back(pid);
  }
  return s;
}

void Simulator::coordinates(const Restraint& r, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& v, Eigen::VectorXd& value,
                            Eigen::VectorXd& rate) const {
  const auto n = static_cast<Eigen::Index>(r.coords.size());
  value.resize(n);
  rate.resize(n);
  const auto& links = mb_->links();
  for (Eigen::Index i = 0; i < n; ++i) {
    const JointCoordinate& c = r.coords[static_cast<size_t>(i)];
    const Link& link = links[static_cast<size_t>(c.link)];
    if (c.kind == JointCoordinate::Kind::kScalar) {
      value(i) = q(link.q_index);
      rate(i) = v(link.v_index);
      continue;
    }
    // Cardan triple, components 0..2 in sequence.
    const Vector3d phi =
        cardan_angles<double>(quaternion_rotation(q, link.q_index)).angles;
    const Vector3d omega = v.segment<3>(link.v_index);
    const Vector3d phi_dot = cardan_rate_matrix<double>(phi).lu().solve(omega);
    value.segment<3>(i) = phi;
    rate.segment<3>(i) = phi_dot;
    i += 2;
  }
}

Pose Simulator::geometry_pose(const ContactGeom& geom, int segment) const {
  if (segment < 0) return Pose{geom.rotation, geom.center};
  const int li = mb_->link_of_segment(segment);
  return Pose{kin_.rotation[static_cast<size_t>(li)] * geom.rotation,
              segment_point_position(*mb_, kin_, segment, geom.center)};
}

BodyVelocity Simulator::geometry_velocity(const ContactGeom& geom,
                                          int segment) const {
  if (segment < 0) return BodyVelocity{};
  const auto li = static_cast<size_t>(mb_->link_of_segment(segment));
  return BodyVelocity{
      segment_point_velocity(*mb_, kin_, segment, geom.center),
      kin_.rotation[li] * kin_.velocity[li].head<3>()};
}

void Simulator::compute_loads(const State& state,
                              std::vector<ContactSample>* log) {
  tau_.setZero();
  for (Wrench& w : wrenches_) w = Wrench{};
  const auto& links = mb_->links();

  Eigen::VectorXd value, rate, force;
  for (const Restraint& r : restraints_) {
    coordinates(r, state.q, state.v, value, rate);
    const Eigen::VectorXd error = r.setpoint - value;
    const Eigen::VectorXd error_rate = -rate;
    if (r.pid >= 0) {
      force = pid_force(state.pid[static_cast<size_t>(r.pid)], error, error_rate);
    } else {
      force = r.stiffness.cwiseProduct(error) + r.damping.cwiseProduct(error_rate);
    }
    for (size_t i = 0; i < r.coords.size(); ++i) {
      const JointCoordinate& c = r.coords[i];
      const Link& link = links[static_cast<size_t>(c.link)];
      const auto ii = static_cast<Eigen::Index>(i);
      if (c.kind == JointCoordinate::Kind::kScalar) {
        tau_(link.v_index) += force(ii);
        continue;
      }
      // Power-consistent map of Cardan torques onto the joint angular
      // velocity: tau_omega = B^-T tau_phi.
      const Matrix3d b = cardan_rate_matrix<double>(value.segment<3>(ii));
      tau_.segment<3>(link.v_index) +=
          b.transpose().lu().solve(Vector3d(force.segment<3>(ii)));
      i += 2;
    }
  }

  for (const PointRestraintSpec& p : model_.point_restraints) {
    const int s = *model_.segment_index(p.segment);
    const Vector3d x = segment_point_position(*mb_, kin_, s, p.point);
    const Vector3d xd = segment_point_velocity(*mb_, kin_, s, p.point);
    const Vector3d f =
        point_restraint_force(x - p.anchor, xd, p.stiffness, p.damping);
    const Vector3d cog = segment_point_position(
        *mb_, kin_, s, model_.segments[static_cast<size_t>(s)].cog);
    Wrench& w = wrenches_[static_cast<size_t>(s)];
    w.force += f;
    w.torque += (x - cog).cross(f);
  }

  for (size_t k = 0; k < pairs_.size(); ++k) {
    const ContactPair& pair = pairs_[k];
    const ContactGeom& gs = model_.geometry[static_cast<size_t>(pair.slave)];
    const ContactGeom& gm = model_.geometry[static_cast<size_t>(pair.master)];
    const ContactResult result = detect_penetration(
        gs, geometry_pose(gs, pair.slave_segment), gm,
        geometry_pose(gm, pair.master_segment),
        geometry_velocity(gs, pair.slave_segment),
        geometry_velocity(gm, pair.master_segment), &hints_[k]);
    Vector3d f = Vector3d::Zero();
    if (result.in_contact) {
      f = contact_force(result, pair.params);
      auto apply = [&](int segment, const Vector3d& force_on) {
        const Vector3d cog = segment_point_position(
            *mb_, kin_, segment,
            model_.segments[static_cast<size_t>(segment)].cog);
        Wrench& w = wrenches_[static_cast<size_t>(segment)];
        w.force += force_on;
        w.torque += (result.point - cog).cross(force_on);
      };
      apply(pair.slave_segment, f);
      if (pair.master_segment >= 0) apply(pair.master_segment, -f);
    }
    normal_force_[k] = f.dot(result.normal);
    if (log) log->push_back(ContactSample{pair.name, result, f});
  }
}

void Simulator::solve(const State& state, const Eigen::VectorXd* controls) {
  forward_kinematics(*mb_, state.q, &state.v, kin_);
  compute_loads(state, nullptr);
  if (controls) tau_ += *controls;
  link_forces_ = link_forces_from_wrenches(*mb_, kin_, wrenches_);
  const Vector3d g = mb_->gravity() - seat_.acceleration(state.time);
  solver_->solve(state.v, tau_, link_forces_, g, kin_, qdd_);
}

Eigen::VectorXd Simulator::acceleration(const State& state,
                                        const Eigen::VectorXd* controls) {
  solve(state, controls);
  return qdd_;
}

void Simulator::check(const State& state) const {
  if (!state.q.allFinite() || !state.v.allFinite()) {
    throw DivergenceError(state.time, "non-finite state");
  }
  const double vmax = state.v.cwiseAbs().maxCoeff();
  if (vmax > scenario_.divergence_bound) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "|v| = %.6g exceeds bound %.6g", vmax,
                  scenario_.divergence_bound);
    throw DivergenceError(state.time, buf);
  }
}

void Simulator::step(State& state, double dt, const Eigen::VectorXd* controls) {
  step_impl(state, dt, controls, nullptr);
}

void Simulator::step_impl(State& state, double dt,
                          const Eigen::VectorXd* controls,
                          Eigen::VectorXd* row) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be > 0");
  const double t0 = state.time;
  State stage = state;

  // Stage 1.
  solve(state, controls);
  if (row) *row = build_row(state);
  const Eigen::VectorXd dq1 = configuration_rate(*mb_, state.q, state.v);
  const Eigen::VectorXd dv1 = qdd_;

  auto advance = [&](const Eigen::VectorXd& dq, const Eigen::VectorXd& dv,
                     double h) {
    stage.q = state.q;
    integrate_configuration(*mb_, stage.q, h * dq);
    stage.v = state.v + h * dv;
    stage.time = t0 + h;
  };

  advance(dq1, dv1, 0.5 * dt);
  solve(stage, controls);
  const Eigen::VectorXd dq2 = configuration_rate(*mb_, stage.q, stage.v);
  const Eigen::VectorXd dv2 = qdd_;

  advance(dq2, dv2, 0.5 * dt);
  solve(stage, controls);
  const Eigen::VectorXd dq3 = configuration_rate(*mb_, stage.q, stage.v);
  const Eigen::VectorXd dv3 = qdd_;

  advance(dq3, dv3, dt);
  solve(stage, controls);
  const Eigen::VectorXd dq4 = configuration_rate(*mb_, stage.q, stage.v);
  const Eigen::VectorXd& dv4 = qdd_;

  integrate_configuration(*mb_, state.q,
                          (dt / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4));
  state.v += (dt / 6.0) * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4);
  normalize_configuration(*mb_, state.q);
  state.time = t0 + dt;

  Eigen::VectorXd value, rate;
  for (const Restraint& r : restraints_) {
    if (r.pid < 0) continue;
    coordinates(r, state.q, state.v, value, rate);
    PidState& pid = state.pid[static_cast<size_t>(r.pid)];
    pid = pid_update(pid, r.setpoint - value, -rate, dt).state;
  }
  check(state);
}

std::vector<std::string> Simulator::output_columns() const {
  static const char* kMarker[] = {"x",  "y",  "z",  "roll", "pitch", "yaw",
                                  "vx", "vy", "vz", "wx",   "wy",    "wz",
                                  "ax", "ay", "az", "alx",  "aly",   "alz"};
  static const char* kSeat[] = {"x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az"};
  std::vector<std::string> cols{"time"};
  for (const Marker& m : model_.markers) {
    for (const char* c : kMarker) cols.push_back(m.name + "_" + c);
  }
  for (const char* c : kSeat) cols.push_back(std::string("seat_") + c);
  if (scenario_.log_contacts) {
    for (const ContactPair& p : pairs_) cols.push_back("contact_" + p.name + "_fn");
  }
  return cols;
}

Eigen::VectorXd Simulator::build_row(const State& state) const {
  const size_t nm = model_.markers.size();
  const Eigen::Index n = 1 + 18 * static_cast<Eigen::Index>(nm) + 9 +
                         (scenario_.log_contacts
                              ? static_cast<Eigen::Index>(pairs_.size())
                              : 0);
  Eigen::VectorXd row(n);
  row(0) = state.time;
  const Vector3d seat_x = seat_.position(state.time);
  const Vector3d seat_v = seat_.velocity(state.time);
  const Vector3d seat_a = seat_.acceleration(state.time);
  const auto& acc = solver_->accelerations();
  Eigen::Index c = 1;
  for (size_t m = 0; m < nm; ++m) {
    const int s = marker_segments_[m];
    const auto li = static_cast<size_t>(mb_->link_of_segment(s));
    const Matrix3d& rot = kin_.rotation[li];
    const Vector3d local = model_.markers[m].point - mb_->links()[li].origin;
    const Vector3d w = kin_.velocity[li].head<3>();
    const Vector3d vo = kin_.velocity[li].tail<3>();
    const Vector3d alpha = acc[li].head<3>();
    const Vector3d ao = acc[li].tail<3>();
    const Vector3d vp = vo + w.cross(local);
    const Vector3d ap = ao + alpha.cross(local) + w.cross(vp);
    row.segment<3>(c) = kin_.position[li] + rot * local + seat_x;
    row.segment<3>(c + 3) = cardan_angles<double>(rot).angles;
    row.segment<3>(c + 6) = rot * vp + seat_v;
    row.segment<3>(c + 9) = rot * w;
    row.segment<3>(c + 12) = rot * ap + seat_a;
    row.segment<3>(c + 15) = rot * alpha;
    c += 18;
  }
  row.segment<3>(c) = seat_x;
  row.segment<3>(c + 3) = seat_v;
  row.segment<3>(c + 6) = seat_a;
  c += 9;
  if (scenario_.log_contacts) {
    for (double f : normal_force_) row(c++) = f;
  }
  return row;
}

Eigen::VectorXd Simulator::output_row(const State& state) {
  solve(state, nullptr);
  return build_row(state);
}

State Simulator::settle() {
  State state = initial_state();
  const long n = steps_in(scenario_.settle_time, scenario_.step);
  for (long k = 0; k < n; ++k) {
    step(state, scenario_.step);
    state.time = static_cast<double>(k + 1) * scenario_.step;
  }
  return state;
}

Trajectory Simulator::run() {
  const double dt = scenario_.step;
  const long total = steps_in(scenario_.duration, dt);
  const long settle_steps = steps_in(scenario_.settle_time, dt);
  const long first = scenario_.record_settling ? 0 : settle_steps;
  const long dec = scenario_.decimation;
  const long samples = (total - first + dec - 1) / dec;

  Trajectory traj;
  traj.columns = output_columns();
  traj.sample_rate = 1.0 / (dt * static_cast<double>(dec));
  traj.data.resize(samples, static_cast<Eigen::Index>(traj.columns.size()));

  State state = initial_state();
  Eigen::VectorXd row;
  Eigen::Index r = 0;
  for (long k = 0; k < total; ++k) {
    const bool record = k >= first && (k - first) % dec == 0;
    step_impl(state, dt, nullptr, record ? &row : nullptr);
    if (record) traj.data.row(r++) = row.transpose();
    state.time = static_cast<double>(k + 1) * dt;
  }
  return traj;
}

std::vector<ContactSample> Simulator::contacts(const State& state) {
  forward_kinematics(*mb_, state.q, &state.v, kin_);
  std::vector<ContactSample> log;
  compute_loads(state, &log);
  return log;
}

Vector3d Simulator::total_contact_force(const State& state) {
  Vector3d total = Vector3d::Zero();
  for (size_t k = 0; const ContactSample& c : contacts(state)) {
    if (pairs_[k++].master_segment < 0) total += c.force;
  }
  return total;
}

Eigen::VectorXd Simulator::posture_error(const State& state) const {
  std::vector<double> out;
  Eigen::VectorXd value, rate;
  for (const Restraint& r : restraints_) {
    coordinates(r, state.q, state.v, value, rate);
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      out.push_back(std::abs(value(i) - r.setpoint(i)));
    }
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(),
                                     static_cast<Eigen::Index>(out.size()));
}

State step(const BodyModel& model, const State& state,
           const Scenario& scenario, const Eigen::VectorXd& controls,
           double dt) {
  Simulator sim(model, scenario);
  State next = state;
  sim.step(next, dt, controls.size() ? &controls : nullptr);
  return next;
}

Trajectory simulate(const BodyModel& model, const Scenario& scenario) {
  Simulator sim(model, scenario);
  return sim.run();
}

}  // namespace ehm
