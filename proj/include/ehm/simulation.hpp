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

// Time integration of the seated body under prescribed seat translation.
//
// Dynamics run in the seat frame: the seat only translates, so its motion
// enters as the inertial field g - a_seat(t). Marker outputs add the seat
// motion back and are reported in the inertial frame.

#ifndef EHM_SIMULATION_HPP_
#define EHM_SIMULATION_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehm/contact.hpp"
#include "ehm/dynamics.hpp"
#include "ehm/model.hpp"
#include "ehm/restraints.hpp"
#include "ehm/signal.hpp"

namespace ehm {

enum class Axis { kX = 0, kY = 1, kZ = 2 };
Axis axis_from_string(const std::string& text);
char axis_letter(Axis axis);

// One excited seat axis: a generated random signal or a loaded file.
struct ExcitationSpec {
  Axis axis = Axis::kZ;
  double band_low = 0.1;    // Hz
  double band_high = 12.0;  // Hz
  double rms = 0.3;         // m/s^2
  std::uint64_t seed = 42;
  double sample_rate = 1000.0;
  std::string file;         // overrides the generator when set
};

struct Scenario {
  std::string name = "scenario";
  double duration = 35.0;       // total simulated time, s
  double step = 1e-3;           // s
  double settle_time = 10.0;    // static seat before the excitation, s
  int decimation = 10;          // output every n-th step
  double highpass_corner = 0.05;   // Hz, seat acceleration integration
  double divergence_bound = 1e3;   // |v_i| limit
  bool log_contacts = false;
  bool record_settling = false;    // also output the settling phase
  std::vector<ExcitationSpec> excitation;

  double excitation_duration() const { return duration - settle_time; }
};

// Reads a scenario key tree; relative signal paths resolve against base_dir.
Scenario load_scenario(const std::string& text, const std::string& base_dir = "");
Scenario load_scenario_file(const std::string& path);
Scenario default_scenario(Axis axis, std::uint64_t seed = 42);

// Seat translation sampled on a uniform grid, linearly interpolated.
class SeatMotion {
 public:
  SeatMotion() = default;
  // Builds the motion of each excited axis; the excitation starts at
  // scenario.settle_time.
  explicit SeatMotion(const Scenario& scenario);

  Vector3d position(double t) const;
  Vector3d velocity(double t) const;
  Vector3d acceleration(double t) const;
  // The acceleration series of an axis as excited (m/s^2), possibly empty.
  const std::array<AxisMotion, 3>& axes() const { return axes_; }
  bool active(Axis a) const { return active_[static_cast<int>(a)]; }

 private:
  double sample(const SignalSeries& s, double t) const;

  std::array<AxisMotion, 3> axes_;
  std::array<bool, 3> active_{false, false, false};
  double start_ = 0.0;
};

struct State {
  double time = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  std::vector<PidState> pid;  // one per PID restraint, model order
};

// Sampled marker and seat kinematics. Column order:
//   time, then per marker m: m_x m_y m_z m_roll m_pitch m_yaw m_vx m_vy m_vz
//   m_wx m_wy m_wz m_ax m_ay m_az m_alx m_aly m_alz,
//   then seat_x seat_y seat_z seat_vx seat_vy seat_vz seat_ax seat_ay
//   seat_az, then optional contact_<pair>_fn columns.
struct Trajectory {
  std::vector<std::string> columns;
  Eigen::MatrixXd data;  // samples x columns
  double sample_rate = 0.0;

  Eigen::Index rows() const { return data.rows(); }
  int column(const std::string& name) const;  // -1 when absent
  SignalSeries series(const std::string& name) const;
};

std::string format_trajectory(const Trajectory& trajectory);
void save_trajectory(const Trajectory& trajectory, const std::string& path);
Trajectory parse_trajectory(const std::string& text);
Trajectory load_trajectory(const std::string& path);

struct ContactSample {
  std::string name;
  ContactResult result;
  Vector3d force = Vector3d::Zero();  // on the slave body, world
};

class Simulator {
 public:
  Simulator(const BodyModel& model, const Scenario& scenario);

  const BodyModel& model() const { return model_; }
  const Multibody& multibody() const { return *mb_; }
  const Scenario& scenario() const { return scenario_; }
  const SeatMotion& seat() const { return seat_; }

  // Reference posture at rest, PID integrals zero.
  State initial_state() const;

  // One RK4 step of length dt. Optional generalized forces are added to the
  // restraint and contact loads. Throws DivergenceError.
  void step(State& state, double dt,
            const Eigen::VectorXd* controls = nullptr);

  // Settling plus excitation, sampled every `decimation` steps.
  Trajectory run();
  // Settling only; returns the settled state.
  State settle();

  // Generalized velocity derivative at (state) with the PID integrals held.
  Eigen::VectorXd acceleration(const State& state,
                               const Eigen::VectorXd* controls = nullptr);

  // Per-contact detection and force at the state's configuration.
  std::vector<ContactSample> contacts(const State& state);
  // Sum of the contact forces acting on the body, world.
  Vector3d total_contact_force(const State& state);
  // |coordinate - setpoint| per restrained DoF, concatenated in restraint
  // order (rad, or m for translations).
  Eigen::VectorXd posture_error(const State& state) const;

  // Row of marker and seat outputs for the state, using the accelerations
  // of the last acceleration() call at this state.
  Eigen::VectorXd output_row(const State& state);
  std::vector<std::string> output_columns() const;

 private:
  struct Restraint {
    int joint = -1;
    RestraintMode mode = RestraintMode::kPid;
    std::vector<JointCoordinate> coords;
    Eigen::VectorXd stiffness, damping, setpoint;
    int pid = -1;  // index into State::pid
  };
  struct ContactPair {
    std::string name;
    int slave = -1;
    int master = -1;
    int slave_segment = -1;
    int master_segment = -1;  // -1: seat frame
    ContactParams params;
  };

  void coordinates(const Restraint& r, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& v, Eigen::VectorXd& value,
                   Eigen::VectorXd& rate) const;
  // Fills tau_ and wrenches_ from kin_ (which must match the state).
  void compute_loads(const State& state, std::vector<ContactSample>* log);
  void solve(const State& state, const Eigen::VectorXd* controls);
  Eigen::VectorXd build_row(const State& state) const;
  Pose geometry_pose(const ContactGeom& geom, int segment) const;
  BodyVelocity geometry_velocity(const ContactGeom& geom, int segment) const;
  void check(const State& state) const;
  void step_impl(State& state, double dt, const Eigen::VectorXd* controls,
                 Eigen::VectorXd* row);

  BodyModel model_;
  Scenario scenario_;
  std::unique_ptr<Multibody> mb_;
  std::unique_ptr<ArticulatedBodySolver> solver_;
  SeatMotion seat_;
  Kinematics kin_;
  std::vector<Restraint> restraints_;
  std::vector<ContactPair> pairs_;
  std::vector<int> marker_segments_;
  std::vector<Wrench> wrenches_;
  std::vector<Vector6d> link_forces_;
  Eigen::VectorXd tau_;
  Eigen::VectorXd qdd_;
  std::vector<double> normal_force_;  // per pair, last evaluation
  std::vector<Vector3d> hints_;       // per pair, last depth direction
};

// Free-function forms.
State step(const BodyModel& model, const State& state,
           const Scenario& scenario, const Eigen::VectorXd& controls,
           double dt);
Trajectory simulate(const BodyModel& model, const Scenario& scenario);

}  // namespace ehm

#endif  // EHM_SIMULATION_HPP_
