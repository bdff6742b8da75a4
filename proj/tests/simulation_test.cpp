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

#include <algorithm>
#include <cmath>

#include "ehm/errors.hpp"
#include "ehm/lock.hpp"
#include "ehm/response.hpp"
#include "ehm/simulation.hpp"
#include "support.hpp"

namespace ehm {
namespace {

using testing::data_path;
using testing::reference_model;

Scenario short_scenario(Axis axis, double settle = 2.0, double duration = 8.0) {
  Scenario s = default_scenario(axis, 42);
  s.settle_time = settle;
  s.duration = duration;
  s.excitation[0].band_low = std::max(0.5, 2.0 / (duration - settle));
  return s;
}

TEST(Scenario, ShippedFilesLoad) {
  for (const char* name : {"vertical", "fore_aft", "lateral"}) {
    const Scenario s = load_scenario_file(data_path(std::string("scenarios/") + name + ".json"));
    EXPECT_EQ(s.duration, 35.0);
    EXPECT_EQ(s.settle_time, 10.0);
    EXPECT_EQ(s.step, 1e-3);
    ASSERT_EQ(s.excitation.size(), 1u);
    EXPECT_EQ(s.excitation[0].rms, 0.3);
  }
  EXPECT_EQ(load_scenario_file(data_path("scenarios/lateral.json")).excitation[0].axis, Axis::kY);
}

TEST(Scenario, BadInput) {
  EXPECT_THROW(load_scenario("{\"duration\": -1}"), ParseError);
  EXPECT_THROW(load_scenario("{"), ParseError);
  EXPECT_THROW(load_scenario_file("/nonexistent/s.json"), IoError);
  EXPECT_THROW(axis_from_string("w"), Error);
}

TEST(SeatMotion, StaticUntilExcitationStarts) {
  const Scenario s = short_scenario(Axis::kZ);
  const SeatMotion seat(s);
  EXPECT_TRUE(seat.active(Axis::kZ));
  EXPECT_FALSE(seat.active(Axis::kX));
  EXPECT_EQ(seat.acceleration(1.0), Vector3d::Zero());
  EXPECT_EQ(seat.position(1.5), Vector3d::Zero());
  const auto& acc = seat.axes()[2].acceleration;
  const double t = s.settle_time + 1.234;
  const auto i = static_cast<Eigen::Index>(std::llround(1.234 * acc.sample_rate));
  EXPECT_NEAR(seat.acceleration(t).z(), acc.samples(i), 1e-12);
  EXPECT_EQ(seat.acceleration(t).x(), 0.0);
}

TEST(Simulation, QuietSeatSettlesAtRest) {
  const BodyModel model = reference_model();
  Scenario s;
  s.settle_time = 10.0;
  Simulator sim(model, s);
  const State st = sim.settle();
  EXPECT_NEAR(st.time, 10.0, 1e-9);
  EXPECT_LT(st.v.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Simulation, SettledContactForceCarriesTheWeight) {
  const BodyModel model = reference_model();
  Scenario s;
  s.settle_time = 10.0;
  Simulator sim(model, s);
  const State st = sim.settle();
  const Vector3d f = sim.total_contact_force(st);
  EXPECT_NEAR(f.z(), 70.882 * 9.81, 0.01 * 695.35);
  EXPECT_LT(f.head<2>().norm(), 0.01 * 695.35);
}

TEST(Simulation, RepeatedRunsAreByteIdentical) {
  const BodyModel model = reference_model();
  const Scenario s = short_scenario(Axis::kX, 1.0, 4.0);
  EXPECT_EQ(format_trajectory(simulate(model, s)), format_trajectory(simulate(model, s)));
}

TEST(Simulation, TrajectoryLayout) {
  const BodyModel model = reference_model();
  const Scenario s = short_scenario(Axis::kZ, 1.0, 3.0);
  const Trajectory t = simulate(model, s);
  ASSERT_GE(model.markers.size(), 1u);
  EXPECT_EQ(t.columns.front(), "time");
  const std::string& m = model.markers[0].name;
  EXPECT_EQ(t.columns[1], m + "_x");
  EXPECT_EQ(t.columns[4], m + "_roll");
  EXPECT_EQ(t.columns[13], m + "_ax");
  EXPECT_EQ(t.columns[18], m + "_alz");
  EXPECT_EQ(t.columns.size(), 1 + 18 * model.markers.size() + 9);
  EXPECT_EQ(t.columns.back(), "seat_az");
  EXPECT_EQ(t.sample_rate, 100.0);
  EXPECT_EQ(t.rows(), 200);
  EXPECT_NEAR(t.data(0, 0), 1.0, 1e-12);
  EXPECT_TRUE(t.data.allFinite());
}

TEST(Simulation, TrajectoryCsvRoundTrip) {
  const BodyModel model = reference_model();
  const Trajectory t = simulate(model, short_scenario(Axis::kY, 1.0, 2.0));
  testing::TempDir dir("traj");
  save_trajectory(t, dir.file("t.csv"));
  const Trajectory u = load_trajectory(dir.file("t.csv"));
  EXPECT_EQ(u.columns, t.columns);
  EXPECT_EQ(u.data, t.data);
  EXPECT_EQ(u.sample_rate, t.sample_rate);
  EXPECT_THROW(u.series("nope_ax"), ReferenceError);
}

TEST(Simulation, SeatColumnsFollowTheExcitation) {
  const BodyModel model = reference_model();
  const Scenario s = short_scenario(Axis::kZ, 1.0, 4.0);
  const Trajectory t = simulate(model, s);
  const SeatMotion seat(s);
  for (Eigen::Index r = 0; r < t.rows(); r += 37) {
    EXPECT_NEAR(t.data(r, t.column("seat_az")), seat.acceleration(t.data(r, 0)).z(), 1e-12);
  }
  EXPECT_EQ(t.data.col(t.column("seat_ax")).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulation, ContactLogColumns) {
  Scenario s = short_scenario(Axis::kZ, 0.5, 1.0);
  s.log_contacts = true;
  const BodyModel model = reference_model();
  const Trajectory t = simulate(model, s);
  int fn = 0;
  for (const auto& c : t.columns) fn += c.rfind("contact_", 0) == 0;
  EXPECT_EQ(fn, static_cast<int>(model.contacts.size()));
}

TEST(Simulation, FreeStepMatchesSimulator) {
  const BodyModel model = reference_model();
  Scenario s;
  s.settle_time = 0.0;
  Simulator sim(model, s);
  State a = sim.initial_state();
  const State b = step(model, a, s, Eigen::VectorXd(), 1e-3);
  sim.step(a, 1e-3);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.v, b.v);
}

TEST(Simulation, InvalidScenario) {
  Scenario s;
  s.step = 0;
  EXPECT_THROW(Simulator(reference_model(), s), InvalidArgument);
}

TEST(Lock, PresetsAndDof) {
  const BodyModel model = reference_model();
  EXPECT_TRUE(lock_preset("none").joints.empty());
  const BodyModel sl = apply_lock(model, lock_preset("SL"));
  const BodyModel nl = apply_lock(model, lock_preset("NL"));
  EXPECT_EQ(Multibody(sl).nv(), Multibody(model).nv() - 4);
  EXPECT_EQ(Multibody(nl).nv(), Multibody(model).nv() - 2);
  EXPECT_EQ(sl.restraints.size(), model.restraints.size() - 1);
  EXPECT_THROW(lock_preset("XL"), InvalidArgument);
  EXPECT_THROW(apply_lock(model, {"bad", {"J99"}}), ReferenceError);
}

TEST(Lock, LockedJointHoldsItsSetpoint) {
  const BodyModel sl = apply_lock(reference_model(), lock_preset("SL"));
  EXPECT_TRUE(validate_model(sl).ok());
  Scenario s;
  s.settle_time = 2.0;
  Simulator sim(sl, s);
  EXPECT_TRUE(sim.settle().v.allFinite());
}

TEST(Lock, NoLockReproducesSimulateAndAnalyze) {
  const BodyModel model = reference_model();
  const Scenario s = short_scenario(Axis::kZ, 1.0, 12.0);
  const std::vector<ChannelPair> pairs{{"seat_az", "head_az"}, {"seat_az", "head_aly"}};
  const LockStudyResult study = run_lock_study(model, s, {lock_preset("none")}, pairs);
  const auto direct = trajectory_gains(simulate(model, s), pairs);
  ASSERT_EQ(study.curves.size(), 1u);
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(study.curves[0].second[i].gains, direct[i].gains);
    EXPECT_EQ(study.rows[i].peak_frequency, gain_peak(direct[i]).frequency);
  }
  EXPECT_EQ(format_lock_table(study).substr(0, 8), "variant,");
}

}  // namespace
}  // namespace ehm
