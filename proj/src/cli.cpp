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

#include "ehm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehm/analysis.hpp"
#include "ehm/errors.hpp"
#include "ehm/identification.hpp"
#include "ehm/lock.hpp"
#include "ehm/model.hpp"
#include "ehm/response.hpp"
#include "ehm/signal.hpp"
#include "ehm/simulation.hpp"

#ifndef EHM_VERSION
#define EHM_VERSION "unknown"
#endif

namespace ehm {
namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (unknown subcommand or flag, bad flag value)\n"
    "  3  I/O error (missing or unwritable file)\n"
    "  4  validation error (malformed config, invalid model or parameters)\n"
    "  5  simulation diverged\n";

struct Options {
  std::string model;
  std::string scenario;
  std::string out;
  std::string direction;
  std::string trajectory;
  std::string config;
  std::string curves;
  std::vector<std::string> locks;
  std::string lock = "none";
  std::uint64_t seed = 42;
  bool seed_set = false;
  int jobs = 1;
  bool jobs_set = false;
  int budget = 0;
  bool raw_fft = false;
  bool json = false;
  double band_low = 0.1;
  double band_high = 12.0;
  double rms_target = 0.3;
  double duration = 35.0;
  double rate = 1000.0;
};

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir + "'");
  }
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

Scenario scenario_from(const Options& o) {
  Scenario s;
  if (!o.scenario.empty()) {
    s = load_scenario_file(o.scenario);
  } else {
    s = default_scenario(axis_from_string(o.direction.empty() ? "z" : o.direction),
                         o.seed);
  }
  if (o.seed_set) {
    for (ExcitationSpec& e : s.excitation) e.seed = o.seed;
  }
  return s;
}

Axis scenario_axis(const Scenario& s) {
  if (s.excitation.empty()) throw InvalidArgument("scenario has no excitation");
  return s.excitation.front().axis;
}

BodyModel model_from(const Options& o) {
  if (o.model.empty()) throw Error(ErrorCode::kUsage, "--model is required");
  return apply_lock(load_model_file(o.model), lock_preset(o.lock));
}

std::vector<std::string> marker_names(const BodyModel& model) {
  std::vector<std::string> names;
  for (const Marker& m : model.markers) names.push_back(m.name);
  return names;
}

// Markers present in a trajectory: every "<name>_ax" column except the seat.
std::vector<std::string> marker_names(const Trajectory& t) {
  std::vector<std::string> names;
  const std::string suffix = "_ax";
  for (const std::string& c : t.columns) {
    if (c.size() > suffix.size() && c.compare(c.size() - 3, 3, suffix) == 0 &&
        c != "seat_ax") {
      names.push_back(c.substr(0, c.size() - 3));
    }
  }
  return names;
}

// The seat axis carrying the most acceleration.
Axis excited_axis(const Trajectory& t) {
  Axis best = Axis::kZ;
  double best_rms = -1.0;
  for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
    const std::string name = std::string("seat_a") + axis_letter(a);
    if (t.column(name) < 0) continue;
    const double r = rms(t.series(name).samples);
    if (r > best_rms) {
      best_rms = r;
      best = a;
    }
  }
  return best;
}

AnalysisOptions analysis_from(const Options& o) {
  AnalysisOptions a;
  a.gain.raw_fft = o.raw_fft;
  return a;
}

void write_curves(const std::string& dir, const std::vector<GainCurve>& curves,
                  const std::vector<ChannelPair>& pairs) {
  make_dir(dir);
  for (size_t i = 0; i < curves.size(); ++i) {
    save_gain_curve(curves[i], join(dir, gain_file_name(pairs[i])));
  }
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const BodyModel model = model_from(o);
  const Trajectory t = simulate(model, scenario_from(o));
  if (o.out.empty()) {
    out << format_trajectory(t);
  } else {
    write_text(o.out, format_trajectory(t));
  }
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw Error(ErrorCode::kUsage, "--out (directory) is required");
  Trajectory t;
  std::vector<std::string> markers;
  Axis axis;
  if (!o.trajectory.empty()) {
    t = load_trajectory(o.trajectory);
    markers = marker_names(t);
    axis = o.direction.empty() ? excited_axis(t) : axis_from_string(o.direction);
  } else {
    const BodyModel model = model_from(o);
    const Scenario s = scenario_from(o);
    t = simulate(model, s);
    markers = marker_names(model);
    axis = o.direction.empty() ? scenario_axis(s) : axis_from_string(o.direction);
  }
  const std::vector<ChannelPair> pairs = default_channel_pairs(axis, markers);
  write_curves(o.out, trajectory_gains(t, pairs, analysis_from(o)), pairs);
  out << "wrote " << pairs.size() << " gain curves to " << o.out << "\n";
  return 0;
}

int cmd_fit(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw Error(ErrorCode::kUsage, "--config is required");
  if (o.out.empty()) throw Error(ErrorCode::kUsage, "--out (directory) is required");
  FitProblem p = load_fit_problem_file(o.config);
  if (o.seed_set) p.seed = o.seed;
  if (o.jobs_set) p.jobs = o.jobs;
  if (o.budget > 0) p.budget = o.budget;
  const ParamVector initial = extract_params(p.model, p.slots);
  const FitResult r = optimize(p, initial);
  make_dir(o.out);
  write_text(join(o.out, "params.json"), format_params(r.best));
  write_text(join(o.out, "history.csv"), format_history(r, p));
  write_text(join(o.out, "fitted_model.json"),
             serialize_model(apply_params(p.model, r.best)));
  char line[160];
  std::snprintf(line, sizeof(line), "%s after %zu evaluations, best cost %.9g\n",
                r.status.c_str(), r.history.size(), r.best_cost.total);
  out << line;
  return 0;
}

int cmd_lock_study(const Options& o, std::ostream& out) {
  if (o.model.empty()) throw Error(ErrorCode::kUsage, "--model is required");
  const BodyModel model = load_model_file(o.model);
  Options so = o;
  if (so.scenario.empty() && so.direction.empty()) so.direction = "z";
  const Scenario s = scenario_from(so);
  std::vector<LockSpec> variants;
  for (const std::string& name :
       o.locks.empty() ? std::vector<std::string>{"none", "SL", "NL"} : o.locks) {
    variants.push_back(lock_preset(name));
  }
  const std::vector<ChannelPair> pairs =
      default_channel_pairs(scenario_axis(s), marker_names(model));
  const LockStudyResult r = run_lock_study(model, s, variants, pairs, analysis_from(o));
  const std::string table = format_lock_table(r);
  if (o.out.empty()) {
    out << table;
  } else {
    write_text(o.out, table);
  }
  if (!o.curves.empty()) {
    for (const auto& [variant, curves] : r.curves) {
      write_curves(join(o.curves, variant), curves, r.pairs);
    }
  }
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.model.empty()) throw Error(ErrorCode::kUsage, "--model is required");
  const ValidationReport report = validate_model(parse_model_file(o.model));
  out << (o.json ? report.to_json() : report.to_text());
  if (!report.ok()) throw Error(ErrorCode::kValidation, "model failed validation");
  return 0;
}

int cmd_gen_signal(const Options& o, std::ostream& out) {
  const SignalSeries s = generate_random_vibration(
      o.band_low, o.band_high, o.rms_target, o.duration, o.rate, o.seed);
  if (o.out.empty()) {
    out << format_signal(s);
  } else {
    save_signal(s, o.out);
  }
  return 0;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out,
                std::ostream& err) {
  Options o;
  CLI::App app("Efficient human model: seated whole-body vibration simulation",
               "ehm");
  app.set_version_flag("--version", EHM_VERSION);
  app.footer(kExitCodes);
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", o.model, "Body model config (JSON)");
  };
  auto add_scenario = [&](CLI::App* c) {
    c->add_option("--scenario", o.scenario, "Scenario config (JSON)");
    c->add_option("--direction", o.direction, "Excitation direction")
        ->check(CLI::IsMember({"x", "y", "z"}));
    c->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { o.seed = s; o.seed_set = true; },
        "Excitation seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "Run a scenario, write a trajectory CSV");
  add_model(sim);
  add_scenario(sim);
  sim->add_option("--out", o.out, "Trajectory CSV (default: stdout)");
  sim->add_option("--lock", o.lock, "Joint lock preset")
      ->check(CLI::IsMember({"none", "SL", "NL"}));

  CLI::App* ana = app.add_subcommand(
      "analyze", "Gain curves from a trajectory, or simulate then analyze");
  ana->add_option("--trajectory", o.trajectory, "Trajectory CSV to analyze");
  add_model(ana);
  add_scenario(ana);
  ana->add_option("--out", o.out, "Output directory for <input>__<output>.csv")
      ->required();
  ana->add_option("--lock", o.lock, "Joint lock preset")
      ->check(CLI::IsMember({"none", "SL", "NL"}));
  ana->add_flag("--raw-fft", o.raw_fft, "Plain FFT ratio instead of Welch averaging");

  CLI::App* fit = app.add_subcommand("fit", "Identify parameters against reference gains");
  fit->add_option("--config", o.config, "Fit config (JSON)")->required();
  fit->add_option("--out", o.out, "Output directory")->required();
  fit->add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { o.seed = s; o.seed_set = true; },
      "Optimizer seed");
  fit->add_option_function<int>(
      "--jobs", [&](const int& j) { o.jobs = j; o.jobs_set = true; },
      "Parallel evaluations")
      ->check(CLI::PositiveNumber);
  fit->add_option("--budget", o.budget, "Maximum cost evaluations")
      ->check(CLI::PositiveNumber);

  CLI::App* lock = app.add_subcommand(
      "lock-study", "Compare baseline with spine (SL) and neck (NL) locks");
  add_model(lock);
  add_scenario(lock);
  lock->add_option("--out", o.out, "Comparison table CSV (default: stdout)");
  lock->add_option("--lock", o.locks, "Variants to run (default: none SL NL)")
      ->check(CLI::IsMember({"none", "SL", "NL"}));
  lock->add_option("--curves", o.curves, "Directory for per-variant gain curves");
  lock->add_flag("--raw-fft", o.raw_fft, "Plain FFT ratio instead of Welch averaging");

  CLI::App* val = app.add_subcommand("validate", "Print the model report");
  add_model(val);
  val->add_flag("--json", o.json, "Report as JSON");

  CLI::App* gen = app.add_subcommand("gen-signal", "Write a band-limited random excitation CSV");
  gen->add_option("--out", o.out, "Signal CSV (default: stdout)");
  gen->add_option("--seed", o.seed, "Generator seed");
  gen->add_option("--low", o.band_low, "Band low edge, Hz");
  gen->add_option("--high", o.band_high, "Band high edge, Hz");
  gen->add_option("--rms", o.rms_target, "Target rms, m/s^2");
  gen->add_option("--duration", o.duration, "Length, s");
  gen->add_option("--rate", o.rate, "Sample rate, Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ehm: usage error: " << e.what() << " (see --help)\n";
    return static_cast<int>(ErrorCode::kUsage);
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (ana->parsed()) return cmd_analyze(o, out);
    if (fit->parsed()) return cmd_fit(o, out);
    if (lock->parsed()) return cmd_lock_study(o, out);
    if (val->parsed()) return cmd_validate(o, out);
    if (gen->parsed()) return cmd_gen_signal(o, out);
  } catch (const Error& e) {
    const char* kind = "error";
    switch (e.code()) {
      case ErrorCode::kIo: kind = "I/O error"; break;
      case ErrorCode::kValidation: kind = "validation error"; break;
      case ErrorCode::kDivergence: kind = "divergence"; break;
      case ErrorCode::kUsage: kind = "usage error"; break;
      default: break;
    }
    err << "ehm: " << kind << ": " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "ehm: error: " << e.what() << "\n";
    return static_cast<int>(ErrorCode::kValidation);
  }
  return static_cast<int>(ErrorCode::kUsage);
}

}  // namespace ehm
