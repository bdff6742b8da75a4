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

#include "ehm/identification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ehm/errors.hpp"

namespace ehm {
namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream in(path);
  std::string part;
  while (std::getline(in, part, '/')) parts.push_back(part);
  return parts;
}

// Resolves a slot path to the model field it binds.
double& resolve(BodyModel& model, const std::string& path) {
  const std::vector<std::string> p = split(path);
  auto fail = [&](const std::string& why) -> ReferenceError {
    return ReferenceError("parameter '" + path + "': " + why);
  };
  if (p.size() == 4 && p[0] == "restraint") {
    RestraintSpec* r = model.restraint_for(p[1]);
    if (!r) throw fail("no restraint on joint '" + p[1] + "'");
    std::vector<double>* field = nullptr;
    if (p[2] == "stiffness") field = &r->stiffness;
    if (p[2] == "damping") field = &r->damping;
    if (p[2] == "integral_gain") field = &r->integral_gain;
    if (p[2] == "setpoint") field = &r->setpoint;
    if (!field) throw fail("unknown restraint field '" + p[2] + "'");
    size_t dof = 0;
    try {
      dof = static_cast<size_t>(std::stoul(p[3]));
    } catch (const std::exception&) {
      throw fail("bad DoF index '" + p[3] + "'");
    }
    if (dof >= r->stiffness.size()) throw fail("DoF index out of range");
    if (field->empty()) field->assign(r->stiffness.size(), 0.0);
    return (*field)[dof];
  }
  if (p.size() == 3 && p[0] == "contact") {
    const auto k = model.contact_index(p[1]);
    if (!k) throw fail("no contact pair '" + p[1] + "'");
    ContactParams& c = model.contacts[static_cast<size_t>(*k)].params;
    if (p[2] == "stiffness") return c.stiffness;
    if (p[2] == "damping") return c.damping;
    if (p[2] == "friction") return c.friction;
    if (p[2] == "v_reg") return c.v_reg;
    throw fail("unknown contact field '" + p[2] + "'");
  }
  if (p.size() == 3 && p[0] == "point_restraint") {
    for (PointRestraintSpec& s : model.point_restraints) {
      if (s.name != p[1]) continue;
      if (p[2] == "stiffness") return s.stiffness;
      if (p[2] == "damping") return s.damping;
      throw fail("unknown point restraint field '" + p[2] + "'");
    }
    throw fail("no point restraint '" + p[1] + "'");
  }
  throw fail("unrecognised path");
}

std::string channel_key(const FitChannel& c) {
  return std::string(1, axis_letter(c.direction)) + ":" + c.pair.input + "__" +
         c.pair.output;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Optimizer {
 public:
  Optimizer(const FitProblem& problem, const ParamVector& initial)
      : problem_(problem), slots_(initial.slots), initial_(initial),
        rng_(problem.seed) {}

  // Evaluates up to the remaining budget; returns how many ran.
  size_t evaluate(const std::vector<Eigen::VectorXd>& points,
                  std::vector<double>& values) {
    const size_t room = static_cast<size_t>(problem_.budget) - result_.history.size();
    const size_t n = std::min(points.size(), room);
    // The very first evaluation is the caller's start point, unrounded.
    const bool first = result_.history.empty();
    auto decode = [&](size_t i) {
      return first && i == 0 ? initial_
                             : ParamVector::from_normalized(slots_, points[i]);
    };
    std::vector<CostResult> costs(n);
    parallel_for(static_cast<int>(n), problem_.jobs, [&](int i) {
      costs[static_cast<size_t>(i)] =
          evaluate_cost(problem_, decode(static_cast<size_t>(i)));
    });
    values.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      const ParamVector p = decode(i);
      HistoryEntry entry{static_cast<int>(result_.history.size()), p.values,
                         costs[i]};
      values[i] = costs[i].total;
      if (result_.history.empty() || costs[i].total < result_.best_cost.total) {
        result_.best = p;
        result_.best_cost = costs[i];
        best_unit_ = points[i];
      }
      result_.history.push_back(std::move(entry));
    }
    return n;
  }

  bool exhausted() const {
    return result_.history.size() >= static_cast<size_t>(problem_.budget);
  }

  double eval_one(const Eigen::VectorXd& x, bool& ok) {
    std::vector<double> v;
    ok = evaluate({x}, v) == 1;
    return ok ? v[0] : std::numeric_limits<double>::infinity();
  }

  FitResult run(const ParamVector& initial) {
    const Eigen::Index d = initial.size();
    const Eigen::VectorXd x0 = initial.normalized();
    std::vector<double> v;
    evaluate({x0}, v);
    result_.status = "budget_exhausted";
    if (exhausted() || d == 0) {
      if (d == 0) result_.status = "converged";
      return result_;
    }
    differential_evolution(x0, v[0]);
    nelder_mead_restarts();
    return result_;
  }

 private:
  static Eigen::VectorXd clip(const Eigen::VectorXd& x) {
    return x.cwiseMax(0.0).cwiseMin(1.0);
  }

  void differential_evolution(const Eigen::VectorXd& x0, double f0) {
    const auto d = static_cast<int>(x0.size());
    const int pop = std::max(6, 4 * d);
    const int de_budget = static_cast<int>(0.4 * problem_.budget);
    const int generations = de_budget / pop - 1;
    if (generations < 1) return;
    constexpr double kF = 0.6;
    constexpr double kCr = 0.9;

    std::vector<Eigen::VectorXd> x(static_cast<size_t>(pop));
    std::vector<double> f(static_cast<size_t>(pop));
    x[0] = x0;
    f[0] = f0;
    std::vector<Eigen::VectorXd> batch;
    for (int i = 1; i < pop; ++i) {
      Eigen::VectorXd u(d);
      for (int k = 0; k < d; ++k) u(k) = uniform01(rng_);
      batch.push_back(u);
    }
    std::vector<double> values;
    if (evaluate(batch, values) < batch.size()) return;
    for (int i = 1; i < pop; ++i) {
      x[static_cast<size_t>(i)] = batch[static_cast<size_t>(i - 1)];
      f[static_cast<size_t>(i)] = values[static_cast<size_t>(i - 1)];
    }

    for (int g = 0; g < generations && !exhausted(); ++g) {
      std::vector<Eigen::VectorXd> trials;
      for (int i = 0; i < pop; ++i) {
        int r[3];
        for (int k = 0; k < 3; ++k) {
          do {
            r[k] = static_cast<int>(rng_() % static_cast<std::uint64_t>(pop));
          } while (r[k] == i || (k > 0 && r[k] == r[0]) ||
                   (k > 1 && r[k] == r[1]));
        }
        const Eigen::VectorXd& xi = x[static_cast<size_t>(i)];
        Eigen::VectorXd mutant =
            x[static_cast<size_t>(r[0])] +
            kF * (x[static_cast<size_t>(r[1])] - x[static_cast<size_t>(r[2])]);
        const int jrand = static_cast<int>(rng_() % static_cast<std::uint64_t>(d));
        Eigen::VectorXd trial = xi;
        for (int k = 0; k < d; ++k) {
          if (k == jrand || uniform01(rng_) < kCr) {
            double m = mutant(k);
            if (m < 0.0) m = 0.5 * xi(k);
            if (m > 1.0) m = 0.5 * (1.0 + xi(k));
            trial(k) = m;
          }
        }
        trials.push_back(trial);
      }
      const size_t n = evaluate(trials, values);
      for (size_t i = 0; i < n; ++i) {
        if (values[i] <= f[i]) {
          x[i] = trials[i];
          f[i] = values[i];
        }
      }
    }
  }

  // One Nelder-Mead descent from `start`; returns false if the budget ran
  // out.
  bool nelder_mead(const Eigen::VectorXd& start, double start_value,
                   double size) {
    const auto d = start.size();
    std::vector<Eigen::VectorXd> simplex{start};
    std::vector<double> f{start_value};
    std::vector<Eigen::VectorXd> batch;
    for (Eigen::Index k = 0; k < d; ++k) {
      Eigen::VectorXd p = start;
      p(k) += p(k) + size <= 1.0 ? size : -size;
      batch.push_back(p);
    }
    std::vector<double> values;
    if (evaluate(batch, values) < batch.size()) return false;
    for (size_t i = 0; i < batch.size(); ++i) {
      simplex.push_back(batch[i]);
      f.push_back(values[i]);
    }
    std::vector<size_t> order(simplex.size());
    while (!exhausted()) {
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return f[a] < f[b]; });
      const size_t best = order.front(), worst = order.back(),
                   second = order[order.size() - 2];
      double diameter = 0.0;
      for (const Eigen::VectorXd& p : simplex) {
        diameter = std::max(diameter, (p - simplex[best]).cwiseAbs().maxCoeff());
      }
      if (diameter < 1e-7 || f[worst] - f[best] <= 1e-14 * (1.0 + std::abs(f[best]))) {
        return true;
      }
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
      for (size_t i : order) {
        if (i != worst) centroid += simplex[i];
      }
      centroid /= static_cast<double>(d);
      bool ok = true;
      const Eigen::VectorXd xr = clip(centroid + (centroid - simplex[worst]));
      const double fr = eval_one(xr, ok);
      if (!ok) return false;
      if (fr < f[best]) {
        const Eigen::VectorXd xe = clip(centroid + 2.0 * (centroid - simplex[worst]));
        const double fe = eval_one(xe, ok);
        if (!ok) return false;
        if (fe < fr) {
          simplex[worst] = xe;
          f[worst] = fe;
        } else {
          simplex[worst] = xr;
          f[worst] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        simplex[worst] = xr;
        f[worst] = fr;
        continue;
      }
      const bool outside = fr < f[worst];
      const Eigen::VectorXd xc =
          outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = eval_one(xc, ok);
      if (!ok) return false;
      if (fc < (outside ? fr : f[worst])) {
        simplex[worst] = xc;
        f[worst] = fc;
        continue;
      }
      batch.clear();
      std::vector<size_t> idx;
      for (size_t i = 0; i < simplex.size(); ++i) {
        if (i == best) continue;
        batch.push_back(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
        idx.push_back(i);
      }
      const size_t n = evaluate(batch, values);
      for (size_t k = 0; k < n; ++k) {
        simplex[idx[k]] = batch[k];
        f[idx[k]] = values[k];
      }
      if (n < batch.size()) return false;
    }
    return false;
  }

  void nelder_mead_restarts() {
    double size = 0.1;
    int stale = 0;
    while (!exhausted()) {
      const double before = result_.best_cost.total;
      if (!nelder_mead(best_unit_, before, size)) return;
      const double gain = before - result_.best_cost.total;
      if (gain <= 1e-12 * (1.0 + std::abs(before))) {
        if (++stale >= 2) {
          result_.status = "converged";
          return;
        }
        size *= 0.5;
      } else {
        stale = 0;
      }
    }
  }

  const FitProblem& problem_;
  std::vector<ParamSlot> slots_;
  ParamVector initial_;
  std::mt19937_64 rng_;
  FitResult result_;
  Eigen::VectorXd best_unit_;
};

}  // namespace

// ParamVector ---------------------------------------------------------------

Eigen::VectorXd ParamVector::normalized() const {
  Eigen::VectorXd u(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const ParamSlot& s = slots[static_cast<size_t>(i)];
    const double x = std::clamp(values(i), s.lower, s.upper);
    u(i) = s.log_scale ? std::log(x / s.lower) / std::log(s.upper / s.lower)
                       : (x - s.lower) / (s.upper - s.lower);
  }
  return u;
}

ParamVector ParamVector::from_normalized(const std::vector<ParamSlot>& slots,
                                         const Eigen::VectorXd& unit) {
  ParamVector p;
  p.slots = slots;
  p.values.resize(unit.size());
  for (Eigen::Index i = 0; i < unit.size(); ++i) {
    const ParamSlot& s = slots[static_cast<size_t>(i)];
    const double u = std::clamp(unit(i), 0.0, 1.0);
    const double x = s.log_scale
                         ? s.lower * std::exp(u * std::log(s.upper / s.lower))
                         : s.lower + u * (s.upper - s.lower);
    p.values(i) = std::clamp(x, s.lower, s.upper);
  }
  return p;
}

bool ParamVector::within_bounds() const {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const ParamSlot& s = slots[static_cast<size_t>(i)];
    if (!(values(i) >= s.lower && values(i) <= s.upper)) return false;
  }
  return true;
}

void check_slots(const BodyModel& model, const std::vector<ParamSlot>& slots) {
  BodyModel scratch = model;
  for (const ParamSlot& s : slots) {
    if (!std::isfinite(s.lower) || !std::isfinite(s.upper) || !(s.lower < s.upper)) {
      throw InvalidArgument("parameter '" + s.path + "': need finite lower < upper");
    }
    if (s.log_scale && !(s.lower > 0.0)) {
      throw InvalidArgument("parameter '" + s.path + "': log scale needs lower > 0");
    }
    resolve(scratch, s.path);
  }
}

BodyModel apply_params(const BodyModel& model, const ParamVector& params) {
  BodyModel out = model;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    resolve(out, params.slots[static_cast<size_t>(i)].path) = params.values(i);
  }
  return out;
}

ParamVector extract_params(const BodyModel& model,
                           const std::vector<ParamSlot>& slots) {
  BodyModel scratch = model;
  ParamVector p;
  p.slots = slots;
  p.values.resize(static_cast<Eigen::Index>(slots.size()));
  for (size_t i = 0; i < slots.size(); ++i) {
    p.values(static_cast<Eigen::Index>(i)) = resolve(scratch, slots[i].path);
  }
  return p;
}

double default_channel_weight(const std::string& output) {
  if (output.rfind("pelvis_", 0) == 0) return 0.5;
  return 1.0;
}

Scenario fit_scenario(Axis axis, std::uint64_t seed) {
  Scenario s = default_scenario(axis, seed);
  s.name += "_fit";
  s.duration = 20.0;
  s.settle_time = 5.0;
  s.excitation[0].band_low = 0.15;
  return s;
}

std::vector<GainCurve> simulate_channels(const FitProblem& problem,
                                         const BodyModel& model) {
  std::vector<GainCurve> out(problem.channels.size());
  for (const Scenario& scenario : problem.scenarios) {
    if (scenario.excitation.empty()) continue;
    const Axis axis = scenario.excitation.front().axis;
    bool needed = false;
    for (const FitChannel& c : problem.channels) needed |= c.direction == axis;
    if (!needed) continue;
    const Trajectory traj = simulate(model, scenario);
    for (size_t i = 0; i < problem.channels.size(); ++i) {
      const FitChannel& c = problem.channels[i];
      if (c.direction != axis) continue;
      out[i] = trajectory_gains(traj, {c.pair}, problem.analysis,
                                c.reference.frequencies)
                   .front();
    }
  }
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == 0) {
      throw ReferenceError("no scenario excites direction '" +
                           std::string(1, axis_letter(problem.channels[i].direction)) +
                           "'");
    }
  }
  return out;
}

CostResult evaluate_cost(const FitProblem& problem, const ParamVector& params) {
  CostResult cost;
  cost.per_channel.assign(problem.channels.size(), 0.0);
  double weight_sum = 0.0;
  for (const FitChannel& c : problem.channels) weight_sum += c.weight;
  auto penalty = [&] {
    cost.diverged = true;
    cost.total = kDivergencePenalty;
    const double each = weight_sum > 0.0 ? kDivergencePenalty / weight_sum : 0.0;
    std::fill(cost.per_channel.begin(), cost.per_channel.end(), each);
    return cost;
  };
  std::vector<GainCurve> curves;
  try {
    curves = simulate_channels(problem, apply_params(problem.model, params));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDivergence) return penalty();
    throw;
  }
  for (size_t i = 0; i < curves.size(); ++i) {
    const FitChannel& c = problem.channels[i];
    const double v = criterion(c.reference, curves[i], problem.relative_weight);
    if (!std::isfinite(v)) return penalty();
    cost.per_channel[i] = v;
    cost.total += c.weight * v;
  }
  return cost;
}

FitResult optimize(const FitProblem& problem, const ParamVector& initial) {
  if (problem.budget < 1) throw InvalidArgument("optimize: budget must be >= 1");
  if (!initial.within_bounds()) {
    throw InvalidArgument("optimize: initial parameters outside bounds");
  }
  Optimizer opt(problem, initial);
  return opt.run(initial);
}

// Files ---------------------------------------------------------------------

namespace {

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string resolve_path(const std::string& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = std::filesystem::path(base) / path;
  return path.string();
}

ParamSlot slot_from_json(const json& j) {
  ParamSlot s;
  s.path = j.at("path").get<std::string>();
  s.unit = j.value("unit", std::string());
  s.lower = j.at("lower").get<double>();
  s.upper = j.at("upper").get<double>();
  s.log_scale = j.value("log", true);
  return s;
}

}  // namespace

FitProblem load_fit_problem(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit config: ") + e.what());
  }
  FitProblem p;
  try {
    p.model = load_model_file(resolve_path(base_dir, j.at("model").get<std::string>()));
    p.budget = j.value("budget", p.budget);
    p.seed = j.value("seed", p.seed);
    p.jobs = j.value("jobs", p.jobs);
    p.relative_weight = j.value("relative_weight", p.relative_weight);
    if (j.contains("analysis")) {
      const json& a = j.at("analysis");
      if (a.contains("band")) {
        p.analysis.band_low = a.at("band").at(0).get<double>();
        p.analysis.band_high = a.at("band").at(1).get<double>();
      }
      if (a.contains("grid")) {
        p.analysis.grid_low = a.at("grid").at(0).get<double>();
        p.analysis.grid_high = a.at("grid").at(1).get<double>();
      }
      p.analysis.order = a.value("order", p.analysis.order);
      p.analysis.gain.raw_fft = a.value("raw_fft", false);
    }
    std::map<char, bool> have;
    if (j.contains("scenarios")) {
      for (const json& s : j.at("scenarios")) {
        const Axis axis = axis_from_string(s.at("direction").get<std::string>());
        Scenario sc = s.contains("file")
                          ? load_scenario_file(resolve_path(base_dir, s.at("file").get<std::string>()))
                          : fit_scenario(axis, s.value("seed", p.seed));
        if (sc.excitation.empty() || sc.excitation.front().axis != axis) {
          throw ParseError("fit config: scenario does not excite its direction");
        }
        have[axis_letter(axis)] = true;
        p.scenarios.push_back(sc);
      }
    }
    for (const json& r : j.at("references")) {
      FitChannel c;
      c.direction = axis_from_string(r.at("direction").get<std::string>());
      c.pair.input = r.value("input", std::string("seat_a") + axis_letter(c.direction));
      c.pair.output = r.at("output").get<std::string>();
      c.reference = load_gain_curve(resolve_path(base_dir, r.at("file").get<std::string>()));
      c.weight = r.value("weight", default_channel_weight(c.pair.output));
      if (!have[axis_letter(c.direction)]) {
        p.scenarios.push_back(fit_scenario(c.direction, p.seed));
        have[axis_letter(c.direction)] = true;
      }
      p.channels.push_back(std::move(c));
    }
    for (const json& s : j.at("parameters")) p.slots.push_back(slot_from_json(s));
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit config: ") + e.what());
  }
  check_slots(p.model, p.slots);
  return p;
}

FitProblem load_fit_problem_file(const std::string& path) {
  return load_fit_problem(read_text(path, "fit config"),
                          std::filesystem::path(path).parent_path().string());
}

std::string format_params(const ParamVector& params) {
  json out = json::array();
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const ParamSlot& s = params.slots[static_cast<size_t>(i)];
    out.push_back({{"path", s.path},
                   {"unit", s.unit},
                   {"lower", s.lower},
                   {"upper", s.upper},
                   {"log", s.log_scale},
                   {"value", params.values(i)}});
  }
  return json{{"parameters", out}}.dump(2) + "\n";
}

ParamVector parse_params(const std::string& text) {
  ParamVector p;
  try {
    const json j = json::parse(text, nullptr, true, true);
    std::vector<double> v;
    for (const json& s : j.at("parameters")) {
      p.slots.push_back(slot_from_json(s));
      v.push_back(s.at("value").get<double>());
    }
    p.values = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const json::exception& e) {
    throw ParseError(std::string("parameters: ") + e.what());
  }
  return p;
}

std::string format_history(const FitResult& result, const FitProblem& problem) {
  std::string out = "eval";
  for (const ParamSlot& s : problem.slots) out += "," + s.path;
  for (const FitChannel& c : problem.channels) out += ",cost:" + channel_key(c);
  out += ",total,diverged\n";
  char buf[64];
  for (const HistoryEntry& h : result.history) {
    out += std::to_string(h.index);
    for (Eigen::Index i = 0; i < h.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", h.values(i));
      out += buf;
    }
    for (double c : h.cost.per_channel) {
      std::snprintf(buf, sizeof(buf), ",%.17g", c);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g,%d\n", h.cost.total,
                  h.cost.diverged ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace ehm
