// Copyright 2026 The pnpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// optimize.hpp: multi-start CHSH maximization and violation-threshold search.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pnpe/analytic.hpp"
#include "pnpe/chsh.hpp"
#include "pnpe/nelder_mead.hpp"
#include "pnpe/protocol.hpp"
#include "pnpe/reference_optima.hpp"

namespace pnpe::opt {

enum class Objective { AnalyticChsh, SimulatedChsh };

inline const char* to_string(Objective o) { return o == Objective::AnalyticChsh ? "analytic" : "simulated"; }

class NoViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct OptimizationProblem {
  double eta_D = 1.0;
  Objective objective = Objective::AnalyticChsh;
  Interval t_b{0.0, 1.0};
  Interval g{0.0, 0.5};
  Interval amplitude{-1.0, 1.0};
  bool symmetric_ansatz = false;  // beta_i = -alpha_i
  double t_c = 0.5;
  std::size_t restarts = 8;
  std::uint64_t seed = kDefaultSeed;
  std::size_t max_evaluations = 20000;  // per restart
  double diameter_tol = 1e-9;
  bool warm_starts = true;
  std::size_t cutoff = fock::kDefaultCutoff;  // simulated objective only
  std::size_t polish_evaluations = 300;       // simulated objective only
  double eta_H = 1.0;                         // simulated objective only

  void validate() const {
    if (!(eta_D >= 0.0 && eta_D <= 1.0)) throw std::invalid_argument("OptimizationProblem: eta_D must lie in [0, 1]");
    for (const auto& iv : {t_b, g, amplitude})
      if (!(iv.hi >= iv.lo)) throw std::invalid_argument("OptimizationProblem: empty bound interval");
    if (t_b.lo < 0.0 || t_b.hi > 1.0) throw std::invalid_argument("OptimizationProblem: t_b bounds must lie in [0, 1]");
    if (g.lo < 0.0 || g.hi > 0.5) throw std::invalid_argument("OptimizationProblem: g bounds must lie in [0, 0.5]");
    if (amplitude.lo < -2.0 || amplitude.hi > 2.0)
      throw std::invalid_argument("OptimizationProblem: amplitude bounds must lie in [-2, 2]");
    if (restarts == 0) throw std::invalid_argument("OptimizationProblem: at least one restart is required");
    if (max_evaluations < 10) throw std::invalid_argument("OptimizationProblem: evaluation budget too small");
  }
};

struct OptimumReport {
  analytic::SourceParams src{};
  MeasurementSettings settings{};
  double S = 2.0;
  double eta_D = 1.0;
  std::size_t evaluations = 0;
  std::size_t restarts_used = 0;
  std::uint64_t seed = kDefaultSeed;
  bool degenerate = false;
  Objective objective = Objective::AnalyticChsh;
};

namespace detail {

struct Decoded {
  analytic::SourceParams src;
  MeasurementSettings settings;
};

inline Decoded decode(const std::vector<double>& x, const OptimizationProblem& p) {
  analytic::SourceParams src;
  src.t_b = x[0];
  src.g = x[1];
  src.t_c = p.t_c;
  MeasurementSettings s;
  s.alpha1 = x[2];
  s.alpha2 = x[3];
  if (p.symmetric_ansatz) {
    s.beta1 = -x[2];
    s.beta2 = -x[3];
  } else {
    s.beta1 = x[4];
    s.beta2 = x[5];
  }
  return {src, s};
}

inline std::vector<Interval> box(const OptimizationProblem& p) {
  std::vector<Interval> b = {p.t_b, p.g, p.amplitude, p.amplitude};
  if (!p.symmetric_ansatz) {
    b.push_back(p.amplitude);
    b.push_back(p.amplitude);
  }
  return b;
}

inline std::vector<double> from_row(const reference::OptimumRow& r, const OptimizationProblem& p) {
  std::vector<double> x = {r.t_b_power(), r.g, r.alpha1, r.alpha2};
  if (!p.symmetric_ansatz) {
    x.push_back(r.beta1);
    x.push_back(r.beta2);
  }
  return reflect_into(std::move(x), box(p));
}

inline double analytic_objective(const std::vector<double>& x, const OptimizationProblem& p) {
  const auto d = decode(x, p);
  return analytic::chsh(d.src, p.eta_D, d.settings).S;
}

inline double simulated_objective(const std::vector<double>& x, const OptimizationProblem& p) {
  const auto d = decode(x, p);
  protocol::ProtocolParams pp;
  pp.src = d.src;
  pp.loss = analytic::LossParams::symmetric(p.eta_H, p.eta_D);
  pp.cutoff = p.cutoff;
  try {
    return protocol::measure_chsh_sim(pp, d.settings, p.eta_D).S;
  } catch (const protocol::DegenerateHerald&) {
    return 2.0;
  }
}

// Starting points: the two nearest reference rows, then seeded random draws.
inline std::vector<std::vector<double>> starting_points(const OptimizationProblem& p) {
  std::vector<std::vector<double>> starts;
  if (p.warm_starts) {
    std::vector<reference::OptimumRow> rows(reference::kTableRows.begin(), reference::kTableRows.end());
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.eta_D - p.eta_D) < std::abs(b.eta_D - p.eta_D);
    });
    for (std::size_t k = 0; k < std::min<std::size_t>(2, p.restarts); ++k) starts.push_back(from_row(rows[k], p));
  }
  const auto b = box(p);
  for (std::size_t k = starts.size(); k < p.restarts; ++k) {
    Rng rng(splitmix64(p.seed + 0x1000 * k));
    std::vector<double> x(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = rng.uniform(b[i]);
    starts.push_back(std::move(x));
  }
  return starts;
}

struct Candidate {
  std::vector<double> x;
  double S;
  double start_S;
  std::size_t evaluations;
};

// Larger S wins; equal S falls back to smaller g, then smaller |alpha2|.
inline bool better(const Candidate& a, const Candidate& b) {
  if (std::abs(a.S - b.S) > 1e-12) return a.S > b.S;
  if (a.x[1] != b.x[1]) return a.x[1] < b.x[1];
  return std::abs(a.x[3]) < std::abs(b.x[3]);
}

}  // namespace detail

// Maximizes S over (t_b, g, alpha1, alpha2, beta1, beta2) for the heralded state.
// The simulated objective polishes the analytic optimum on the circuit model.
inline OptimumReport maximize_chsh(const OptimizationProblem& problem) {
  problem.validate();
  const auto box = detail::box(problem);
  const auto starts = detail::starting_points(problem);
  NelderMeadOptions nm;
  nm.diameter_tol = problem.diameter_tol;
  nm.max_evaluations = problem.max_evaluations;

  std::vector<std::future<detail::Candidate>> jobs;
  jobs.reserve(starts.size());
  for (const auto& x0 : starts) {
    jobs.push_back(std::async(std::launch::async, [&problem, &box, nm, x0]() {
      auto neg = [&](const std::vector<double>& x) { return -detail::analytic_objective(x, problem); };
      const double s0 = -neg(x0);
      auto r = nelder_mead_minimize(neg, x0, box, nm);
      return detail::Candidate{r.x, -r.f, s0, r.evaluations + 1};
    }));
  }
  std::vector<detail::Candidate> results;
  for (auto& j : jobs) results.push_back(j.get());

  detail::Candidate best = results.front();
  std::size_t evaluations = 0;
  bool improved = false;
  for (const auto& c : results) {
    evaluations += c.evaluations;
    if (c.S > c.start_S + 1e-12) improved = true;
    if (detail::better(c, best)) best = c;
  }

  OptimumReport rep;
  rep.eta_D = problem.eta_D;
  rep.seed = problem.seed;
  rep.restarts_used = results.size();
  rep.objective = problem.objective;
  rep.degenerate = !improved;

  if (problem.objective == Objective::SimulatedChsh) {
    auto neg = [&](const std::vector<double>& x) { return -detail::simulated_objective(x, problem); };
    NelderMeadOptions polish;
    polish.diameter_tol = 1e-6;
    polish.initial_step = 0.01;
    polish.max_evaluations = problem.polish_evaluations;
    polish.max_rebuilds = 0;
    const double s0 = -neg(best.x);
    auto r = nelder_mead_minimize(neg, best.x, box, polish);
    evaluations += r.evaluations + 1;
    if (-r.f >= s0) {
      best.x = r.x;
      best.S = -r.f;
    } else {
      best.S = s0;
    }
  }

  const auto d = detail::decode(best.x, problem);
  rep.src = d.src;
  rep.settings = d.settings;
  rep.S = best.S;
  rep.evaluations = evaluations;
  return rep;
}

// Bisection on efficiency for the first point where max_S(eta) > 2 + 1e-6.
inline double threshold_scan(const std::function<double(double)>& max_S, double tol = 1e-4, double lo = 0.6,
                             double hi = 1.0) {
  if (!(tol >= 1e-4)) throw std::invalid_argument("threshold_scan: tol must be at least 1e-4");
  if (!(lo < hi)) throw std::invalid_argument("threshold_scan: empty interval");
  constexpr double kMargin = 1e-6;
  if (!(max_S(hi) > 2.0 + kMargin))
    throw NoViolation("threshold_scan: no CHSH violation anywhere in the scanned efficiency interval");
  if (max_S(lo) > 2.0 + kMargin) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (max_S(mid) > 2.0 + kMargin)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------- state families --

struct FamilyOptimum {
  analytic::GenericQubitPathState state{};
  MeasurementSettings settings{};
  double S = 2.0;  // signed S at the optimum; |S| was maximized
  double eta = 1.0;
  std::size_t evaluations = 0;
};

struct FamilyProblem {
  analytic::FamilyKind kind = analytic::FamilyKind::Correlated;
  double eta = 1.0;
  std::size_t restarts = 8;
  std::uint64_t seed = kDefaultSeed;
  std::size_t max_evaluations = 20000;
  double max_amplitude = 1.5;
};

// Maximizes |S| over the state angle and four complex displacements. The
// first displacement is kept real because a common phase shift is redundant.
inline FamilyOptimum maximize_family_chsh(const FamilyProblem& fp) {
  if (!(fp.eta >= 0.0 && fp.eta <= 1.0)) throw std::invalid_argument("maximize_family_chsh: eta must lie in [0, 1]");
  const double pi = std::numbers::pi;
  const std::vector<Interval> box = {{0.0, pi / 2},           {0.0, fp.max_amplitude}, {0.0, fp.max_amplitude},
                                     {0.0, fp.max_amplitude}, {0.0, fp.max_amplitude}, {-pi, pi},
                                     {-pi, pi},               {-pi, pi}};
  auto decode = [&](const std::vector<double>& x) {
    auto st = analytic::GenericQubitPathState::from_angle(x[0], 0.0, fp.kind);
    MeasurementSettings s{x[1], std::polar(x[2], x[5]), std::polar(x[3], x[6]), std::polar(x[4], x[7])};
    return std::pair{st, s};
  };
  auto score = [&](const std::vector<double>& x) {
    const auto [st, s] = decode(x);
    return analytic::generic_state_chsh(st, fp.eta, s).S;
  };

  // The correlated family contains the heralded state, so the nearest
  // reference rows are mapped into it as warm starts.
  std::vector<std::vector<double>> starts;
  if (fp.kind == analytic::FamilyKind::Correlated) {
    std::vector<reference::OptimumRow> rows(reference::kTableRows.begin(), reference::kTableRows.end());
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.eta_D - fp.eta) < std::abs(b.eta_D - fp.eta);
    });
    for (std::size_t k = 0; k < std::min<std::size_t>(2, fp.restarts); ++k) {
      const auto& r = rows[k];
      const double l = std::tanh(r.g);
      const double tb = r.t_b_power();
      const double theta = std::atan2(l * std::sqrt(1.0 - tb), std::sqrt(tb));
      auto phase = [&](double v) { return v < 0.0 ? pi : 0.0; };
      // alpha1 carries the reference phase; flip everything if it is negative.
      const double flip = r.alpha1 < 0.0 ? -1.0 : 1.0;
      std::vector<double> x = {theta,
                               std::abs(r.alpha1),
                               std::abs(r.alpha2),
                               std::abs(r.beta1),
                               std::abs(r.beta2),
                               phase(flip * r.alpha2),
                               phase(flip * r.beta1),
                               phase(flip * r.beta2)};
      starts.push_back(reflect_into(std::move(x), box));
    }
  }
  for (std::size_t k = starts.size(); k < fp.restarts; ++k) {
    Rng rng(splitmix64(fp.seed + 0x2000 * k + static_cast<std::uint64_t>(fp.kind)));
    std::vector<double> x0(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) x0[i] = rng.uniform(box[i]);
    starts.push_back(std::move(x0));
  }

  NelderMeadOptions nm;
  nm.max_evaluations = fp.max_evaluations;
  std::vector<std::future<std::pair<NelderMeadResult, std::size_t>>> jobs;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto x0 = starts[k];
    jobs.push_back(std::async(std::launch::async, [&, x0, nm]() {
      auto neg = [&](const std::vector<double>& x) { return -std::abs(score(x)); };
      return std::pair{nelder_mead_minimize(neg, x0, box, nm), k};
    }));
  }
  FamilyOptimum best;
  best.eta = fp.eta;
  double best_abs = -1.0;
  for (auto& j : jobs) {
    auto [r, k] = j.get();
    best.evaluations += r.evaluations;
    if (-r.f > best_abs + 1e-12) {
      best_abs = -r.f;
      const auto [st, s] = decode(r.x);
      best.state = st;
      best.settings = s;
      best.S = score(r.x);
    }
  }
  return best;
}

}  // namespace pnpe::opt
