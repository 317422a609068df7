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

// commands.hpp: dataset builders behind the pnpe subcommands.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pnpe/analytic.hpp"
#include "pnpe/cli/config.hpp"
#include "pnpe/cli/output.hpp"
#include "pnpe/metrics.hpp"
#include "pnpe/optimize.hpp"
#include "pnpe/protocol.hpp"
#include "pnpe/reference_optima.hpp"

namespace pnpe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitThreshold = 3;

inline constexpr double kTableTolerance = 1e-3;

struct CommandOptions {
  std::optional<double> eta;
  std::optional<std::string> grid;
  bool verify_optimizer = false;
  bool loss_grid = false;
};

struct CommandResult {
  Table table;
  int exit_code = kExitOk;
  std::string message;
};

// Evaluates fn over xs on a bounded worker pool; results keep the order of xs.
template <class T, class F>
std::vector<T> parallel_map(const std::vector<double>& xs, F fn) {
  const std::size_t width = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<T> out;
  out.reserve(xs.size());
  for (std::size_t start = 0; start < xs.size(); start += width) {
    std::vector<std::future<T>> batch;
    for (std::size_t i = start; i < std::min(xs.size(), start + width); ++i)
      batch.push_back(std::async(std::launch::async, fn, xs[i]));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

// ----------------------------------------------------------- config views --

inline analytic::SourceParams source_from(const RunConfig& cfg) {
  analytic::SourceParams s;
  s.g = cfg.number_in("source.g", 0.0, 5.0);
  s.t_b = cfg.number_in("source.t_b", 0.0, 1.0);
  s.t_c = cfg.number_in("source.t_c", 0.0, 1.0);
  s.phi_a = cfg.number("source.phi_a");
  s.phi_b = cfg.number("source.phi_b");
  s.eta_s = cfg.number_in("source.eta_s", 0.0, 1.0);
  return s;
}

inline std::size_t cutoff_from(const RunConfig& cfg) {
  return static_cast<std::size_t>(cfg.integer("run.cutoff", 2, static_cast<std::int64_t>(fock::kMaxCutoff)));
}

inline opt::OptimizationProblem problem_from(const RunConfig& cfg, double eta_D) {
  opt::OptimizationProblem p;
  p.eta_D = eta_D;
  p.objective = cfg.choice("optimizer.objective", {"analytic", "simulated"}) == "analytic" ? opt::Objective::AnalyticChsh
                                                                                            : opt::Objective::SimulatedChsh;
  p.restarts = static_cast<std::size_t>(cfg.integer("optimizer.restarts", 1, 1024));
  p.max_evaluations = static_cast<std::size_t>(cfg.integer("optimizer.max_evaluations", 10, 100000000));
  p.diameter_tol = cfg.number_in("optimizer.diameter_tol", 1e-15, 1.0);
  p.symmetric_ansatz = cfg.boolean("optimizer.symmetric_ansatz");
  p.polish_evaluations = static_cast<std::size_t>(cfg.integer("optimizer.polish_evaluations", 0, 1000000));
  p.seed = cfg.seed();
  p.cutoff = cutoff_from(cfg);
  p.t_c = cfg.number_in("source.t_c", 0.0, 1.0);
  p.eta_H = cfg.number_in("loss.eta_H", 0.0, 1.0);
  return p;
}

inline opt::FamilyProblem family_from(const RunConfig& cfg, analytic::FamilyKind kind, double eta) {
  opt::FamilyProblem p;
  p.kind = kind;
  p.eta = eta;
  p.restarts = static_cast<std::size_t>(cfg.integer("optimizer.restarts", 1, 1024));
  p.max_evaluations = static_cast<std::size_t>(cfg.integer("optimizer.max_evaluations", 10, 100000000));
  p.seed = cfg.seed();
  return p;
}

inline std::vector<double> eta_grid(const RunConfig& cfg, const CommandOptions& o) {
  std::vector<double> g;
  if (o.grid) {
    const auto t = parse_triplet(*o.grid);
    g = linear_grid(t[0], t[1], t[2]);
  } else {
    g = linear_grid(cfg.number("sweep.eta_min"), cfg.number("sweep.eta_max"), cfg.number("sweep.eta_step"));
  }
  for (double& v : g) {
    v = std::round(v * 1e12) / 1e12;
    if (v < 0.0 || v > 1.0) throw ConfigError("grid: efficiencies must lie in [0, 1]");
  }
  return g;
}

// --------------------------------------------------------------- table-s1 --

inline CommandResult cmd_table_s1(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "table-s1";
  t.columns = {{"eta_D", "1"},       {"t_b", "1"},         {"g", "1"},           {"alpha1", "1"},
               {"alpha2", "1"},      {"beta1", "1"},       {"beta2", "1"},       {"S_analytic", "1"},
               {"S_simulated", "1"}, {"S_reference", "1"}, {"delta", "1"},       {"t_b_power", "1"}};
  if (o.verify_optimizer) {
    t.columns.push_back({"S_optimized", "1"});
    t.columns.push_back({"optimizer_ok", "1"});
  }
  t.metadata.push_back({"t_b_column", "amplitude transmittance; power transmittance is t_b_power = t_b^2"});
  t.metadata.push_back({"tolerance", format_number(kTableTolerance)});

  std::vector<reference::OptimumRow> rows;
  if (o.eta) {
    const auto r = reference::find_row(*o.eta, 1e-6);
    if (!r) throw ConfigError("--eta: no reference row at eta_D = " + format_number(*o.eta));
    rows.push_back(*r);
  } else {
    rows.assign(reference::kTableRows.begin(), reference::kTableRows.end());
  }

  const std::size_t cutoff = cutoff_from(cfg);
  const double eta_H = cfg.number_in("loss.eta_H", 0.0, 1.0);
  const double t_c = cfg.number_in("source.t_c", 0.0, 1.0);
  std::vector<double> idx;
  for (std::size_t k = 0; k < rows.size(); ++k) idx.push_back(static_cast<double>(k));

  struct RowResult {
    double sa, ss, sopt;
  };
  const auto results = parallel_map<RowResult>(idx, [&](double kd) {
    const auto& r = rows[static_cast<std::size_t>(kd)];
    auto src = r.source();
    src.t_c = t_c;
    protocol::ProtocolParams pp;
    pp.src = src;
    pp.loss = analytic::LossParams::symmetric(eta_H, r.eta_D);
    pp.cutoff = cutoff;
    RowResult rr{analytic::chsh(src, r.eta_D, r.settings()).S, protocol::measure_chsh_sim(pp, r.settings(), r.eta_D).S,
                 0.0};
    if (o.verify_optimizer) rr.sopt = opt::maximize_chsh(problem_from(cfg, r.eta_D)).S;
    return rr;
  });

  std::size_t failures = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const auto& rr = results[k];
    const double delta = rr.ss - r.S;
    if (std::abs(delta) > kTableTolerance) ++failures;
    std::vector<Cell> row = {r.eta_D, r.t_b,   r.g,   r.alpha1, r.alpha2, r.beta1,          r.beta2,
                             rr.sa,   rr.ss,   r.S,   delta,    r.t_b_power()};
    if (o.verify_optimizer) {
      const bool ok = rr.sopt >= r.S - kTableTolerance;
      if (!ok) ++failures;
      row.push_back(rr.sopt);
      row.push_back(std::int64_t{ok ? 1 : 0});
    }
    t.add_row(std::move(row));
  }
  if (failures) {
    res.exit_code = kExitThreshold;
    res.message = std::to_string(failures) + " table row check(s) outside tolerance";
  }
  return res;
}

// -------------------------------------------------------------- sweep-eta --

inline CommandResult cmd_sweep_eta(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "sweep-eta";
  t.columns = {{"eta_D", "1"},  {"S_optimal", "1"},      {"CH", "1"},
               {"t_b", "1"},    {"g", "1"},              {"alpha1", "1"},
               {"alpha2", "1"}, {"beta1", "1"},          {"beta2", "1"},
               {"evaluations", "count"}, {"S_classical", "1"}, {"psi_threshold_marker", "1"},
               {"eberhard_marker", "1"}};
  t.metadata.push_back({"objective", cfg.raw("optimizer.objective")});
  t.metadata.push_back({"t_b_column", "power transmittance"});
  const auto grid = eta_grid(cfg, o);
  const auto reps = parallel_map<opt::OptimumReport>(grid, [&](double e) { return opt::maximize_chsh(problem_from(cfg, e)); });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& r = reps[k];
    t.add_row({grid[k], r.S, ch_from_chsh(r.S), r.src.t_b, r.src.g, r.settings.alpha1.real(), r.settings.alpha2.real(),
               r.settings.beta1.real(), r.settings.beta2.real(), static_cast<std::int64_t>(r.evaluations), 2.0,
               reference::kAntiCorrelatedThreshold, reference::kEberhardLimit});
  }
  return res;
}

// ----------------------------------------------------------- success-prob --

// Least-squares slope of log10(y) against log10(x) over points with x in [lo, hi].
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo * (1 - 1e-12) || x[i] > hi * (1 + 1e-12)) continue;
    const double lx = std::log10(x[i]), ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("loglog_slope: need at least two points in range");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline CommandResult cmd_success_prob(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "success-prob";
  t.columns = {{"eta_C", "1"},         {"P_two_tmsv", "probability"}, {"P_hybrid", "probability"},
               {"P_two_sppe", "probability"}, {"P_hybrid_sim", "probability"}, {"local_slope_hybrid", "1"},
               {"ordering_ok", "1"}};
  const double g = cfg.number_in("success.g", 0.0, 5.0);
  const double t_sppe = cfg.number_in("success.t_sppe", 0.0, 1.0);
  const double t_b = cfg.number_in("success.t_b", 0.0, 1.0);
  const double lambda = std::tanh(g);
  std::vector<double> grid;
  if (o.grid) {
    const auto tr = parse_triplet(*o.grid);
    if (tr[2] != std::floor(tr[2]) || tr[2] < 2) throw ConfigError("grid: success-prob grid is lo:hi:points with points >= 2");
    grid = log_grid(tr[0], tr[1], static_cast<std::size_t>(tr[2]));
  } else {
    grid = log_grid(cfg.number("sweep.eta_c_min"), cfg.number("sweep.eta_c_max"),
                    static_cast<std::size_t>(cfg.integer("sweep.eta_c_points", 2, 100000)));
  }
  for (double v : grid)
    if (v > 1.0) throw ConfigError("grid: eta_C must not exceed 1");

  const metrics::ProtocolVariant tmsv{metrics::VariantKind::TwoTmsv, lambda, 1.0};
  const metrics::ProtocolVariant hyb{metrics::VariantKind::Hybrid, lambda, t_b};
  const metrics::ProtocolVariant sppe{metrics::VariantKind::TwoSppe, lambda, t_sppe};
  if (sppe.outside_low_t_regime()) t.metadata.push_back({"warning", "two_sppe transmittance above 0.2"});
  t.metadata.push_back({"polarisation_reference", "threshold 0.6667, scaling O(eta_C)"});

  const double eta_Dc = cfg.number_in("loss.eta_Dc", 0.0, 1.0);
  const std::size_t cutoff = cutoff_from(cfg);
  const auto sim = parallel_map<double>(grid, [&](double ec) {
    protocol::ProtocolParams pp;
    pp.src = analytic::SourceParams::from_gain(g, t_b);
    pp.loss = analytic::LossParams::from_transmittance(ec, eta_Dc, 1.0);
    pp.cutoff = cutoff;
    return protocol::success_probability_sim(pp);
  });

  std::vector<double> ph;
  for (double ec : grid) ph.push_back(metrics::success_probability(hyb, ec));
  bool ordered = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = metrics::success_probability(tmsv, grid[k]);
    const double c = metrics::success_probability(sppe, grid[k]);
    const bool ok = a >= ph[k] && ph[k] >= c;
    ordered = ordered && ok;
    const std::size_t j0 = k == 0 ? 0 : k - 1;
    const std::size_t j1 = k == 0 ? std::min<std::size_t>(1, grid.size() - 1) : k;
    const double slope = j0 == j1 ? 0.0 : std::log(ph[j1] / ph[j0]) / std::log(grid[j1] / grid[j0]);
    t.add_row({grid[k], a, ph[k], c, sim[k], slope, std::int64_t{ok ? 1 : 0}});
  }
  try {
    t.metadata.push_back({"hybrid_slope_1e-4_to_1e-2", format_number(loglog_slope(grid, ph, 1e-4, 1e-2))});
  } catch (const std::invalid_argument&) {
    t.metadata.push_back({"hybrid_slope_1e-4_to_1e-2", "n/a"});
  }
  if (!ordered) {
    res.exit_code = kExitThreshold;
    res.message = "success probability ordering two_tmsv >= hybrid >= two_sppe violated";
  }
  return res;
}

// ------------------------------------------------------------- di-metrics --

inline CommandResult cmd_di_metrics(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "di-metrics";
  t.columns = {{"eta_D", "1"},  {"family", "1"},     {"S", "1"},
               {"H_min", "bits"}, {"chi_max", "bits"}, {"rate_lower_bound", "bits/s"},
               {"clamped", "1"}};
  const double rate = cfg.number_in("metrics.repetition_rate", 0.0, 1e15);
  t.metadata.push_back({"repetition_rate_hz", format_number(rate)});
  t.metadata.push_back({"polarisation_reference", "threshold 0.6667, scaling O(eta_C)"});
  const auto grid = eta_grid(cfg, o);
  struct Pair {
    double hybrid, psi;
  };
  const auto vals = parallel_map<Pair>(grid, [&](double e) {
    const double sh = opt::maximize_chsh(problem_from(cfg, e)).S;
    const double sp = std::abs(opt::maximize_family_chsh(family_from(cfg, analytic::FamilyKind::AntiCorrelated, e)).S);
    return Pair{sh, sp};
  });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (auto [name, S] : {std::pair<const char*, double>{"hybrid", vals[k].hybrid}, {"psi", vals[k].psi}}) {
      const auto m = metrics::di_metrics(std::min(S, kTsirelson), rate);
      t.add_row({grid[k], std::string(name), S, m.h_min, m.chi_max, m.rate_lower_bound, std::int64_t{m.clamped ? 1 : 0}});
    }
  }
  return res;
}

// --------------------------------------------------------- compare-states --

inline CommandResult cmd_compare_states(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "compare-states";
  const auto grid = eta_grid(cfg, o);
  const double tol = cfg.number_in("optimizer.threshold_tol", 1e-4, 0.1);

  if (o.loss_grid) {
    // S over (eta_H, eta_D) with the optimal lossless-heralding settings, and
    // with the same settings after lowering the gain at a fixed amplitude ratio.
    t.columns = {{"eta_H", "1"}, {"eta_D", "1"}, {"S_fixed", "1"}, {"S_low_gain", "1"}};
    const double step = cfg.number_in("sweep.eta_h_step", 1e-3, 1.0);
    const auto hs = linear_grid(step, 1.0, step);
    const std::size_t cutoff = cutoff_from(cfg);
    const auto reps = parallel_map<opt::OptimumReport>(grid, [&](double e) {
      auto p = problem_from(cfg, e);
      p.objective = opt::Objective::AnalyticChsh;
      return opt::maximize_chsh(p);
    });
    for (std::size_t k = 0; k < grid.size(); ++k) {
      auto settings = reps[k].settings;
      auto src = reps[k].src;
      if (const auto row = reference::find_row(grid[k], 1e-9)) {
        src = row->source();
        settings = row->settings();
      }
      const auto low = src.g > 0.0 ? analytic::with_lambda_at_fixed_ratio(src, src.lambda() / 20.0) : src;
      for (double h : hs) {
        h = std::round(h * 1e12) / 1e12;
        auto run = [&](const analytic::SourceParams& s) {
          protocol::ProtocolParams pp;
          pp.src = s;
          pp.loss = analytic::LossParams::symmetric(h, grid[k]);
          pp.cutoff = cutoff;
          try {
            return protocol::measure_chsh_sim(pp, settings, grid[k]).S;
          } catch (const protocol::DegenerateHerald&) {
            return 2.0;
          }
        };
        t.add_row({h, grid[k], run(src), run(low)});
      }
    }
    return res;
  }

  t.columns = {{"eta", "1"}, {"S_phi", "1"}, {"S_psi", "1"}};
  auto family_max = [&](analytic::FamilyKind kind) {
    return [&cfg, kind](double e) { return std::abs(opt::maximize_family_chsh(family_from(cfg, kind, e)).S); };
  };
  const auto phi = parallel_map<double>(grid, family_max(analytic::FamilyKind::Correlated));
  const auto psi = parallel_map<double>(grid, family_max(analytic::FamilyKind::AntiCorrelated));
  for (std::size_t k = 0; k < grid.size(); ++k) t.add_row({grid[k], phi[k], psi[k]});

  bool missing = false;
  for (auto [name, kind] : {std::pair<const char*, analytic::FamilyKind>{"phi", analytic::FamilyKind::Correlated},
                            {"psi", analytic::FamilyKind::AntiCorrelated}}) {
    try {
      const double th = opt::threshold_scan(family_max(kind), tol);
      t.metadata.push_back({std::string(name) + "_threshold", format_number(th)});
    } catch (const opt::NoViolation&) {
      t.metadata.push_back({std::string(name) + "_threshold", "none"});
      missing = true;
    }
  }
  if (missing) {
    res.exit_code = kExitThreshold;
    res.message = "a state family shows no violation in [0.6, 1]";
  }
  return res;
}

// --------------------------------------------------------------- optimize --

inline CommandResult cmd_optimize(const RunConfig& cfg, const CommandOptions& o) {
  CommandResult res;
  Table& t = res.table;
  t.command = "optimize";
  t.columns = {{"eta_D", "1"},       {"objective", "1"}, {"S", "1"},          {"CH", "1"},
               {"t_b", "1"},         {"g", "1"},         {"alpha1", "1"},     {"alpha2", "1"},
               {"beta1", "1"},       {"beta2", "1"},     {"evaluations", "count"}, {"restarts", "count"},
               {"seed", "1"},        {"degenerate", "1"}};
  const double eta = o.eta ? *o.eta : cfg.number_in("loss.eta_D", 0.0, 1.0);
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("--eta must lie in [0, 1]");
  const auto r = opt::maximize_chsh(problem_from(cfg, eta));
  t.add_row({eta, std::string(opt::to_string(r.objective)), r.S, ch_from_chsh(r.S), r.src.t_b, r.src.g,
             r.settings.alpha1.real(), r.settings.alpha2.real(), r.settings.beta1.real(), r.settings.beta2.real(),
             static_cast<std::int64_t>(r.evaluations), static_cast<std::int64_t>(r.restarts_used),
             std::to_string(r.seed), std::int64_t{r.degenerate ? 1 : 0}});
  return res;
}

using CommandFn = std::function<CommandResult(const RunConfig&, const CommandOptions&)>;

inline std::vector<std::pair<std::string, CommandFn>> command_table() {
  return {{"table-s1", cmd_table_s1},         {"sweep-eta", cmd_sweep_eta},   {"success-prob", cmd_success_prob},
          {"di-metrics", cmd_di_metrics},     {"compare-states", cmd_compare_states}, {"optimize", cmd_optimize}};
}

}  // namespace pnpe::cli
