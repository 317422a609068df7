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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnpe/cli/commands.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::string out;
  std::optional<int> cutoff;
  std::vector<std::string> sets;
  std::optional<double> eta;
  std::optional<std::string> grid;
  bool verify_optimizer = false;
  bool loss_grid = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "Config file of key=value lines");
  sub->add_option("--seed", f.seed, "Optimizer seed (run.seed)");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", f.out, "Output path (default stdout)");
  sub->add_option("--cutoff", f.cutoff, "Fock cutoff per mode (run.cutoff)");
  sub->add_option("--set", f.sets, "Override a config key, key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pnpe::cli;
  CLI::App app{"pnpe: heralded photon-number path-entanglement Bell-test engine"};
  app.set_version_flag("--version", std::string(PNPE_VERSION));
  app.require_subcommand(1);
  Flags f;

  auto* table = app.add_subcommand("table-s1", "Reference optimal settings: analytic and simulated S per row");
  add_common(table, f);
  table->add_option("--eta", f.eta, "Only the row at this detection efficiency");
  table->add_flag("--verify-optimizer", f.verify_optimizer, "Re-optimize each row and compare");

  auto* sweep = app.add_subcommand("sweep-eta", "Optimal S versus symmetric detection efficiency");
  add_common(sweep, f);
  sweep->add_option("--grid", f.grid, "lo:hi:step efficiency grid");

  auto* succ = app.add_subcommand("success-prob", "Heralding success probability versus channel transmittance");
  add_common(succ, f);
  succ->add_option("--grid", f.grid, "lo:hi:points logarithmic eta_C grid");

  auto* di = app.add_subcommand("di-metrics", "Min-entropy and Holevo bound versus detection efficiency");
  add_common(di, f);
  di->add_option("--grid", f.grid, "lo:hi:step efficiency grid");

  auto* cmp = app.add_subcommand("compare-states", "Correlated versus anticorrelated state families under loss");
  add_common(cmp, f);
  cmp->add_option("--grid", f.grid, "lo:hi:step efficiency grid");
  cmp->add_flag("--loss-grid", f.loss_grid, "Emit the (eta_H, eta_D, S) grid instead");

  auto* optc = app.add_subcommand("optimize", "Maximize S at one detection efficiency");
  add_common(optc, f);
  optc->add_option("--eta", f.eta, "Detection efficiency (default loss.eta_D)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg.load_file(f.config_path);
    for (const auto& s : f.sets) cfg.set_assignment(s);
    if (f.seed) cfg.set("run.seed", std::to_string(*f.seed));
    if (f.format) cfg.set("run.format", *f.format);
    if (f.cutoff) cfg.set("run.cutoff", std::to_string(*f.cutoff));
    cfg.choice("run.format", {"csv", "json"});

    CommandOptions opts{f.eta, f.grid, f.verify_optimizer, f.loss_grid};
    CommandResult result;
    for (const auto& [cmd, fn] : command_table())
      if (cmd == name) result = fn(cfg, opts);

    if (f.out.empty()) {
      write_table(std::cout, result.table, cfg);
    } else {
      std::ofstream os(f.out, std::ios::binary);
      if (!os) throw ConfigError("cannot open output file '" + f.out + "'");
      write_table(os, result.table, cfg);
    }
    if (!result.message.empty()) std::cerr << "pnpe " << name << ": " << result.message << "\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "pnpe " << name << ": config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "pnpe " << name << ": " << e.what() << "\n";
    return 1;
  }
}
