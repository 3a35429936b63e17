// Command-line front end: evaluate rate bounds, sweep the depolarizing
// family, classify channel structure, run coding-primitive simulations, and
// optimize ensembles. Outputs CSV (stdout or --out), diagnostics on stderr.
// Exit codes: 0 success, 2 validation failure, 3 infeasible optimization.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "qrelay/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"achievable-rate toolkit for fully quantum relay channels"};
  app.require_subcommand(1);

  qrelay::RunManifest manifest;
  auto add_common = [&](CLI::App* cmd, bool needs_channel, bool needs_config) {
    auto* ch = cmd->add_option("--channel", manifest.channel_path, "channel spec JSON");
    auto* cf = cmd->add_option("--config", manifest.config_path, "configuration JSON");
    if (needs_channel) ch->required();
    if (needs_config) cf->required();
    cmd->add_option("--seed", manifest.seed, "RNG seed");
    cmd->add_option("--restarts", manifest.restarts, "optimizer restarts");
    cmd->add_option("--out", manifest.out_path, "output CSV path");
    cmd->add_option("--cards", manifest.cards, "cardinalities, e.g. U=2,X0=2,X1=1");
    cmd->add_option("--tol", manifest.tol, "optimizer tolerance");
  };

  add_common(app.add_subcommand("eval", "evaluate a bound for a fixed configuration"), true, true);
  add_common(app.add_subcommand("sweep", "depolarizing-family (p, q) grid"), false, true);
  add_common(app.add_subcommand("classify", "structure report for a channel"), true, false);
  add_common(app.add_subcommand("simulate", "coding-primitive simulations"), false, true);
  add_common(app.add_subcommand("optimize", "maximize a bound over ensembles"), true, false);

  CLI11_PARSE(app, argc, argv);
  manifest.command = app.get_subcommands().front()->get_name();

  const qrelay::RunResult res = qrelay::run_command(manifest);
  if (manifest.command == "classify" && res.exit_code == 0) {
    std::cout << res.report;
  } else if (!res.report.empty()) {
    std::cerr << res.report << "\n";
  }
  if (res.exit_code == 0 && manifest.out_path.empty() && !res.csv.empty()) {
    std::cout << res.csv;
  }
  return res.exit_code;
}
