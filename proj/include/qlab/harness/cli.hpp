#pragma once

// qlab <command> [options]; exit status 0 when every trial ran (violations
// are data), 1 on configuration errors, 2 on I/O errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qlab/harness/experiment.hpp"

namespace qlab::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qlab: probability-rule laboratory for finite-dimensional quantum contexts"};
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::size_t> dims;
  std::vector<std::string> rules;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double epsilon = 1e-9;
  std::string format = "csv";
  bool exact = false;
  std::string state_path;
  bool normalize = false;
  std::string out_path;
  unsigned workers = 1;
  std::vector<double> alphas;
  std::string base = "np-scan";
  bool allow_empty = false;
  Tolerances tol{};

  app.add_option("--dim", dims, "Hilbert-space dimension (repeatable)");
  app.add_option("--rule", rules, "born | power:ALPHA[:raw] | dim2sector | stub (repeatable)");
  app.add_option("--trials", trials, "Trials per rule and dimension");
  app.add_option("--seed", seed, "Master seed")->envname("QLAB_SEED");
  app.add_option("--epsilon", epsilon, "Bracket width for sandwich");
  app.add_option("--format", format, "json | csv");
  app.add_flag("--exact", exact, "Report exact rationals where available");
  app.add_option("--state", state_path, "State-description file");
  app.add_flag("--normalize", normalize, "Normalize the state read from --state");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--workers", workers, "Worker threads");
  app.add_option("--alpha", alphas, "Power-law exponent for sweep (repeatable)");
  app.add_option("--base", base, "Per-trial command swept by sweep");
  app.add_flag("--allow-empty", allow_empty, "Emit an empty report instead of failing");
  app.add_option("--tol-norm", tol.norm, "Norm tolerance");
  app.add_option("--tol-ortho", tol.ortho, "Orthonormality tolerance");
  app.add_option("--tol-rank", tol.rank, "Rank tolerance");

  std::string target;
  std::uint64_t fg_m = 0;
  std::uint64_t fg_n = 0;
  for (const char* name : {"np-scan", "postulates", "phase", "signalling", "reconstruct", "sweep"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " check");
  }
  auto* sandwich = app.add_subcommand("sandwich", "Bracket TARGET between rational weights");
  sandwich->add_option("TARGET", target, "Target weight in (0,1): decimal or p/q")->required();
  auto* finegrain = app.add_subcommand("finegrain", "Fine-grain weights m/N into N equal branches");
  finegrain->add_option("M", fg_m)->required();
  finegrain->add_option("N", fg_n)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    ExperimentConfig config;
    config.command = parse_command(app.get_subcommands().front()->get_name());
    config.trials = trials;
    config.seed = seed;
    config.tolerances = tol;
    config.epsilon = epsilon;
    config.format = parse_format(format);
    config.exact = exact;
    config.workers = workers;
    config.alphas = alphas;
    config.sweep_base = parse_command(base);
    config.sandwich_target = target;
    config.finegrain_m = fg_m;
    config.finegrain_n = fg_n;
    if (!rules.empty()) config.rules = rules;
    if (!state_path.empty()) {
      config.state = parse_state_file(state_path, normalize, tol);
      if (dims.empty()) dims = {config.state->state.dim()};
    }
    if (!dims.empty()) config.dims = dims;
    if (config.command == Command::sweep && rules.empty()) config.rules.clear();

    const auto records = run_experiment(config);
    const std::string report = emit_report(records, config.format, allow_empty);
    if (out_path.empty()) {
      out << report;
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file || !(file << report)) throw IoError("cannot write '" + out_path + "'");
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "qlab: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "qlab: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace qlab::harness
