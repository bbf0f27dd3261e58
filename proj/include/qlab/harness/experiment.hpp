#pragma once

// Experiment orchestration: every check runs per rule × dim × trial with a
// seed derived from (master seed, trial index), so any row can be rerun on
// its own and the output does not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "qlab/qlab.hpp"
#include "qlab/harness/report.hpp"
#include "qlab/harness/state_file.hpp"

namespace qlab::harness {

enum class Command { np_scan, postulates, phase, sandwich, finegrain, signalling, reconstruct, sweep };

inline Command parse_command(const std::string& name) {
  if (name == "np-scan") return Command::np_scan;
  if (name == "postulates") return Command::postulates;
  if (name == "phase") return Command::phase;
  if (name == "sandwich") return Command::sandwich;
  if (name == "finegrain") return Command::finegrain;
  if (name == "signalling") return Command::signalling;
  if (name == "reconstruct") return Command::reconstruct;
  if (name == "sweep") return Command::sweep;
  throw ConfigError("unknown command '" + name + "'");
}

inline std::string command_name(Command c) {
  switch (c) {
    case Command::np_scan: return "np-scan";
    case Command::postulates: return "postulates";
    case Command::phase: return "phase";
    case Command::sandwich: return "sandwich";
    case Command::finegrain: return "finegrain";
    case Command::signalling: return "signalling";
    case Command::reconstruct: return "reconstruct";
    case Command::sweep: return "sweep";
  }
  return "?";
}

inline std::string metric_name(Command c) {
  switch (c) {
    case Command::np_scan: return "np_violation";
    case Command::postulates: return "additivity";
    case Command::phase: return "phase";
    case Command::sandwich: return "sandwich_width";
    case Command::finegrain: return "finegrain";
    case Command::signalling: return "signalling_gap";
    case Command::reconstruct: return "fit_residual";
    case Command::sweep: return "sweep";
  }
  return "?";
}

/// born | power:ALPHA[:raw] | dim2sector | stub
inline FrameRule parse_rule(const std::string& spec) {
  if (spec == "born") return FrameRule::born();
  if (spec == "dim2sector") return FrameRule::dim2_sector();
  if (spec == "stub") return FrameRule::phase_sensitive_stub();
  if (spec.rfind("power:", 0) == 0) {
    std::string rest = spec.substr(6);
    bool raw = false;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      if (rest.substr(colon + 1) != "raw") throw ConfigError("rule '" + spec + "': unknown suffix");
      raw = true;
      rest = rest.substr(0, colon);
    }
    double alpha = 0.0;
    std::size_t used = 0;
    try {
      alpha = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw ConfigError("rule '" + spec + "': cannot read alpha");
    }
    if (used != rest.size() || !std::isfinite(alpha) || alpha <= 0.0) {
      throw ConfigError("rule '" + spec + "': alpha must be a finite positive number");
    }
    return FrameRule::power_law(alpha, !raw);
  }
  throw ConfigError("unknown rule '" + spec + "'");
}

struct ExperimentConfig {
  Command command = Command::np_scan;
  std::vector<std::size_t> dims{3};
  std::vector<std::string> rules{"born"};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  Tolerances tolerances{};
  double epsilon = 1e-9;  // sandwich width
  OutputFormat format = OutputFormat::csv;
  bool exact = false;
  std::optional<StateFile> state;
  std::string sandwich_target;
  std::uint64_t finegrain_m = 1;
  std::uint64_t finegrain_n = 2;
  std::vector<double> alphas;               // sweep only
  Command sweep_base = Command::np_scan;    // sweep only
  unsigned workers = 1;

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    for (auto d : dims) {
      if (d < 2) throw ConfigError("every dim must be >= 2");
    }
    if (dims.empty() && command != Command::sandwich && command != Command::finegrain) {
      throw ConfigError("at least one --dim is required");
    }
    for (double a : alphas) {
      if (!std::isfinite(a) || a <= 0.0) throw ConfigError("alpha must be finite and positive");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
    for (const auto& r : rules) parse_rule(r);
    if (command == Command::sweep) {
      if (alphas.empty()) throw ConfigError("sweep needs at least one alpha");
      if (sweep_base == Command::sweep || sweep_base == Command::sandwich || sweep_base == Command::finegrain) {
        throw ConfigError("sweep base must be a per-trial command");
      }
    }
  }
};

namespace detail {

struct TrialContext {
  const ExperimentConfig& config;
  const FrameRule& rule;
  std::string experiment;
  std::size_t dim;
  std::size_t trial;
  std::uint64_t seed;

  std::uint64_t sub(std::uint64_t k) const { return derive_seed(seed, k); }

  StateVector state() const {
    if (config.state) {
      qlab::detail::require_same_dim(config.state->state.dim(), dim, "state file");
      return config.state->state;
    }
    return haar_state(dim, sub(0));
  }
  OrthonormalBasis basis() const {
    if (config.state && config.state->basis) {
      qlab::detail::require_same_dim(config.state->basis->dim(), dim, "state file basis");
      return *config.state->basis;
    }
    return haar_basis(dim, sub(1));
  }

  std::string witness(const std::string& extra) const {
    std::string w = "master=" + std::to_string(config.seed);
    if (!extra.empty()) w += ";" + extra;
    return w;
  }

  ReportRecord record(const std::string& metric, RecordValue value, const std::string& extra) const {
    return ReportRecord{experiment, rule.name(), dim, static_cast<std::int64_t>(trial), metric,
                        std::move(value), seed, witness(extra)};
  }
};

/// Random partition of {0..dim-1} into 1..dim-1 groups (at least one group
/// has two members, so additivity is exercised).
inline Grouping random_grouping(std::size_t dim, Rng& rng) {
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = dim - 1; i > 0; --i) std::swap(order[i], order[rng.next() % (i + 1)]);
  const std::size_t groups = 1 + rng.next() % (dim - 1);
  std::vector<std::size_t> cuts(dim - 1);
  std::iota(cuts.begin(), cuts.end(), std::size_t{1});
  for (std::size_t i = cuts.size() - 1; i > 0; --i) std::swap(cuts[i], cuts[rng.next() % (i + 1)]);
  cuts.resize(groups - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(dim);
  Grouping out;
  std::size_t begin = 0;
  for (std::size_t end : cuts) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    begin = end;
  }
  return out;
}

inline std::string grouping_text(const Grouping& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += '|';
    for (std::size_t j = 0; j < g[i].size(); ++j) {
      if (j) s += ' ';
      s += std::to_string(g[i][j]);
    }
  }
  return s;
}

inline std::vector<ReportRecord> run_trial(Command command, const TrialContext& t) {
  const Tolerances& tol = t.config.tolerances;
  switch (command) {
    case Command::np_scan: {
      const auto psi = t.state();
      const auto basis = t.basis();
      Rng rng(t.sub(2));
      const std::size_t k = rng.next() % t.dim;
      ContextPair pair(basis, random_sharing_basis(basis, k, t.sub(3)), {{k, 0}}, tol);
      return {t.record("np_violation", np_violation(t.rule, psi, pair, tol), "k=" + std::to_string(k))};
    }
    case Command::postulates: {
      const auto psi = t.state();
      const auto basis = t.basis();
      Rng rng(t.sub(2));
      const auto grouping = random_grouping(t.dim, rng);
      const auto r = gleason_postulate_check(t.rule, psi, basis, grouping, tol);
      const std::string w = "grouping=" + grouping_text(grouping);
      return {t.record("normalization", r.normalization, w), t.record("additivity", r.additivity, w)};
    }
    case Command::phase: {
      const auto psi = t.state();
      const auto basis = t.basis();
      Rng rng(t.sub(2));
      const std::size_t k = rng.next() % t.dim;
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      return {t.record("phase", phase_invariance_residual(t.rule, psi, basis, k, phi, tol),
                       "k=" + std::to_string(k) + ";phi=" + format_number(phi))};
    }
    case Command::signalling: {
      const auto psi = t.state();
      const auto basis = t.basis();
      Rng rng(t.sub(2));
      const std::size_t k = rng.next() % t.dim;
      MeasurementContext a{basis, haar_basis(t.dim, t.sub(4)), "A"};
      MeasurementContext b{random_sharing_basis(basis, k, t.sub(3)), haar_basis(t.dim, t.sub(5)), "A'"};
      const auto r = signalling_magnitude(t.rule, psi, a, b, {k, 0}, tol);
      return {t.record("signalling_gap", r.gap,
                       "k=" + std::to_string(k) + ";p_A=" + format_number(r.p_a) +
                           ";p_A'=" + format_number(r.p_a_prime))};
    }
    case Command::reconstruct: {
      const auto psi = t.state();
      const std::size_t count = t.dim * t.dim + t.dim;
      std::vector<DensitySample> samples;
      for (std::size_t s = 0; s < count; ++s) {
        auto v = haar_state(t.dim, t.sub(100 + s));
        const double p = evaluate_outcome(t.rule, psi, v.components(), tol);
        samples.push_back({std::move(v), p});
      }
      const auto fit = reconstruct_density(samples, tol);
      const double frob = (fit.rho - projector(psi)).norm();
      return {t.record("fit_residual", fit.residual,
                       "samples=" + std::to_string(count) + ";frobenius=" + format_number(frob) +
                           ";psd_clipped=" + (fit.psd_clipped ? "1" : "0"))};
    }
    default:
      throw ConfigError("command is not per-trial");
  }
}

struct Task {
  std::size_t rule;
  std::size_t dim;
  std::size_t trial;
};

/// Runs every (rule, dim, trial) task on `workers` threads; results are
/// merged in task order.
inline std::vector<ReportRecord> run_trials(const ExperimentConfig& config, Command command,
                                            const std::vector<FrameRule>& rules, const std::string& experiment) {
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    for (std::size_t d = 0; d < config.dims.size(); ++d) {
      for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({r, d, t});
    }
  }
  std::vector<std::vector<ReportRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& task = tasks[i];
      const TrialContext ctx{config, rules[task.rule], experiment, config.dims[task.dim], task.trial,
                             derive_seed(config.seed, task.trial)};
      try {
        results[i] = run_trial(command, ctx);
      } catch (const std::exception& e) {
        results[i] = {ctx.record(metric_name(command), ErrorValue{}, std::string("error=") + e.what())};
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(tasks.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<ReportRecord> out;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
  return out;
}

inline std::vector<FrameRule> build_rules(const std::vector<std::string>& specs) {
  std::vector<FrameRule> rules;
  for (const auto& s : specs) rules.push_back(parse_rule(s));
  return rules;
}

inline Rational parse_target(const std::string& text) {
  if (text.empty()) throw ConfigError("sandwich: missing TARGET");
  try {
    return Rational::parse(text);
  } catch (const DomainError&) {
    throw ConfigError("sandwich: cannot read TARGET '" + text + "'");
  }
}

inline std::vector<ReportRecord> run_sandwich(const ExperimentConfig& config) {
  const Rational target = parse_target(config.sandwich_target);
  const std::string w0 = "master=" + std::to_string(config.seed) + ";target=" + config.sandwich_target;
  ReportRecord rec{"sandwich", "-", 3, 0, "sandwich_width", 0.0, derive_seed(config.seed, 0), w0};
  try {
    const auto r = continuity_sandwich(target, config.epsilon);
    if (config.exact) rec.value = r.width();
    else rec.value = r.width().to_double();
    rec.witness += ";lo=" + r.lo.to_string() + ";hi=" + r.hi.to_string() +
                   ";digits=" + std::to_string(r.digits) + ";witness_error=" + format_number(r.witness_error());
  } catch (const std::exception& e) {
    rec.value = ErrorValue{};
    rec.witness += std::string(";error=") + e.what();
  }
  return {rec};
}

inline std::vector<ReportRecord> run_finegrain(const ExperimentConfig& config) {
  const auto rules = build_rules(config.rules);
  const std::uint64_t m = config.finegrain_m;
  const std::uint64_t n = config.finegrain_n;
  const std::string w0 = "master=" + std::to_string(config.seed) + ";m=" + std::to_string(m) +
                         ";N=" + std::to_string(n);
  const std::uint64_t seed = derive_seed(config.seed, 0);
  std::vector<ReportRecord> out;
  std::optional<FineGrainPlan> plan;
  std::string plan_error;
  try {
    plan = fine_grain(m, n);
  } catch (const std::exception& e) {
    plan_error = e.what();
  }
  const std::size_t joint_dim = static_cast<std::size_t>(2 * n);
  for (const auto& rule : rules) {
    ReportRecord rec{"finegrain", rule.name(), joint_dim, 0, "finegrain", 0.0, seed, w0 + ";quantity=invariance_residual"};
    try {
      if (!plan) throw DomainError(plan_error);
      rec.value = fine_grain_invariance_residual(rule, *plan, config.tolerances);
    } catch (const std::exception& e) {
      rec.value = ErrorValue{};
      rec.witness += std::string(";error=") + e.what();
    }
    out.push_back(std::move(rec));
  }
  if (config.exact) {
    ReportRecord rec{"finegrain", "counting", joint_dim, 0, "finegrain", 0.0, seed, w0 + ";quantity=rational_born"};
    try {
      rec.value = rational_born(m, n);
    } catch (const std::exception& e) {
      rec.value = ErrorValue{};
      rec.witness += std::string(";error=") + e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Aggregate of one sweep cell.
struct SweepCell {
  std::string rule;
  std::size_t dim;
  double max = 0.0;
  double mean = 0.0;
  std::size_t errors = 0;
};

inline std::vector<ReportRecord> run_experiment(const ExperimentConfig& config);

/// Runs the base command for every (rule, dim) cell, where the rules are the
/// context-normalized power laws for `alphas` followed by any explicit rules.
inline std::vector<SweepCell> sweep(const ExperimentConfig& base, const std::vector<double>& alphas,
                                    const std::vector<std::size_t>& dims,
                                    std::vector<ReportRecord>* trial_records = nullptr) {
  if (alphas.empty()) throw ConfigError("sweep needs at least one alpha");
  if (dims.empty()) throw ConfigError("sweep needs at least one dim");
  ExperimentConfig cfg = base;
  cfg.command = base.sweep_base;
  cfg.dims = dims;
  cfg.rules.clear();
  for (double a : alphas) cfg.rules.push_back(FrameRule::power_law(a).name());
  for (const auto& r : base.rules) {
    if (std::find(cfg.rules.begin(), cfg.rules.end(), r) == cfg.rules.end()) cfg.rules.push_back(r);
  }
  cfg.validate();
  const auto records = run_experiment(cfg);
  const std::string metric = cfg.command == Command::postulates ? "additivity" : metric_name(cfg.command);

  std::vector<SweepCell> cells;
  for (const auto& r : cfg.rules) {
    const std::string name = parse_rule(r).name();
    for (auto d : dims) {
      SweepCell cell{name, d};
      std::size_t count = 0;
      double sum = 0.0;
      for (const auto& rec : records) {
        if (rec.rule != name || rec.dim != d || rec.metric != metric) continue;
        if (const auto* v = std::get_if<double>(&rec.value)) {
          cell.max = std::max(cell.max, *v);
          sum += *v;
          ++count;
        } else {
          ++cell.errors;
        }
      }
      cell.mean = count ? sum / static_cast<double>(count) : 0.0;
      cells.push_back(cell);
    }
  }
  if (trial_records) *trial_records = records;
  return cells;
}

inline std::vector<ReportRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.command) {
    case Command::sandwich: return detail::run_sandwich(config);
    case Command::finegrain: return detail::run_finegrain(config);
    case Command::sweep: {
      const auto cells = sweep(config, config.alphas, config.dims);
      const std::string experiment = "sweep:" + command_name(config.sweep_base);
      const std::string metric =
          config.sweep_base == Command::postulates ? "additivity" : metric_name(config.sweep_base);
      std::vector<ReportRecord> out;
      for (const auto& c : cells) {
        const std::string w = "master=" + std::to_string(config.seed) + ";trials=" + std::to_string(config.trials) +
                              ";errors=" + std::to_string(c.errors);
        out.push_back({experiment, c.rule, c.dim, -1, metric, c.max, config.seed, w + ";stat=max"});
        out.push_back({experiment, c.rule, c.dim, -1, metric, c.mean, config.seed, w + ";stat=mean"});
      }
      return out;
    }
    default:
      return detail::run_trials(config, config.command, detail::build_rules(config.rules),
                                command_name(config.command));
  }
}

}  // namespace qlab::harness
