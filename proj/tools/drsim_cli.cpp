#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "drsim/harness/audit.hpp"
#include "drsim/harness/config.hpp"
#include "drsim/harness/experiment.hpp"
#include "drsim/harness/report.hpp"
#include "drsim/lower_bound.hpp"

namespace fs = std::filesystem;
using namespace drsim;
using namespace drsim::harness;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<std::int64_t> round_cap;
  std::string out_dir = "out";
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--trials", c.trials, "trials per cell (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "directory for CSV and event logs");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--round-cap", c.round_cap, "round (sync) or event (async) cap")->check(CLI::NonNegativeNumber);
}

int run_grid(const std::string& config, const Common& c, bool force_events) {
  ExperimentSpec spec = load_spec(config);
  if (force_events) spec.record_events = true;
  RunOptions opt;
  opt.jobs = c.jobs;
  opt.trials = c.trials;
  opt.seed = c.seed;
  opt.round_cap = c.round_cap;
  opt.event_dir = fs::path(c.out_dir) / "events";
  const auto summaries = run_experiment(spec, opt);
  write_reports(c.out_dir, summaries);
  write_table(std::cout, summaries);
  bool ok = true;
  for (const auto& s : summaries) ok = ok && s.bounds_ok;
  std::cout << "wrote " << (fs::path(c.out_dir) / "summary.csv").string() << "\n";
  return ok ? 0 : 1;
}

int attack_demo(const std::string& config, const Common& c) {
  AttackSpec a = load_attack(config);
  if (c.seed) a.seed = *c.seed;
  if (c.trials) a.trials = *c.trials;
  const MirrorResult r = mirror_attack(a.k, a.n, a.trials, a.seed, a.skips);
  fs::create_directories(c.out_dir);
  std::ofstream out(fs::path(c.out_dir) / "attack.csv", std::ios::binary);
  out << "k,n,skips,trials,target,fail0,fail1,worse_freq\n";
  out << a.k << ',' << a.n << ',' << a.skips << ',' << r.trials << ',' << r.target << ',' << r.fail0 << ','
      << r.fail1 << ',' << format_real(r.worse()) << "\n";
  std::cout << "mirror attack k=" << a.k << " n=" << a.n << " target bit " << r.target << ": failures " << r.fail0
            << " on X0, " << r.fail1 << " on X1 over " << r.trials << " trials; worse frequency "
            << format_real(r.worse()) << "\n";
  return 0;
}

int audit(const std::string& path) {
  const AuditResult a = audit_file(path);
  std::cout << "events " << a.events << ", k " << a.k << "\n";
  std::cout << "Q " << a.q_max << "  T " << to_string(a.t) << "  M " << a.m_total << "  S " << a.s_max << "\n";
  for (int p = 1; p <= a.k; ++p) {
    std::cout << "  peer " << p << (a.faulty[static_cast<std::size_t>(p)] ? " (faulty)" : "") << ": "
              << a.q_per_peer[static_cast<std::size_t>(p)] << " queries\n";
  }
  if (!a.compared) {
    std::cout << "no reported metrics next to the log; nothing to compare\n";
    return 0;
  }
  for (const auto& m : a.mismatches) std::cout << "MISMATCH " << m << "\n";
  std::cout << (a.mismatches.empty() ? "metrics match the run's report\n" : "metrics differ\n");
  return a.mismatches.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Download-problem simulator: seeded runs, sweeps, attack demo and log audit"};
  app.require_subcommand(1);

  Common c;
  std::string config;
  auto* run = app.add_subcommand("run", "run one config (every trial, event log for the first)");
  run->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);
  add_common(run, c);
  auto* sweep = app.add_subcommand("sweep", "run the config's full grid");
  sweep->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);
  add_common(sweep, c);
  auto* attack = app.add_subcommand("attack-demo", "mirror attack on the one-round skip protocol");
  attack->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);
  add_common(attack, c);
  std::string log_path;
  auto* aud = app.add_subcommand("audit", "recompute Q, T, M, S from an NDJSON event log");
  aud->add_option("eventlog", log_path, "event log")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_grid(config, c, true);
    if (*sweep) return run_grid(config, c, false);
    if (*attack) return attack_demo(config, c);
    if (*aud) return audit(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
