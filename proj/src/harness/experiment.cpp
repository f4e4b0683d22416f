#include "drsim/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "drsim/harness/expr.hpp"
#include "drsim/protocols.hpp"
#include "drsim/rng.hpp"
#include "drsim/source.hpp"

namespace drsim::harness {

std::string Cell::key() const {
  return protocol + "|" + adversary + "|" + std::to_string(n) + "|" + std::to_string(k) + "|" + to_string(beta);
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (const auto& p : spec.protocols) {
    for (const auto& a : spec.adversaries) {
      for (auto n : spec.ns) {
        for (int k : spec.ks) {
          for (const auto& b : spec.betas) cells.push_back(Cell{p, a, n, k, b});
        }
      }
    }
  }
  return cells;
}

std::uint64_t cell_seed(std::uint64_t master, const Cell& cell) { return derive_seed(master, label_tag(cell.key())); }

SimConfig cell_config(const ExperimentSpec& spec, const Cell& cell, std::uint64_t seed, std::int64_t round_cap) {
  const ProtocolInfo* info = find_protocol(cell.protocol);
  if (!info) throw ConfigError("unknown protocol id '" + cell.protocol + "'");
  SimConfig cfg;
  cfg.n = cell.n;
  cfg.k = cell.k;
  cfg.beta = cell.beta;
  cfg.protocol = cell.protocol;
  cfg.adversary = cell.adversary;
  cfg.timing = info->timing;
  cfg.mode = info->default_mode;
  if (spec.mode == "broadcast") cfg.mode = CommMode::kBroadcast;
  if (spec.mode == "point-to-point") cfg.mode = CommMode::kPointToPoint;
  cfg.seed = seed;
  cfg.constants = spec.constants;
  cfg.round_cap = round_cap;
  cfg.record_events = spec.record_events;
  return cfg;
}

namespace {

TrialResult run_trial(const ExperimentSpec& spec, const Cell& cell, std::int64_t index, std::uint64_t seed,
                      std::int64_t round_cap, const std::optional<std::filesystem::path>& event_file) {
  TrialResult t;
  t.index = index;
  t.seed = seed;
  try {
    SimConfig cfg = cell_config(spec, cell, seed, round_cap);
    cfg.record_events = cfg.record_events && event_file.has_value();
    const BitString input = random_input(cfg.n, derive_seed(seed, label_tag("input")));
    RunResult r = run_configured(cfg, input, spec.adversary_params, spec.protocol_options);
    t.metrics = r.metrics;
    t.ok = true;
    if (event_file && r.log.enabled()) {
      std::ofstream out(*event_file, std::ios::binary);
      r.log.write_ndjson(out);
      nlohmann::json meta = {{"k", cfg.k},
                             {"n", cfg.n},
                             {"timing", cfg.timing == Timing::kAsync ? "async" : "sync"},
                             {"q_max", r.metrics.q_max},
                             {"m_total", r.metrics.m_total},
                             {"s_max", r.metrics.s_max},
                             {"t", to_string(r.metrics.t)}};
      std::ofstream m(event_file->string() + ".metrics.json", std::ios::binary);
      m << meta.dump(2) << "\n";
    }
  } catch (const NonTermination& e) {
    t.error = std::string("non-termination: ") + e.what();
    t.metrics = e.metrics;
  } catch (const LivenessError& e) {
    t.error = std::string("liveness: ") + e.what();
  } catch (const InvariantViolation& e) {
    t.error = std::string("invariant: ") + e.what();
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

double quantile(std::vector<std::int64_t> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  return static_cast<double>(v[std::min(idx, v.size() - 1)]);
}

}  // namespace

CellSummary summarize(const ExperimentSpec& spec, const Cell& cell, std::vector<TrialResult> runs) {
  CellSummary s;
  s.cell = cell;
  s.trials = static_cast<std::int64_t>(runs.size());
  std::vector<std::int64_t> qs;
  Rational t_max{0};
  double t_sum = 0, m_sum = 0;
  std::int64_t correct = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ++s.errors;
      continue;
    }
    qs.push_back(r.metrics.q_max);
    s.q_max_max = std::max(s.q_max_max, r.metrics.q_max);
    t_max = std::max(t_max, r.metrics.t);
    t_sum += to_double(r.metrics.t);
    m_sum += static_cast<double>(r.metrics.m_total);
    s.m_total_max = std::max(s.m_total_max, r.metrics.m_total);
    s.s_max_max = std::max(s.s_max_max, r.metrics.s_max);
    correct += r.metrics.correct ? 1 : 0;
  }
  const auto done = static_cast<double>(qs.size());
  if (!qs.empty()) {
    double q_sum = 0;
    for (auto q : qs) q_sum += static_cast<double>(q);
    s.q_max_mean = q_sum / done;
    s.t_mean = t_sum / done;
    s.m_total_mean = m_sum / done;
    s.correct_freq = static_cast<double>(correct) / done;
  }
  s.q_max_p50 = quantile(qs, 0.5);
  s.q_max_p90 = quantile(qs, 0.9);
  s.t_max = to_double(t_max);

  Bindings vars = {{"n", static_cast<long double>(cell.n)},
                   {"k", static_cast<long double>(cell.k)},
                   {"beta", static_cast<long double>(to_double(cell.beta))},
                   {"gamma", static_cast<long double>(to_double(Rational(1) - cell.beta))},
                   {"f", static_cast<long double>(floor_of(cell.beta * Rational(cell.k)))},
                   {"trials", static_cast<long double>(s.trials)},
                   {"errors", static_cast<long double>(s.errors)},
                   {"q_max_max", static_cast<long double>(s.q_max_max)},
                   {"q_max_mean", s.q_max_mean},
                   {"t_max", s.t_max},
                   {"t_mean", s.t_mean},
                   {"m_total_mean", s.m_total_mean},
                   {"m_total_max", static_cast<long double>(s.m_total_max)},
                   {"s_max_max", static_cast<long double>(s.s_max_max)},
                   {"correct_freq", s.correct_freq}};
  vars["Q"] = vars["q_max_max"];
  vars["Q_max"] = vars["q_max_max"];
  vars["T"] = vars["t_max"];
  vars["M"] = vars["m_total_mean"];
  vars["S"] = vars["s_max_max"];
  for (const auto& [name, value] : spec.constants) vars[name] = static_cast<long double>(to_double(value));
  for (const auto& b : spec.bounds) {
    BoundResult br;
    br.name = b.name;
    try {
      br.ok = Expr::parse(b.expr).eval(vars) != 0;
    } catch (const ExprError& e) {
      br.error = e.what();
    }
    s.bounds_ok = s.bounds_ok && br.ok;
    s.bounds.push_back(br);
  }
  s.runs = std::move(runs);
  return s;
}

std::vector<CellSummary> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const std::vector<Cell> cells = expand_cells(spec);
  const std::int64_t trials = options.trials.value_or(spec.trials);
  if (trials < 1) throw ConfigError("trials must be at least 1");
  const std::uint64_t master = options.seed.value_or(spec.seed);
  const std::int64_t cap = options.round_cap.value_or(spec.round_cap);
  if (options.event_dir && spec.record_events) std::filesystem::create_directories(*options.event_dir);

  std::vector<std::vector<TrialResult>> results(cells.size(), std::vector<TrialResult>(static_cast<std::size_t>(trials)));
  const std::size_t total = cells.size() * static_cast<std::size_t>(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t c = job / static_cast<std::size_t>(trials);
      const auto t = static_cast<std::int64_t>(job % static_cast<std::size_t>(trials));
      std::optional<std::filesystem::path> event_file;
      if (options.event_dir && spec.record_events && t == 0) {
        event_file = *options.event_dir / ("cell" + std::to_string(c) + ".ndjson");
      }
      const std::uint64_t seed = derive_seed(cell_seed(master, cells[c]), static_cast<std::uint64_t>(t));
      results[c][static_cast<std::size_t>(t)] = run_trial(spec, cells[c], t, seed, cap, event_file);
    }
  };
  const int jobs = std::max(1, options.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<CellSummary> out;
  for (std::size_t c = 0; c < cells.size(); ++c) out.push_back(summarize(spec, cells[c], std::move(results[c])));
  return out;
}

}  // namespace drsim::harness
