#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drsim/harness/config.hpp"
#include "drsim/model.hpp"

namespace drsim::harness {

struct Cell {
  std::string protocol;
  std::string adversary;
  std::int64_t n = 0;
  int k = 0;
  Rational beta{0};

  std::string key() const;
};

struct TrialResult {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
};

struct BoundResult {
  std::string name;
  bool ok = false;
  std::string error;  // evaluation failure, counted as not ok
};

struct CellSummary {
  Cell cell;
  std::int64_t trials = 0;
  std::int64_t errors = 0;
  std::int64_t q_max_max = 0;
  double q_max_mean = 0;
  double q_max_p50 = 0;
  double q_max_p90 = 0;
  double t_max = 0;
  double t_mean = 0;
  double m_total_mean = 0;
  std::int64_t m_total_max = 0;
  std::int64_t s_max_max = 0;
  double correct_freq = 0;
  std::vector<BoundResult> bounds;
  bool bounds_ok = true;
  std::vector<TrialResult> runs;
};

struct RunOptions {
  int jobs = 1;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> round_cap;
  // Event logs for the first trial of each cell go here when the spec asks
  // for them.
  std::optional<std::filesystem::path> event_dir;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec);
SimConfig cell_config(const ExperimentSpec& spec, const Cell& cell, std::uint64_t seed, std::int64_t round_cap);
std::uint64_t cell_seed(std::uint64_t master, const Cell& cell);

// Runs every (cell, trial) pair on `jobs` threads; results are folded in
// (cell, trial) order, so the output does not depend on scheduling.
std::vector<CellSummary> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

// Aggregates finished trials and evaluates the spec's bounds.
CellSummary summarize(const ExperimentSpec& spec, const Cell& cell, std::vector<TrialResult> runs);

}  // namespace drsim::harness
