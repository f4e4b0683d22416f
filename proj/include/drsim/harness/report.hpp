#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "drsim/harness/experiment.hpp"

namespace drsim::harness {

inline constexpr const char* kSummaryHeader =
    "protocol,adversary,n,k,beta,trials,q_max_max,q_max_mean,t_max,m_total_mean,s_max_max,correct_freq,bounds_ok";

// Rows sorted by (protocol, n, k, beta, adversary); reals printed with six
// decimals.
void write_summary_csv(std::ostream& out, std::vector<CellSummary> summaries);
void write_trials_csv(std::ostream& out, const std::vector<CellSummary>& summaries);
void write_table(std::ostream& out, const std::vector<CellSummary>& summaries);

// Writes summary.csv and trials.csv under `dir` (created if needed).
void write_reports(const std::filesystem::path& dir, const std::vector<CellSummary>& summaries);

std::string format_real(double v);

}  // namespace drsim::harness
