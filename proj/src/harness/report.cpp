#include "drsim/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <tuple>

namespace drsim::harness {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_summary_csv(std::ostream& out, std::vector<CellSummary> summaries) {
  std::stable_sort(summaries.begin(), summaries.end(), [](const CellSummary& a, const CellSummary& b) {
    return std::tie(a.cell.protocol, a.cell.n, a.cell.k, a.cell.beta, a.cell.adversary) <
           std::tie(b.cell.protocol, b.cell.n, b.cell.k, b.cell.beta, b.cell.adversary);
  });
  out << kSummaryHeader << "\n";
  for (const auto& s : summaries) {
    out << csv_field(s.cell.protocol) << ',' << csv_field(s.cell.adversary) << ',' << s.cell.n << ',' << s.cell.k
        << ',' << format_real(to_double(s.cell.beta)) << ',' << s.trials << ',' << s.q_max_max << ','
        << format_real(s.q_max_mean) << ',' << format_real(s.t_max) << ',' << format_real(s.m_total_mean) << ','
        << s.s_max_max << ',' << format_real(s.correct_freq) << ',' << (s.bounds_ok ? "true" : "false") << "\n";
  }
}

void write_trials_csv(std::ostream& out, const std::vector<CellSummary>& summaries) {
  out << "protocol,adversary,n,k,beta,trial,seed,ok,q_max,t,m_total,s_max,correct,error\n";
  for (const auto& s : summaries) {
    for (const auto& r : s.runs) {
      out << csv_field(s.cell.protocol) << ',' << csv_field(s.cell.adversary) << ',' << s.cell.n << ',' << s.cell.k
          << ',' << format_real(to_double(s.cell.beta)) << ',' << r.index << ',' << r.seed << ','
          << (r.ok ? "true" : "false") << ',' << r.metrics.q_max << ',' << to_string(r.metrics.t) << ','
          << r.metrics.m_total << ',' << r.metrics.s_max << ',' << (r.metrics.correct ? "true" : "false") << ','
          << csv_field(r.error) << "\n";
    }
  }
}

void write_table(std::ostream& out, const std::vector<CellSummary>& summaries) {
  char line[512];
  std::snprintf(line, sizeof line, "%-16s %-16s %8s %6s %8s %6s %6s %10s %10s %12s %8s %8s %s\n", "protocol",
                "adversary", "n", "k", "beta", "trials", "errors", "Q max", "T max", "M mean", "S max", "correct",
                "bounds");
  out << line;
  for (const auto& s : summaries) {
    std::snprintf(line, sizeof line, "%-16s %-16s %8lld %6d %8.4f %6lld %6lld %10lld %10.3f %12.1f %8lld %8.4f %s\n",
                  s.cell.protocol.c_str(), s.cell.adversary.c_str(), static_cast<long long>(s.cell.n), s.cell.k,
                  to_double(s.cell.beta), static_cast<long long>(s.trials), static_cast<long long>(s.errors),
                  static_cast<long long>(s.q_max_max), s.t_max, s.m_total_mean, static_cast<long long>(s.s_max_max),
                  s.correct_freq, s.bounds_ok ? "ok" : "FAIL");
    out << line;
    for (const auto& b : s.bounds) {
      out << "    bound " << b.name << ": " << (b.ok ? "ok" : "FAIL");
      if (!b.error.empty()) out << " (" << b.error << ")";
      out << "\n";
    }
  }
}

void write_reports(const std::filesystem::path& dir, const std::vector<CellSummary>& summaries) {
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  if (!summary) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
  write_summary_csv(summary, summaries);
  std::ofstream trials(dir / "trials.csv", std::ios::binary);
  if (!trials) throw std::runtime_error("cannot write " + (dir / "trials.csv").string());
  write_trials_csv(trials, summaries);
}

}  // namespace drsim::harness
