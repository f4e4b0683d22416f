#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drsim/event_log.hpp"

namespace drsim::harness {

struct AuditResult {
  int k = 0;
  std::vector<std::int64_t> q_per_peer;  // index 0 unused
  std::vector<bool> faulty;
  std::int64_t q_max = 0;
  std::int64_t m_total = 0;
  std::int64_t s_max = 0;
  Rational t{0};
  std::int64_t events = 0;
  // Filled when reported metrics were available to compare against.
  std::vector<std::string> mismatches;
  bool compared = false;
};

// Recomputes Q, T, M and S from an event log. `k` defaults to the largest
// peer id seen.
AuditResult audit_events(const std::vector<Event>& events, int k = 0, bool async = false);

// Reads `<path>` and, when present, `<path>.metrics.json` with the metrics the
// run reported; differences land in `mismatches`.
AuditResult audit_file(const std::filesystem::path& path);

}  // namespace drsim::harness
