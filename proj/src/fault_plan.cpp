#include "drsim/fault_plan.hpp"

#include <algorithm>

namespace drsim {

const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::kNone:
      return "none";
    case FaultKind::kFixedByzantine:
      return "fixed-byzantine";
    case FaultKind::kDynamicByzantine:
      return "dynamic-byzantine";
    case FaultKind::kCrash:
      return "crash";
    case FaultKind::kAsyncDelay:
      return "async-delay";
  }
  return "none";
}

std::vector<PeerId> FaultPlan::corrupt_at(std::int64_t round) const {
  if (!corrupt_schedule) return {};
  return corrupt_schedule(round);
}

void FaultPlan::validate(const SimConfig& cfg) const {
  if (budget > cfg.fault_budget()) {
    throw ConfigError("fault plan budget " + std::to_string(budget) + " exceeds floor(beta*k) = " +
                      std::to_string(cfg.fault_budget()));
  }
  const auto check_peer = [&](PeerId p) {
    if (p < 1 || p > cfg.k) throw ConfigError("fault plan names unknown peer " + std::to_string(p));
  };
  if (static_cast<int>(crashes.size()) > budget || static_cast<int>(async_crashes.size()) > budget) {
    throw ConfigError("more crashing peers than the fault budget");
  }
  for (const auto& [p, c] : crashes) {
    check_peer(p);
    for (PeerId q : c.delivered) check_peer(q);
  }
  for (const auto& [p, c] : async_crashes) {
    check_peer(p);
    for (PeerId q : c.delivered) check_peer(q);
  }
}

std::vector<Envelope> crash_cut(std::vector<Envelope> batch, const std::vector<PeerId>& delivered) {
  std::vector<PeerId> keep = delivered;
  std::sort(keep.begin(), keep.end());
  std::vector<Envelope> out;
  for (auto& e : batch) {
    std::vector<PeerId> to;
    if (e.to_all) {
      for (PeerId p : keep) {
        if (p != e.sender) to.push_back(p);
      }
    } else {
      for (PeerId p : e.recipients) {
        if (std::binary_search(keep.begin(), keep.end(), p)) to.push_back(p);
      }
    }
    if (to.empty()) continue;
    e.to_all = false;
    e.recipients = std::move(to);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace drsim
