#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drsim/model.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

// Leader of a view: views 1, 2, ... rotate over peers 1..k.
inline PeerId view_leader(std::int64_t view, int k) { return static_cast<PeerId>((view - 1) % k) + 1; }

struct ViewRecord {
  std::int64_t view = 0;
  PeerId leader = 0;
  std::int64_t index = 0;  // bit the view worked on
  bool good = false;       // bit confirmed at the end of the view
};

// Views of f+1 rounds. The leader queries the current bit in the view's first
// round; every peer that knows it relays it in each of the f+1 rounds; the
// check at the end of the view reads the last relay at the start of the next.
// Protocol id "static-crash". f is the "f" constant, default the fault budget.
class StaticDownload final : public SyncProtocol {
 public:
  struct PeerState {
    std::int64_t view = 1;
    std::int64_t index = 1;
    std::vector<bool> suspected_crashed;
    PartialBits res;
    int position = 1;  // round within the view, 1..f+1
    std::int64_t views_entered = 1;
    bool done = false;
  };

  std::string name() const override { return "static-crash"; }
  void setup(const SimConfig& cfg) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override { return peers_[static_cast<std::size_t>(p)].res; }

  int f() const { return f_; }
  const PeerState& state(PeerId p) const { return peers_[static_cast<std::size_t>(p)]; }
  const std::vector<ViewRecord>& views() const { return views_; }  // one per completed view, as seen by the lowest live id

 private:
  SimConfig cfg_;
  int f_ = 0;
  std::vector<PeerState> peers_;
  std::vector<std::uint8_t> pending_;
  std::vector<ViewRecord> views_;
  std::int64_t recorded_through_ = 0;
};

struct StaticAudit {
  std::int64_t rounds = 0;
  std::int64_t disagreements = 0;  // rounds where live peers differ on (view, I, BYZ)
  std::int64_t unjustified = 0;    // suspects that had not crashed
  std::int64_t max_views = 0;
};

// Per-round checks for the static protocol. With `strict`, a disagreement
// throws InvariantViolation.
SyncObserver static_checker(const StaticDownload& proto, StaticAudit& audit, bool strict);

// Two-round views started by view-change messages. Protocol id "rapid-crash".
class RapidDownload final : public SyncProtocol {
 public:
  struct PeerState {
    std::int64_t view = 1;
    std::int64_t index = 1;
    std::vector<bool> suspected_crashed;
    PartialBits res;
    bool idle = false;             // silence check suppressed at the next round start
    std::map<std::int64_t, int> copies;  // view messages received per view
    std::set<std::int64_t> led;    // views this peer started as leader
    int sends_left = 0;
    std::int64_t sending_view = 0;
    std::optional<std::pair<PeerId, std::int64_t>> view_change;  // (to, view) to send this round
    bool finished = false;
  };

  // A leader's view-change arrivals: round and indices.
  struct ChangeArrival {
    PeerId leader = 0;
    std::int64_t view = 0;
    std::int64_t round = 0;
    std::vector<std::int64_t> indices;
    bool started = false;  // this arrival started the view
  };

  std::string name() const override { return "rapid-crash"; }
  void setup(const SimConfig& cfg) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override { return peers_[static_cast<std::size_t>(p)].res; }

  const PeerState& state(PeerId p) const { return peers_[static_cast<std::size_t>(p)]; }
  const std::vector<ChangeArrival>& arrivals() const { return arrivals_; }
  const std::vector<ViewRecord>& views() const { return views_; }  // one per started view

 private:
  void change_view(PeerState& s, PeerId self);

  SimConfig cfg_;
  std::vector<PeerState> peers_;
  std::vector<std::uint8_t> pending_;
  std::vector<ChangeArrival> arrivals_;
  std::vector<ViewRecord> views_;
};

struct RapidAudit {
  std::int64_t rounds = 0;
  std::int64_t max_spread = 0;         // max - min of I over live peers
  std::int64_t prefix_violations = 0;  // confirmed-prefix failures
  std::int64_t unjustified = 0;
};
SyncObserver rapid_checker(const RapidDownload& proto, const BitString& truth, RapidAudit& audit);

}  // namespace drsim
