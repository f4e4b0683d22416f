#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "drsim/model.hpp"

namespace drsim {

// Sync crash: the peer stops at the given sub-round of `round`. A crash in
// the message sub-round still lets the sends of that sub-round reach
// `delivered`; a crash in an earlier sub-round sends nothing that round.
struct CrashPoint {
  std::int64_t round = 1;
  Subround subround = Subround::kQuery;
  std::vector<PeerId> delivered;
};

// Async crash: the peer processes its activation number `activation`
// (0 = start handler, a = a-th delivery) and its sends from that activation
// reach only `delivered`. It is inert afterwards.
struct AsyncCrashPoint {
  std::int64_t activation = 0;
  std::vector<PeerId> delivered;
};

enum class FaultKind { kNone, kFixedByzantine, kDynamicByzantine, kCrash, kAsyncDelay };
const char* to_string(FaultKind k);

struct ByzView;
class ByzOutbox;

class ByzantineBehavior {
 public:
  virtual ~ByzantineBehavior() = default;
  virtual std::string name() const = 0;
  // Called once per round in the message sub-round with every corrupt peer.
  virtual void act(const ByzView& view, ByzOutbox& out) = 0;
};

struct DelayQuery {
  PeerId sender = 0;
  PeerId recipient = 0;
  Ticks sent_at = 0;
  std::uint64_t seq = 0;
  std::uint64_t link_index = 0;  // messages sent so far on (sender, recipient)
  std::uint32_t tag = 0;
};

class DelayPolicy {
 public:
  virtual ~DelayPolicy() = default;
  virtual std::string name() const = 0;
  // Delay in ticks; valid values are 1..kTicksPerUnit.
  virtual Ticks delay(const DelayQuery& q) = 0;
};

struct FaultPlan {
  FaultKind kind = FaultKind::kNone;
  int budget = 0;
  // Sorted corrupt set per round; unset means nobody is corrupt.
  std::function<std::vector<PeerId>(std::int64_t)> corrupt_schedule;
  std::map<PeerId, CrashPoint> crashes;
  std::map<PeerId, AsyncCrashPoint> async_crashes;
  std::shared_ptr<ByzantineBehavior> behavior;
  std::shared_ptr<DelayPolicy> delays;

  std::vector<PeerId> corrupt_at(std::int64_t round) const;
  // Budget and key checks against the configuration.
  void validate(const SimConfig& cfg) const;
};

// Restricts one batch of sends from a crashing peer to the recipients that
// still receive them. Broadcast envelopes become explicit recipient lists.
std::vector<Envelope> crash_cut(std::vector<Envelope> batch, const std::vector<PeerId>& delivered);

}  // namespace drsim
