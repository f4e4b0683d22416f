#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drsim/async_scheduler.hpp"
#include "drsim/model.hpp"

namespace drsim {

// Owner of the l-th (0-based) of `count` indices spread over peers 1..k in
// contiguous runs: 1 + floor(l / (count / k)).
inline PeerId spread_owner(std::int64_t l, std::int64_t count, int k) {
  return static_cast<PeerId>((l * k) / count) + 1;
}

using IndexedBits = std::vector<std::pair<std::int64_t, bool>>;  // 1-based index, value

struct CrashBitsMsg final : Payload {
  static constexpr std::uint32_t kTag = 0x41430001;
  CrashBitsMsg(int phase_, IndexedBits bits_) : Payload(kTag), phase(phase_), entries(std::move(bits_)) {}
  std::int64_t bits() const override { return 64 + 33 * static_cast<std::int64_t>(entries.size()); }
  int phase;
  IndexedBits entries;
};

// Tolerates one crash. Two phases: blocks of n/k bits, one missing peer asked
// about, its block spread over the others if nobody has it. Protocol id
// "async-1crash"; needs k >= 3.
class SingleCrashDownload final : public AsyncProtocol {
 public:
  struct PeerState {
    int phase = 1;
    int stage = 1;
    std::vector<PeerId> owner;  // 0-based bit -> assigned peer
    std::vector<std::int64_t> unknown_of;
    PartialBits res;
    PeerId missing = 0;
    int responses = 0;
    std::vector<bool> responded;
    bool all_neither = true;
    bool reassigned = false;
    bool done = false;
    std::vector<std::pair<PeerId, PeerId>> waiting;  // (asker, missing peer)
  };

  std::string name() const override { return "async-1crash"; }
  void setup(const SimConfig& cfg) override;
  void on_start(AsyncContext& ctx) override;
  void on_deliver(AsyncContext& ctx, const Envelope& env) override;
  Output output(PeerId p) const override { return peers_[static_cast<std::size_t>(p)].res; }

  const PeerState& state(PeerId p) const { return peers_[static_cast<std::size_t>(p)]; }
  int reassignments() const;

 private:
  void learn(PeerState& s, std::int64_t index, bool bit);
  void advance(AsyncContext& ctx);
  void answer(AsyncContext& ctx, PeerState& s, PeerId to, PeerId about);

  SimConfig cfg_;
  std::vector<PeerState> peers_;
};

// Tolerates f crashes with ceil(log_{k/f} n) phases of request/response over
// a shrinking assignment. Phase p uses level p of nested_owners for every
// peer, so peers never disagree on who holds a bit they both lack. Protocol id "async-fcrash"; f is the "f" constant,
// default the fault budget. With stage-2 unblocking a peer leaves the third
// stage as soon as every missing block is filled.
class FCrashDownload final : public AsyncProtocol {
 public:
  struct PeerState {
    int phase = 0;
    int stage = 1;
    std::vector<PeerId> owner;
    std::vector<std::int64_t> unknown_of;
    PartialBits res;
    std::vector<PeerId> missing;
    std::vector<bool> responded;
    int responses = 0;
    bool terminated = false;
    struct Ask {
      PeerId from;
      int phase;
      bool second;
      std::vector<std::pair<PeerId, std::vector<std::int64_t>>> wanted;
    };
    std::vector<Ask> waiting;
  };

  explicit FCrashDownload(bool unblock = true) : unblock_(unblock) {}

  std::string name() const override { return "async-fcrash"; }
  void setup(const SimConfig& cfg) override;
  void on_start(AsyncContext& ctx) override;
  void on_deliver(AsyncContext& ctx, const Envelope& env) override;
  Output output(PeerId p) const override { return peers_[static_cast<std::size_t>(p)].res; }

  void set_unblock(bool on) { unblock_ = on; }
  bool unblock() const { return unblock_; }
  // Keep per-phase assignment snapshots for the matching check.
  void set_audit(bool on) { audit_ = on; }

  int f() const { return f_; }
  int phase_cap() const { return cap_; }
  const PeerState& state(PeerId p) const { return peers_[static_cast<std::size_t>(p)]; }
  // [peer][phase]: unknown bits when the peer entered the phase.
  const std::vector<std::vector<std::int64_t>>& unknown_at_phase() const { return unknown_at_; }
  // Pairs (peers, phase, bit) where two listed peers both lacked a bit after
  // the phase's queries but assigned it to different owners.
  std::int64_t assignment_conflicts(const std::vector<bool>& include) const;

 private:
  void learn(PeerState& s, std::int64_t index, bool bit);
  void recount(PeerState& s);
  void enter_phase(AsyncContext& ctx, PeerState& s);
  void advance(AsyncContext& ctx);
  void serve(AsyncContext& ctx, PeerState& s);
  bool can_serve(const PeerState& s, const PeerState::Ask& a) const;
  void reply(AsyncContext& ctx, PeerState& s, const PeerState::Ask& a);
  void finish(AsyncContext& ctx, PeerState& s);
  std::int64_t heard(const PeerState& s) const;

  SimConfig cfg_;
  bool unblock_;
  bool audit_ = false;
  int f_ = 0;
  int cap_ = 0;
  std::vector<std::vector<PeerId>> owner_at_;  // [phase][bit]
  std::vector<PeerState> peers_;
  std::vector<std::vector<std::int64_t>> unknown_at_;
  struct Snapshot {
    std::vector<PeerId> owner;
    BitString known;
  };
  std::vector<std::vector<Snapshot>> snapshots_;  // [peer][phase]
};

// Owner of every bit at levels 0..levels-1. Level 0 is the contiguous block
// split; each later level splits every block of the level above into k
// even pieces, so an owner depends only on the bit and the level.
std::vector<std::vector<PeerId>> nested_owners(std::int64_t n, int k, int levels);

// Smallest c with (k/f)^c >= n; f = 0 gives 1.
int fcrash_phase_cap(std::int64_t n, int k, int f);

}  // namespace drsim
