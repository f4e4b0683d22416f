#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/bits.hpp"
#include "drsim/event_log.hpp"
#include "drsim/fault_plan.hpp"
#include "drsim/model.hpp"
#include "drsim/rng.hpp"

namespace drsim {

struct QueryAnswer {
  std::int64_t first = 0;  // 1-based
  BitString bits;

  std::int64_t last() const { return first + static_cast<std::int64_t>(bits.width()) - 1; }
  bool covers(std::int64_t index) const { return index >= first && index <= last(); }
  bool bit(std::int64_t index) const { return bits.get(static_cast<std::size_t>(index - first)); }
};

// Messages readable by one peer in the current round: the shared broadcast
// pool (the sender reads its own copy too) and envelopes addressed to it.
struct Inbox {
  const std::vector<const Envelope*>* shared = nullptr;
  const std::vector<const Envelope*>* direct = nullptr;

  template <class F>
  void for_each(F&& fn) const {
    for (const Envelope* e : *shared) fn(*e);
    for (const Envelope* e : *direct) fn(*e);
  }
  bool has_direct() const { return !direct->empty(); }
  std::size_t size() const { return shared->size() + direct->size(); }
};

namespace detail {
class SyncEngine;
}

class SyncContext {
 public:
  PeerId self() const { return self_; }
  std::int64_t round() const;
  Subround subround() const;
  const SimConfig& config() const;
  int k() const;
  std::int64_t n() const;
  Stream& rng();

  const Inbox& inbox() const;

  // Query sub-round only. Answers appear in answers() from the response
  // sub-round on.
  void request(std::int64_t index);
  void request_range(std::int64_t first, std::int64_t len);
  const std::vector<QueryAnswer>& answers() const;

  // Message sub-round only.
  void send(PeerId to, PayloadPtr payload);
  void send(std::vector<PeerId> to, PayloadPtr payload);
  void broadcast(PayloadPtr payload);

  // Finished as of this round, or as of the previous round when the
  // decision only needed messages that arrived at the start of this one.
  void decide();
  void decide_previous_round();
  bool decided() const;

  bool tracing() const;
  void trace(nlohmann::json detail);

 private:
  friend class detail::SyncEngine;
  SyncContext(detail::SyncEngine* engine, PeerId self) : engine_(engine), self_(self) {}
  detail::SyncEngine* engine_;
  PeerId self_;
};

struct IntervalRound;

// Protocol-specific facts that stress adversaries may read.
class AdversaryHints {
 public:
  virtual ~AdversaryHints() = default;
  // Bit index (1-based) whose vote is cast in this round, if any.
  virtual std::optional<std::int64_t> vote_index(std::int64_t /*round*/) const { return std::nullopt; }
  // First round of the epoch containing `round`.
  virtual bool epoch_start(std::int64_t /*round*/) const { return false; }
  // Interval submission structure for this round, if the round broadcasts one.
  virtual const IntervalRound* interval_round(std::int64_t /*round*/) const { return nullptr; }
};

// One protocol object drives all k peers so per-round digests of the
// shared pool can be computed once.
class SyncProtocol {
 public:
  virtual ~SyncProtocol() = default;
  virtual std::string name() const = 0;
  virtual void setup(const SimConfig& cfg) = 0;
  virtual void begin_round(std::int64_t /*round*/, const std::vector<const Envelope*>& /*shared*/) {}
  virtual void on_query(SyncContext& ctx) = 0;
  virtual void on_response(SyncContext& /*ctx*/) {}
  virtual void on_message(SyncContext& ctx) = 0;
  virtual Output output(PeerId p) const = 0;
  virtual const AdversaryHints* hints() const { return nullptr; }
};

struct ByzView {
  std::int64_t round = 0;
  const SimConfig* config = nullptr;
  const PeerSet* corrupt = nullptr;
  std::vector<PeerId> corrupt_list;
  const BitString* truth = nullptr;
  const SyncProtocol* protocol = nullptr;
  const std::vector<const Envelope*>* last_round = nullptr;  // everything sent in round-1
  Stream* rng = nullptr;
};

class ByzOutbox {
 public:
  ByzOutbox(const PeerSet& corrupt, CommMode mode, std::int64_t round)
      : corrupt_(corrupt), mode_(mode), round_(round) {}
  void send(PeerId from, PeerId to, PayloadPtr payload);
  void multicast(PeerId from, std::vector<PeerId> to, PayloadPtr payload);
  void broadcast(PeerId from, PayloadPtr payload);
  std::vector<Envelope>& envelopes() { return out_; }

 private:
  void check(PeerId from, bool to_all);
  const PeerSet& corrupt_;
  CommMode mode_;
  std::int64_t round_;
  std::vector<PeerId> broadcasters_;
  std::vector<Envelope> out_;
};

struct SyncRoundView {
  std::int64_t round = 0;
  const std::vector<bool>* crashed = nullptr;
  const std::vector<bool>* ever_faulty = nullptr;
  const PeerSet* corrupt = nullptr;
  const std::vector<std::int64_t>* queries = nullptr;
  const std::vector<std::int64_t>* decided_at = nullptr;  // 0 = undecided
};
using SyncObserver = std::function<void(const SyncRoundView&)>;

struct RunResult {
  RunMetrics metrics;
  std::vector<Output> outputs;     // index 0 unused
  std::vector<bool> honest;        // never corrupt, never crashed
  std::vector<std::int64_t> finish;  // decide round (sync) or ticks (async); 0 = undecided
  std::int64_t rounds = 0;         // rounds executed, or events processed (async)
  EventLog log;
};

// Runs until every honest peer has decided. Throws NonTermination past the
// round cap.
RunResult run_sync(const SimConfig& cfg, const BitString& input, SyncProtocol& protocol,
                   const FaultPlan& plan, const SyncObserver& observer = {});

}  // namespace drsim
