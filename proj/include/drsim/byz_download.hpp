#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "drsim/bits.hpp"
#include "drsim/model.hpp"
#include "drsim/rational.hpp"
#include "drsim/rng.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

struct Alg1Params {
  Rational delta{0};
  Rational nu{1, 4};
  long double gamma_k = 0;  // lower bound on the number of honest peers
  long double lg_n = 0;
  long double lglg_n = 0;
  int first_round = 1;
  int last_round = 1;
  bool fallback = false;  // every peer reads the whole input

  int epoch_length() const { return last_round - first_round + 1; }
};

Alg1Params derive_alg1_params(std::int64_t n, long double gamma_k, const Rational& delta);
Alg1Params derive_alg1_params(std::int64_t n, int k, const Rational& gamma, const Rational& delta);

struct CoinToss {
  std::uint64_t heads = 0;
  bool forced = false;
  bool query() const { return forced || heads > 0; }
};

// Binomial(2^j, 1/gamma_k) heads; the final round of an epoch is forced to
// heads without drawing randomness.
CoinToss toss_query_coins(WordSource& coins, int j, const Alg1Params& params);

struct PjBounds {
  double pj = 0;
  double lower = 0;
  double upper = 0;
  bool holds = false;
};
// Evaluates P_j = 1 - (1 - 1/gk)^(2^j) with 256-bit floats and checks
// (2^j/gk)(1 - 1/(2 lg n)) < P_j < 2^j/gk.
PjBounds check_pj_bounds(std::int64_t gamma_k, std::int64_t n, int j);

// Vote message. Value 0 or 1; anything else is malformed.
struct Alg1Vote final : Payload {
  static constexpr std::uint32_t kTag = 0x41310001;
  explicit Alg1Vote(std::uint8_t v) : Payload(kTag), value(v) {}
  std::int64_t bits() const override { return 1; }
  std::string describe() const override { return "vote " + std::to_string(value); }
  std::uint8_t value;
};

// Senders grouped by the vote they cast in one round.
struct VoteDigest {
  PeerSet zero;
  PeerSet one;
  PeerSet bad;  // malformed or non-vote messages

  explicit VoteDigest(int k = 0) : zero(k), one(k), bad(k) {}
  void add(const Envelope& e);
  friend bool operator==(const VoteDigest& a, const VoteDigest& b) {
    return a.zero == b.zero && a.one == b.one && a.bad == b.bad;
  }
};

struct EpochRecord {
  std::int32_t learn_round = -1;  // j of the learning step
  bool by_query = false;
  std::int32_t blacklisted = 0;
  std::uint32_t heads = 0;        // total coins that came up heads
  std::int32_t learning_steps = 0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct BlacklistEntry {
  PeerId offender = 0;
  std::int64_t round = 0;  // round in which the offending message was sent
  friend bool operator==(const BlacklistEntry&, const BlacklistEntry&) = default;
};

// State machine of one honest peer. Rounds are 1-based; round r belongs to
// epoch (r-1)/R + 1 at coin round first + (r-1) % R.
class Alg1Peer {
 public:
  enum class Step { kIdle, kGossip, kQuery };

  Alg1Peer(const Alg1Params& params, PeerId self, int k, std::int64_t n);

  std::int64_t epoch_of(std::int64_t round) const { return (round - 1) / params_.epoch_length() + 1; }
  int coin_round_of(std::int64_t round) const {
    return params_.first_round + static_cast<int>((round - 1) % params_.epoch_length());
  }
  std::int64_t total_rounds() const { return n_ * params_.epoch_length(); }

  // Votes cast in round-1, read at the start of `round`.
  void ingest(std::int64_t round, const VoteDigest& votes);
  // Decision step of `round`; kQuery means the epoch's bit must be queried.
  Step act(std::int64_t round, WordSource& coins);
  // Sets the epoch's bit after kGossip/kQuery.
  void learn_queried(bool bit);
  // Small-k fallback: the whole input was read.
  void learn_all(const BitString& bits);
  // Vote to broadcast in `round`, if the peer learned in it.
  std::optional<bool> vote(std::int64_t round) const;

  std::int64_t count(bool b) const { return (b ? votes1_ : votes0_).size(); }
  const PartialBits& res() const { return res_; }
  const PeerSet& blacklist() const { return blacklist_; }
  const std::vector<EpochRecord>& records() const { return records_; }
  const std::vector<BlacklistEntry>& blacklist_log() const { return blacklist_log_; }

  // Test hook: seeds the current epoch's vote sets.
  void set_counts_for_test(const PeerSet& zero, const PeerSet& one) {
    votes0_ = zero;
    votes1_ = one;
  }

  friend bool operator==(const Alg1Peer& a, const Alg1Peer& b);

 private:
  void add_to_blacklist(const PeerSet& offenders, std::int64_t round, std::int64_t epoch);

  Alg1Params params_;
  PeerId self_;
  int k_;
  std::int64_t n_;
  PartialBits res_;
  PeerSet blacklist_;
  PeerSet votes0_;
  PeerSet votes1_;
  bool voted_ = false;
  std::int64_t voted_round_ = -1;
  std::vector<EpochRecord> records_;  // index epoch-1
  std::vector<BlacklistEntry> blacklist_log_;
};

// Protocol id "alg1".
class Alg1Protocol final : public SyncProtocol, public AdversaryHints {
 public:
  std::string name() const override { return "alg1"; }
  void setup(const SimConfig& cfg) override;
  void begin_round(std::int64_t round, const std::vector<const Envelope*>& shared) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override;
  const AdversaryHints* hints() const override { return this; }

  std::optional<std::int64_t> vote_index(std::int64_t round) const override;
  bool epoch_start(std::int64_t round) const override;

  const Alg1Params& params() const { return params_; }
  const Alg1Peer& peer(PeerId p) const { return peers_[static_cast<std::size_t>(p)]; }
  // Digest of the votes read at the start of the current round.
  const VoteDigest& last_digest() const { return digest_; }

  // Per-round recording of random words and queried bits for the
  // broadcast compression audit.
  void record_transcripts(bool on) { record_ = on; }
  struct RoundTranscript {
    std::vector<std::uint64_t> words;
    std::vector<std::pair<std::int64_t, bool>> queried;
  };
  const std::vector<RoundTranscript>& transcripts(PeerId p) const {
    return transcripts_[static_cast<std::size_t>(p)];
  }
  // Snapshots of every peer after each round (index round-1), when recording.
  const std::vector<std::vector<Alg1Peer>>& snapshots() const { return snapshots_; }
  void snapshot_round();

 private:
  SimConfig cfg_;
  Alg1Params params_;
  std::vector<Alg1Peer> peers_;  // index 0 unused
  VoteDigest digest_;
  std::vector<std::uint8_t> pending_query_;
  PayloadPtr vote0_;
  PayloadPtr vote1_;
  bool record_ = false;
  std::vector<std::vector<RoundTranscript>> transcripts_;
  std::vector<std::vector<Alg1Peer>> snapshots_;
  std::vector<std::uint64_t> tape_;
};

}  // namespace drsim
