#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "drsim/bits.hpp"
#include "drsim/model.hpp"
#include "drsim/rational.hpp"
#include "drsim/sifting.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

// Contiguous intervals of width phi over 1..n; the last may be shorter.
struct IntervalScheme {
  std::int64_t n = 0;
  std::int64_t phi = 0;
  std::int64_t count = 0;  // K = ceil(n / phi)

  static IntervalScheme make(std::int64_t n, std::int64_t phi);
  std::int64_t first(std::int64_t ell) const { return (ell - 1) * phi + 1; }
  std::int64_t width(std::int64_t ell) const { return std::min(phi, n - first(ell) + 1); }
  IntervalScheme doubled() const { return make(n, 2 * phi); }
};

// Submission structure of one round, exposed to stress adversaries.
struct IntervalRound {
  int level = 0;
  int iteration = -1;  // -1: main step, j >= 0: boosting step j
  IntervalScheme scheme;
  std::vector<std::int64_t> open;  // intervals honest peers pick from
  Rational threshold{1};           // frequency threshold applied to this round's strings
};

struct SubmissionPayload final : Payload {
  static constexpr std::uint32_t kTag = 0x46440001;
  SubmissionPayload(std::int64_t ell, int lvl, BitString s)
      : Payload(kTag), interval(ell), level(lvl), value(std::move(s)) {}
  // Interval id and level as 32-bit fields plus the string.
  std::int64_t bits() const override { return static_cast<std::int64_t>(value.width()) + 64; }
  std::string describe() const override {
    return "interval " + std::to_string(interval) + " level " + std::to_string(level);
  }
  std::int64_t interval;
  int level;
  BitString value;
};

// Strings per interval from one round, one per sender after discarding
// senders that submitted more than one distinct (interval, string).
class SubmissionDigest {
 public:
  SubmissionDigest() = default;
  SubmissionDigest(const IntervalScheme& scheme, int level, int k);
  void add_all(const std::vector<const Envelope*>& envs);
  void add(const Envelope& e);
  // Must be called after the last add.
  void seal();
  const StringMultiset& strings(std::int64_t ell) const { return by_interval_[static_cast<std::size_t>(ell - 1)]; }
  std::vector<BitString> frequent(std::int64_t ell, const Rational& t) const;

 private:
  IntervalScheme scheme_;
  int level_ = 0;
  std::vector<const SubmissionPayload*> first_;
  std::vector<std::uint8_t> multi_;
  std::vector<StringMultiset> by_interval_;
  bool sealed_ = false;
};

struct TwoRoundChoice {
  bool query_all = false;
  std::int64_t phi = 0;
  std::int64_t count = 0;
  Rational t{0};
};
TwoRoundChoice select_phi_2round(std::int64_t n, int k, const Rational& gamma, const Rational& c);

// Level-0 width for the log n protocols: (n/(gamma k)) * mult * ln n, rounded
// up and capped at n. mult is 8(c+1) without boosting and 8(c+2) with it.
std::int64_t logn_phi(std::int64_t n, int k, const Rational& gamma, long double mult);
// Threshold for strings submitted at `level`: 2^(level-1) * phi * gamma k / n.
Rational level_threshold(int level, std::int64_t phi, int k, const Rational& gamma, std::int64_t n);

// A candidate set for one interval and the tree over it.
struct IntervalCandidates {
  std::int64_t first = 1;
  std::vector<BitString> strings;
  std::shared_ptr<DecisionTree> tree;  // null when `strings` is empty

  static IntervalCandidates make(std::int64_t first, std::vector<BitString> strings);
  std::int64_t cost() const { return tree ? static_cast<std::int64_t>(tree->internal_count()) : 0; }
};

struct FastStats {
  std::int64_t determine_failures = 0;
  // Honest determine queries per level summed over peers, and the number of
  // peer-level samples.
  std::vector<std::int64_t> level_cost;
  std::vector<std::int64_t> level_samples;
  std::int64_t max_child_cost = 0;  // largest |FS|-1 over determined children
  int levels = 0;
  std::int64_t communication_rounds = 0;
};

// Protocol id "alg3-2round".
class TwoRoundProtocol final : public SyncProtocol, public AdversaryHints {
 public:
  std::string name() const override { return "alg3-2round"; }
  void setup(const SimConfig& cfg) override;
  void begin_round(std::int64_t round, const std::vector<const Envelope*>& shared) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override { return res_[static_cast<std::size_t>(p)]; }
  const AdversaryHints* hints() const override { return this; }
  const IntervalRound* interval_round(std::int64_t round) const override;

  const TwoRoundChoice& choice() const { return choice_; }
  const FastStats& stats() const { return stats_; }
  const std::vector<IntervalCandidates>& candidates() const { return candidates_; }

 private:
  SimConfig cfg_;
  TwoRoundChoice choice_;
  IntervalScheme scheme_;
  IntervalRound round1_;
  std::vector<PartialBits> res_;
  std::vector<std::int64_t> picked_;
  std::vector<IntervalCandidates> candidates_;  // round 2, index ell-1
  FastStats stats_;
};

// Protocol ids "alg4-logn" and, with boosting, "alg5-broadcast".
class LogRoundProtocol final : public SyncProtocol, public AdversaryHints {
 public:
  explicit LogRoundProtocol(bool boosting) : boosting_(boosting) {}
  std::string name() const override { return boosting_ ? "alg5-broadcast" : "alg4-logn"; }
  void setup(const SimConfig& cfg) override;
  void begin_round(std::int64_t round, const std::vector<const Envelope*>& shared) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override { return res_[static_cast<std::size_t>(p)]; }
  const AdversaryHints* hints() const override { return this; }
  const IntervalRound* interval_round(std::int64_t round) const override;

  std::int64_t phi() const { return phi_; }
  int top_level() const { return top_level_; }
  const FastStats& stats() const { return stats_; }

  struct BoostRecord {
    int level = 0;
    int iteration = 0;
    std::int64_t remaining = 0;  // |U| after the iteration
    std::int64_t intervals = 0;  // K_i
  };
  const std::vector<BoostRecord>& boost_log() const { return boost_log_; }
  // Label j(ell) per level, -1 when unlabeled.
  const std::vector<std::vector<int>>& labels() const { return labels_; }

 private:
  const IntervalScheme& scheme(int level) const { return schemes_[static_cast<std::size_t>(level)]; }
  std::vector<std::int64_t> children(int level, std::int64_t ell) const;
  void plan_round(std::int64_t round, const std::vector<const Envelope*>& shared);

  bool boosting_;
  SimConfig cfg_;
  std::int64_t phi_ = 0;
  int top_level_ = 0;
  std::vector<IntervalScheme> schemes_;
  std::vector<Rational> thresholds_;  // per level

  // Current round plan, identical for all honest peers.
  IntervalRound current_;
  // Boosting state of the level whose submissions are being evaluated.
  std::vector<std::int64_t> open_;
  std::vector<std::vector<int>> labels_;
  std::vector<std::vector<IntervalCandidates>> labeled_;  // per level, per interval
  std::vector<BoostRecord> boost_log_;
  int pending_level_ = -1;       // level of the previous round's submissions
  int pending_iteration_ = -1;   // -1 main step, else boosting step

  std::vector<PartialBits> res_;
  std::vector<std::int64_t> picked_;
  std::vector<BitString> built_;
  std::vector<std::uint8_t> ok_;
  FastStats stats_;
};

}  // namespace drsim
