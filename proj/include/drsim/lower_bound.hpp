#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "drsim/fault_plan.hpp"
#include "drsim/rational.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

using ExactRational = boost::multiprecision::cpp_rational;

// p[v][i]: probability that peer v (row v-1) does not query bit i (column i-1)
// in a one-round protocol.
struct SkipProfile {
  std::vector<std::vector<Rational>> p;
};

struct TargetIndex {
  std::int64_t index = 0;           // 1-based
  std::vector<ExactRational> q;     // q(i) = prod_v (1 - p[v][i]), index i-1
};

// Throws std::invalid_argument on an empty or ragged profile, or when some
// row sums to less than 1 (the protocol could query every bit).
TargetIndex compute_target_index(const SkipProfile& profile);

// One-round download: every peer skips `skips` uniformly random bits,
// queries the rest and broadcasts them. In round 2 each skipped bit is set
// by majority over the reports that carry it (ties go to 0).
class OneRoundSkip final : public SyncProtocol {
 public:
  explicit OneRoundSkip(int skips = 1) : skips_(skips) {}
  std::string name() const override { return "one-round-skip"; }
  void setup(const SimConfig& cfg) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext& ctx) override;
  Output output(PeerId p) const override { return res_[static_cast<std::size_t>(p)]; }

  SkipProfile profile(std::int64_t n, int k) const;
  // Skipped indices (1-based) as drawn from a peer stream.
  std::vector<std::int64_t> draw_skips(Stream& rng, std::int64_t n) const;
  // Payload a peer with these skips broadcasts for input x.
  PayloadPtr report(const BitString& x, const std::vector<std::int64_t>& skips) const;
  const std::vector<std::int64_t>& skips_of(PeerId p) const { return skipped_[static_cast<std::size_t>(p)]; }
  // Received reports in round 2, as sorted content strings.
  const std::vector<std::string>& received(PeerId p) const { return received_[static_cast<std::size_t>(p)]; }

 private:
  int skips_;
  SimConfig cfg_;
  std::vector<PartialBits> res_;
  std::vector<std::vector<std::int64_t>> skipped_;
  std::vector<std::vector<std::string>> received_;
};

// Corrupt peers run the honest protocol, with their own random streams, on
// the input with bit `flip` inverted.
class MirrorBehavior final : public ByzantineBehavior {
 public:
  MirrorBehavior(const OneRoundSkip& protocol, std::int64_t flip) : protocol_(protocol), flip_(flip) {}
  std::string name() const override { return "mirror"; }
  void act(const ByzView& view, ByzOutbox& out) override;

 private:
  const OneRoundSkip& protocol_;
  std::int64_t flip_;
};

struct MirrorResult {
  std::int64_t target = 0;
  std::int64_t trials = 0;
  std::int64_t fail0 = 0;  // failures on X_0
  std::int64_t fail1 = 0;  // failures on X_1
  double worse() const;
};

// Precondition errors: k even or < 3, trials <= 0, protocol outside the
// one-skip class.
MirrorResult mirror_attack(int k, std::int64_t n, std::int64_t trials, std::uint64_t seed, int skips = 1);

// Replays EX(X_0, Byz, R) and EX(X_1, Byz^inv, R) for one seed and reports
// whether the defective peer received the same multiset of reports. Returns
// nullopt when the profile drawn for `seed` has no defective peer outside Byz.
struct ReplayOutcome {
  PeerId defective = 0;
  bool same_messages = false;
  bool fails_one = false;  // at least one of the two executions failed
};
std::optional<ReplayOutcome> mirror_replay(int k, std::int64_t n, std::uint64_t seed);

}  // namespace drsim
