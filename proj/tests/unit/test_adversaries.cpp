#include <gtest/gtest.h>

#include <set>

#include "drsim/adversaries.hpp"
#include "drsim/byz_download.hpp"
#include "drsim/fast_download.hpp"
#include "drsim/lower_bound.hpp"
#include "drsim/sifting.hpp"
#include "drsim/sync_scheduler.hpp"

using namespace drsim;

namespace {

// Protocol stub that only exposes hints.
class HintsOnly final : public SyncProtocol, public AdversaryHints {
 public:
  std::string name() const override { return "hints"; }
  void setup(const SimConfig&) override {}
  void on_query(SyncContext&) override {}
  void on_message(SyncContext&) override {}
  Output output(PeerId) const override { return PartialBits(); }
  const AdversaryHints* hints() const override { return this; }
  std::optional<std::int64_t> vote_index(std::int64_t round) const override { return (round + 1) / 2; }
  const IntervalRound* interval_round(std::int64_t) const override { return &ir; }
  IntervalRound ir;
};

struct Harness {
  SimConfig cfg;
  BitString truth;
  PeerSet corrupt;
  HintsOnly proto;
  Stream rng{1};

  Harness(int k, const std::vector<PeerId>& bad, BitString x) : truth(std::move(x)), corrupt(k) {
    cfg.k = k;
    cfg.n = static_cast<std::int64_t>(truth.width());
    cfg.mode = CommMode::kBroadcast;
    for (PeerId p : bad) corrupt.insert(p);
  }
  std::vector<Envelope> act(ByzantineBehavior& b, std::int64_t round) {
    ByzView view;
    view.round = round;
    view.config = &cfg;
    view.corrupt = &corrupt;
    view.corrupt_list = corrupt.members();
    view.truth = &truth;
    view.protocol = &proto;
    view.rng = &rng;
    ByzOutbox out(corrupt, cfg.mode, round);
    b.act(view, out);
    return out.envelopes();
  }
};

}  // namespace

TEST(Contrarian, VotesAgainstTruthOncePerBit) {
  Harness h(8, {2, 4, 5, 7, 8}, BitString::from_string("0110"));
  ContrarianVotes strat;
  const auto first = h.act(strat, 1);  // bit 1, truth 0
  ASSERT_EQ(first.size(), 5u);
  for (const auto& e : first) {
    EXPECT_TRUE(e.to_all);
    EXPECT_EQ(e.payload->tag, Alg1Vote::kTag);
    EXPECT_EQ(static_cast<const Alg1Vote&>(*e.payload).value, 1);
  }
  // Round 2 still concerns bit 1: no second vote.
  EXPECT_TRUE(h.act(strat, 2).empty());
  const auto third = h.act(strat, 3);  // bit 2, truth 1
  ASSERT_EQ(third.size(), 5u);
  EXPECT_EQ(static_cast<const Alg1Vote&>(*third[0].payload).value, 0);
}

TEST(Contrarian, NoCorruptPeersNoMessages) {
  Harness h(8, {}, BitString::from_string("0110"));
  ContrarianVotes strat;
  EXPECT_TRUE(h.act(strat, 1).empty());
}

TEST(IntervalFlood, CopiesOfOneWrongString) {
  Harness h(16, {1, 2, 3, 4, 5, 6, 7, 8}, BitString::from_string("01100011"));
  h.proto.ir.scheme = IntervalScheme::make(8, 4);
  h.proto.ir.open = {1, 2};
  h.proto.ir.threshold = Rational(4);
  IntervalFlood strat(1, 1);
  const auto env = h.act(strat, 1);
  ASSERT_EQ(env.size(), 8u);
  std::set<std::string> strings;
  for (const auto& e : env) {
    const auto& s = static_cast<const SubmissionPayload&>(*e.payload);
    EXPECT_EQ(s.interval, 1);
    strings.insert(s.value.to_string());
  }
  ASSERT_EQ(strings.size(), 1u);
  EXPECT_NE(*strings.begin(), "0110");

  // With 8 honest copies of the truth: threshold 10 drops the fabricated
  // string; threshold 4 keeps it and the tree gains a node.
  std::vector<Submission> subs;
  for (PeerId p = 9; p <= 16; ++p) subs.push_back({p, 1, BitString::from_string("0110")});
  for (const auto& e : env) subs.push_back({e.sender, 1, static_cast<const SubmissionPayload&>(*e.payload).value});
  EXPECT_TRUE(frequent_strings(subs, 1, Rational(10)).empty());
  const auto fs = frequent_strings(subs, 1, Rational(4));
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(build_decision_tree(fs).internal_count(), 1u);
}

TEST(IntervalFlood, VariantsAreDistinctAndWrong) {
  const BitString truth = BitString::from_string("101100");
  std::set<BitString> seen;
  for (int v = 0; v < 6; ++v) {
    const BitString s = IntervalFlood::variant(truth, v);
    EXPECT_NE(s, truth);
    seen.insert(s);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Schedules, RespectBudget) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fixed = fixed_corruption(20, 5, seed);
    const auto dyn = dynamic_corruption(20, 5, seed);
    EXPECT_EQ(fixed(1), fixed(7));
    for (std::int64_t r = 1; r <= 10; ++r) {
      const auto set = dyn(r);
      EXPECT_EQ(set.size(), 5u);
      EXPECT_TRUE(std::is_sorted(set.begin(), set.end()));
      EXPECT_EQ(std::set<PeerId>(set.begin(), set.end()).size(), 5u);
      for (PeerId p : set) {
        EXPECT_GE(p, 1);
        EXPECT_LE(p, 20);
      }
    }
    Stream rng(seed);
    const auto crashes = random_crashes(10, 3, 50, rng);
    EXPECT_EQ(crashes.size(), 3u);
    for (const auto& [p, c] : crashes) {
      EXPECT_GE(c.round, 1);
      EXPECT_LE(c.round, 50);
      EXPECT_EQ(std::count(c.delivered.begin(), c.delivered.end(), p), 0);
    }
  }
}

TEST(FaultPlanFactory, RejectsOverBudget) {
  SimConfig cfg;
  cfg.n = 16;
  cfg.k = 8;
  cfg.beta = Rational(1, 4);
  cfg.adversary = "crash";
  EXPECT_THROW(make_fault_plan(cfg, {{"f", 3}}), ConfigError);
  EXPECT_EQ(make_fault_plan(cfg, {{"f", 2}}).budget, 2);
  cfg.adversary = "bogus";
  EXPECT_THROW(make_fault_plan(cfg), ConfigError);
}

TEST(Delays, StayValidAndOrderIndependent) {
  RandomDelay a(5), b(5);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    DelayQuery q;
    q.sender = static_cast<PeerId>(1 + i % 7);
    q.recipient = static_cast<PeerId>(1 + i % 5);
    q.link_index = i / 35;
    q.seq = i;
    const Ticks d = a.delay(q);
    EXPECT_GE(d, 1);
    EXPECT_LE(d, kTicksPerUnit);
    q.seq = 99999 - i;  // arrival order does not matter
    EXPECT_EQ(b.delay(q), d);
  }
  SlowSetDelay slow({3}, 10);
  EXPECT_EQ(slow.delay({3, 1}), kTicksPerUnit);
  EXPECT_EQ(slow.delay({1, 3}), kTicksPerUnit);
  EXPECT_EQ(slow.delay({1, 2}), 10);
}

TEST(CrashCut, FullAndEmptyPrefix) {
  Envelope e;
  e.sender = 1;
  e.recipients = {2, 3, 4};
  const auto full = crash_cut({e}, {2, 3, 4});
  ASSERT_EQ(full.size(), 1u);
  EXPECT_EQ(full[0].recipients, e.recipients);
  EXPECT_TRUE(crash_cut({e}, {}).empty());
}

TEST(TargetIndex, UniformProfile) {
  SkipProfile prof;
  prof.p.assign(4, std::vector<Rational>(4, Rational(1, 4)));
  const TargetIndex t = compute_target_index(prof);
  EXPECT_EQ(t.index, 1);
  for (const auto& q : t.q) EXPECT_EQ(q, ExactRational(81, 256));
}

TEST(TargetIndex, CertainSkipWins) {
  SkipProfile prof;
  prof.p.assign(4, std::vector<Rational>(4, Rational(1, 4)));
  prof.p[0] = {Rational(0), Rational(1), Rational(0), Rational(0)};
  EXPECT_EQ(compute_target_index(prof).index, 2);
  SkipProfile one;
  one.p = {{Rational(1)}};
  EXPECT_EQ(compute_target_index(one).index, 1);
  EXPECT_THROW(compute_target_index(SkipProfile{}), std::invalid_argument);
}

TEST(Mirror, Preconditions) {
  EXPECT_THROW(mirror_attack(6, 7, 10, 1), ConfigError);
  EXPECT_THROW(mirror_attack(7, 7, 0, 1), ConfigError);
  EXPECT_THROW(mirror_attack(7, 7, 10, 1, 0), ConfigError);  // queries everything
}

TEST(Mirror, ReplayGivesDefectivePeerSameMessages) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40 && checked < 10; ++seed) {
    const auto out = mirror_replay(7, 7, seed);
    if (!out) continue;
    ++checked;
    EXPECT_TRUE(out->same_messages);
    EXPECT_TRUE(out->fails_one);
  }
  EXPECT_GT(checked, 0);
}
