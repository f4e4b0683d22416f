#include <gtest/gtest.h>

#include <cmath>

#include "drsim/adversaries.hpp"
#include "drsim/byz_download.hpp"
#include "drsim/source.hpp"
#include "drsim/sync_scheduler.hpp"

using namespace drsim;

namespace {

// n = 65536: lg n = 16, lg lg n = 4. gamma_k = 4096 gives rounds 4..8.
Alg1Params wide_params() { return derive_alg1_params(65536, 4096.0L, Rational(0)); }

PeerSet peers(int k, PeerId from, int count) {
  PeerSet s(k);
  for (int i = 0; i < count; ++i) s.insert(from + i);
  return s;
}

Envelope vote_from(PeerId p, std::uint8_t v) {
  Envelope e;
  e.sender = p;
  e.to_all = true;
  e.payload = std::make_shared<Alg1Vote>(v);
  return e;
}

}  // namespace

TEST(Alg1Params, RoundsAndFallback) {
  const Alg1Params p = wide_params();
  EXPECT_EQ(p.first_round, 4);
  EXPECT_EQ(p.last_round, 8);
  EXPECT_FALSE(p.fallback);
  // 2 * 64 = 128 <= 2^0 * 16^2 = 256.
  EXPECT_TRUE(derive_alg1_params(65536, 64.0L, Rational(0)).fallback);
  EXPECT_FALSE(derive_alg1_params(65536, 129.0L, Rational(0)).fallback);
  EXPECT_THROW(derive_alg1_params(1, 4.0L, Rational(0)), ConfigError);
}

TEST(Alg1Params, PjBoundExample) {
  const PjBounds b = check_pj_bounds(1024, 65536, 6);
  // 1 - (1023/1024)^64 evaluated exactly over the rationals.
  EXPECT_NEAR(b.pj, 0.06061562403818782, 1e-15);
  EXPECT_NEAR(b.lower, 0.060547, 5e-6);
  EXPECT_DOUBLE_EQ(b.upper, 0.0625);
  EXPECT_TRUE(b.holds);
}

TEST(Coins, LastRoundForcedWithoutRandomness) {
  const Alg1Params p = wide_params();
  std::vector<std::uint64_t> empty;
  TapeSource tape(empty);
  const CoinToss t = toss_query_coins(tape, p.last_round, p);
  EXPECT_TRUE(t.forced);
  EXPECT_TRUE(t.query());
  EXPECT_EQ(tape.consumed(), 0u);
  EXPECT_THROW(toss_query_coins(tape, p.last_round + 1, p), std::invalid_argument);
}

TEST(Coins, MeanHeadsIsTwoToJOverGammaK) {
  const Alg1Params p = wide_params();
  const int j = 7;  // 128 coins at 1/4096 each
  Stream s(8);
  StreamSource src(s);
  double sum = 0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) sum += static_cast<double>(toss_query_coins(src, j, p).heads);
  const double want = 128.0 / 4096.0;
  const double sigma = std::sqrt(128.0 * (1.0 / 4096) * (4095.0 / 4096) / samples);
  EXPECT_NEAR(sum / samples, want, 3 * sigma);
}

TEST(Alg1Step, GossipLearnsDecisiveMajority) {
  const Alg1Params p = wide_params();
  Alg1Peer peer(p, 1, 64, 65536);
  ASSERT_EQ(peer.coin_round_of(2), 5);  // threshold nu * 2^5 = 8
  peer.set_counts_for_test(peers(64, 10, 20), peers(64, 40, 3));
  std::vector<std::uint64_t> empty;
  TapeSource tape(empty);
  EXPECT_EQ(peer.act(2, tape), Alg1Peer::Step::kGossip);
  EXPECT_EQ(tape.consumed(), 0u);
  EXPECT_FALSE(peer.res().get(0));
  ASSERT_TRUE(peer.vote(2).has_value());
  EXPECT_FALSE(*peer.vote(2));
  EXPECT_FALSE(peer.records()[0].by_query);
}

TEST(Alg1Step, FirstRoundIgnoresCounts) {
  const Alg1Params p = wide_params();
  Alg1Peer peer(p, 1, 64, 65536);
  ASSERT_EQ(peer.coin_round_of(1), p.first_round);
  peer.set_counts_for_test(peers(64, 10, 40), PeerSet(64));
  std::vector<std::uint64_t> zero = {0};
  TapeSource tape(zero);
  EXPECT_EQ(peer.act(1, tape), Alg1Peer::Step::kIdle);  // tails, no gossip
  EXPECT_EQ(tape.consumed(), 1u);
}

TEST(Alg1Step, BothSidesAboveThresholdQueriesOnHeads) {
  const Alg1Params p = wide_params();
  std::vector<std::uint64_t> high = {~std::uint64_t{0}};
  std::vector<std::uint64_t> low = {0};
  Alg1Peer a(p, 1, 64, 65536), b(p, 1, 64, 65536);
  a.set_counts_for_test(peers(64, 10, 9), peers(64, 30, 9));
  b.set_counts_for_test(peers(64, 10, 9), peers(64, 30, 9));
  TapeSource heads(high), tails(low);
  EXPECT_EQ(a.act(2, heads), Alg1Peer::Step::kQuery);
  EXPECT_TRUE(a.records()[0].by_query);
  EXPECT_EQ(b.act(2, tails), Alg1Peer::Step::kIdle);
}

TEST(Alg1Step, LastRoundAlwaysLearns) {
  const Alg1Params p = wide_params();
  Alg1Peer peer(p, 1, 64, 65536);
  const std::int64_t last = p.epoch_length();
  ASSERT_EQ(peer.coin_round_of(last), p.last_round);
  std::vector<std::uint64_t> empty;
  TapeSource tape(empty);
  EXPECT_EQ(peer.act(last, tape), Alg1Peer::Step::kQuery);
}

TEST(Alg1Step, ContradictoryVotesBlacklist) {
  const Alg1Params p = wide_params();
  Alg1Peer peer(p, 1, 8, 65536);
  VoteDigest d1(8);
  d1.add(vote_from(3, 0));
  d1.add(vote_from(4, 1));
  d1.add(vote_from(5, 7));  // malformed
  peer.ingest(2, d1);
  EXPECT_TRUE(peer.blacklist().contains(5));
  EXPECT_EQ(peer.count(false), 1);
  EXPECT_EQ(peer.count(true), 1);
  VoteDigest d2(8);
  d2.add(vote_from(3, 1));  // flips within the epoch
  peer.ingest(3, d2);
  EXPECT_TRUE(peer.blacklist().contains(3));
  EXPECT_FALSE(peer.blacklist().contains(4));
  EXPECT_EQ(peer.count(false), 0);
  EXPECT_EQ(peer.count(true), 1);
}

// Honest runs and a contrarian minority both leave every honest output
// correct, and honest peers never land in a blacklist.
TEST(Alg1Run, ContrarianDoesNotBreakCorrectness) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig cfg;
    cfg.n = 256;
    cfg.k = 256;
    cfg.beta = Rational(1, 4);
    cfg.mode = CommMode::kBroadcast;
    cfg.seed = seed;
    cfg.adversary = "contrarian";
    const FaultPlan plan = make_fault_plan(cfg);
    Alg1Protocol proto;
    const RunResult r = run_sync(cfg, random_input(cfg.n, seed), proto, plan);
    EXPECT_TRUE(r.metrics.correct);
    for (PeerId p = 1; p <= cfg.k; ++p) {
      if (!r.honest[static_cast<std::size_t>(p)]) continue;
      for (PeerId q : proto.peer(p).blacklist().members()) EXPECT_FALSE(r.honest[static_cast<std::size_t>(q)]);
    }
  }
}
