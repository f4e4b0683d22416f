#include <gtest/gtest.h>

#include "drsim/adversaries.hpp"
#include "drsim/crash_sync.hpp"
#include "drsim/source.hpp"
#include "drsim/sync_scheduler.hpp"

using namespace drsim;

namespace {

SimConfig crash_config(std::int64_t n, int k, int f, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.beta = Rational(f, k);
  cfg.mode = CommMode::kPointToPoint;
  cfg.seed = seed;
  cfg.constants["f"] = Rational(f);
  return cfg;
}

FaultPlan crash_plan(int f, std::map<PeerId, CrashPoint> crashes) {
  FaultPlan plan;
  plan.kind = FaultKind::kCrash;
  plan.budget = f;
  plan.crashes = std::move(crashes);
  return plan;
}

}  // namespace

TEST(StaticDownload, HonestViewsAdvanceOneBitEach) {
  const SimConfig cfg = crash_config(8, 4, 2, 1);
  StaticDownload proto;
  StaticAudit audit;
  const RunResult r = run_sync(cfg, random_input(8, 1), proto, crash_plan(2, {}), static_checker(proto, audit, true));
  EXPECT_TRUE(r.metrics.correct);
  ASSERT_EQ(proto.views().size(), 8u);
  for (std::size_t v = 0; v < proto.views().size(); ++v) {
    const ViewRecord& rec = proto.views()[v];
    EXPECT_EQ(rec.index, static_cast<std::int64_t>(v) + 1);
    EXPECT_EQ(rec.leader, view_leader(rec.view, 4));
    EXPECT_TRUE(rec.good);
  }
  EXPECT_EQ(r.metrics.q_max, 2);  // n / k
  EXPECT_EQ(audit.disagreements, 0);
  EXPECT_EQ(audit.unjustified, 0);
}

TEST(StaticDownload, SilentLeaderIsSuspectedByAll) {
  const SimConfig cfg = crash_config(8, 4, 2, 2);
  StaticDownload proto;
  StaticAudit audit;
  const RunResult r = run_sync(cfg, random_input(8, 2), proto, crash_plan(2, {{1, CrashPoint{1, Subround::kQuery, {}}}}),
                               static_checker(proto, audit, true));
  EXPECT_TRUE(r.metrics.correct);
  EXPECT_FALSE(proto.views().front().good);
  for (PeerId p = 2; p <= 4; ++p) EXPECT_TRUE(proto.state(p).suspected_crashed[1]);
  EXPECT_EQ(audit.unjustified, 0);
}

// Every crash cut of one relay to a subset of peers keeps honest peers in
// lockstep (k = 4, f = 2, crashes in the first view).
TEST(StaticDownload, PartialRelaysKeepPeersInSync) {
  for (Subround sub : {Subround::kQuery, Subround::kResponse, Subround::kMessage}) {
    for (std::int64_t round = 1; round <= 3; ++round) {
      for (unsigned mask = 0; mask < 8; ++mask) {
        std::vector<PeerId> delivered;
        for (PeerId q = 2; q <= 4; ++q) {
          if ((mask >> (q - 2)) & 1u) delivered.push_back(q);
        }
        const SimConfig cfg = crash_config(8, 4, 2, mask);
        StaticDownload proto;
        StaticAudit audit;
        const RunResult r = run_sync(cfg, random_input(8, mask), proto,
                                     crash_plan(2, {{1, CrashPoint{round, sub, delivered}}}),
                                     static_checker(proto, audit, true));
        ASSERT_TRUE(r.metrics.correct);
        ASSERT_EQ(audit.disagreements, 0);
        ASSERT_EQ(audit.unjustified, 0);
      }
    }
  }
}

TEST(RapidDownload, HonestRun) {
  const SimConfig cfg = crash_config(32, 4, 1, 3);
  RapidDownload proto;
  RapidAudit audit;
  const BitString x = random_input(32, 3);
  const RunResult r = run_sync(cfg, x, proto, crash_plan(1, {}), rapid_checker(proto, x, audit));
  EXPECT_TRUE(r.metrics.correct);
  EXPECT_EQ(r.metrics.q_max, 8);
  EXPECT_EQ(audit.prefix_violations, 0);
  EXPECT_EQ(audit.unjustified, 0);
  EXPECT_LE(audit.max_spread, 1);
  for (PeerId p = 1; p <= 4; ++p) {
    for (bool s : proto.state(p).suspected_crashed) EXPECT_FALSE(s);
  }
}

TEST(RapidDownload, SplitSecondMessageStaggersViewChange) {
  const SimConfig cfg = crash_config(16, 4, 1, 4);
  RapidDownload proto;
  RapidAudit audit;
  const BitString x = random_input(16, 4);
  const RunResult r = run_sync(cfg, x, proto, crash_plan(1, {{1, CrashPoint{2, Subround::kMessage, {2}}}}),
                               rapid_checker(proto, x, audit));
  EXPECT_TRUE(r.metrics.correct);
  EXPECT_EQ(audit.prefix_violations, 0);
  // The next leader hears about bit 1 and bit 2 and continues from the larger.
  bool mixed = false;
  for (const auto& a : proto.arrivals()) {
    if (a.view == 2 && a.indices.size() > 1) {
      mixed = true;
      EXPECT_EQ(a.indices.front(), 1);
      EXPECT_EQ(a.indices.back(), 2);
    }
  }
  EXPECT_TRUE(mixed);
}

TEST(RapidDownload, RandomCrashesStayCorrect) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SimConfig cfg = crash_config(64, 8, 3, seed);
    Stream rng(seed);
    RapidDownload proto;
    RapidAudit audit;
    const BitString x = random_input(64, seed);
    const RunResult r =
        run_sync(cfg, x, proto, crash_plan(3, random_crashes(8, 3, 200, rng)), rapid_checker(proto, x, audit));
    EXPECT_TRUE(r.metrics.correct) << "seed " << seed;
    EXPECT_EQ(audit.prefix_violations, 0);
    EXPECT_EQ(audit.unjustified, 0);
  }
}
