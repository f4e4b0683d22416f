#include <gtest/gtest.h>

#include "drsim/adversaries.hpp"
#include "drsim/async_scheduler.hpp"
#include "drsim/crash_async.hpp"
#include "drsim/source.hpp"

using namespace drsim;

namespace {

SimConfig async_config(std::int64_t n, int k, int f, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.beta = Rational(std::max(f, 1), k);
  cfg.timing = Timing::kAsync;
  cfg.seed = seed;
  cfg.constants["f"] = Rational(f);
  return cfg;
}

FaultPlan silent_plan(const std::vector<PeerId>& who, std::uint64_t seed) {
  FaultPlan plan;
  plan.kind = FaultKind::kCrash;
  plan.budget = static_cast<int>(who.size());
  plan.async_crashes = silent_async_crashes(who);
  plan.delays = std::make_shared<RandomDelay>(seed);
  return plan;
}

}  // namespace

TEST(SingleCrash, SilentCrashTriggersReassignment) {
  for (PeerId dead = 1; dead <= 4; ++dead) {
    const SimConfig cfg = async_config(12, 4, 1, dead);
    SingleCrashDownload proto;
    const RunResult r = run_async(cfg, random_input(12, dead), proto, silent_plan({dead}, dead));
    EXPECT_TRUE(r.metrics.correct);
    EXPECT_EQ(r.metrics.q_max, 4);  // 12/4 + ceil(12/12)
    EXPECT_GT(proto.reassignments(), 0);
  }
}

TEST(SingleCrash, PartialSendStillConverges) {
  for (std::int64_t act = 0; act <= 6; ++act) {
    for (unsigned mask = 0; mask < 8; ++mask) {
      FaultPlan plan;
      plan.kind = FaultKind::kCrash;
      plan.budget = 1;
      AsyncCrashPoint c;
      c.activation = act;
      for (PeerId q = 2; q <= 4; ++q) {
        if ((mask >> (q - 2)) & 1u) c.delivered.push_back(q);
      }
      plan.async_crashes[1] = c;
      plan.delays = std::make_shared<RandomDelay>(mask * 31 + static_cast<std::uint64_t>(act));
      SingleCrashDownload proto;
      const RunResult r = run_async(async_config(12, 4, 1, mask), random_input(12, mask), proto, plan);
      ASSERT_TRUE(r.metrics.correct) << "activation " << act << " mask " << mask;
      ASSERT_LE(r.metrics.q_max, 4);
    }
  }
}

TEST(PhaseCap, SmallestPowerCoveringN) {
  EXPECT_EQ(fcrash_phase_cap(64, 8, 2), 3);   // 4^3 = 64
  EXPECT_EQ(fcrash_phase_cap(65, 8, 2), 4);
  EXPECT_EQ(fcrash_phase_cap(100, 8, 0), 1);
}

TEST(NestedOwners, EvenNestedBlocks) {
  const std::int64_t n = 64;
  const int k = 4;
  const auto owners = nested_owners(n, k, 4);
  ASSERT_EQ(owners.size(), 4u);
  for (std::int64_t x = 0; x < n; ++x) {
    EXPECT_EQ(owners[0][static_cast<std::size_t>(x)], spread_owner(x, n, k));
    // With n = k^3, level l blocks have width n / k^(l+1).
    std::int64_t width = n / k;
    for (int level = 0; level < 3; ++level) {
      EXPECT_EQ(owners[static_cast<std::size_t>(level)][static_cast<std::size_t>(x)], (x / width) % k + 1);
      width /= k;
    }
    const PeerId last = owners[3][static_cast<std::size_t>(x)];
    EXPECT_GE(last, 1);
    EXPECT_LE(last, k);
  }
  EXPECT_EQ(nested_owners(n, k, 4), owners);
}

TEST(NestedOwners, PiecesDifferByAtMostOne) {
  const std::int64_t n = 1000;
  const int k = 7;
  const auto owners = nested_owners(n, k, 3);
  // Within every level-0 block, level-1 owners split it evenly.
  for (PeerId block = 1; block <= k; ++block) {
    std::vector<std::int64_t> count(static_cast<std::size_t>(k) + 1, 0);
    for (std::int64_t x = 0; x < n; ++x) {
      if (owners[0][static_cast<std::size_t>(x)] == block) ++count[static_cast<std::size_t>(owners[1][static_cast<std::size_t>(x)])];
    }
    const auto [lo, hi] = std::minmax_element(count.begin() + 1, count.end());
    EXPECT_LE(*hi - *lo, 1);
  }
}

TEST(FCrash, HonestRunFinishesInPhaseZero) {
  const SimConfig cfg = async_config(64, 8, 2, 1);
  FCrashDownload proto;
  FaultPlan plan;
  plan.delays = std::make_shared<UnitDelay>();
  const RunResult r = run_async(cfg, random_input(64, 1), proto, plan);
  EXPECT_TRUE(r.metrics.correct);
  EXPECT_EQ(r.metrics.q_max, 8);
  for (PeerId p = 1; p <= 8; ++p) EXPECT_EQ(proto.state(p).phase, 0);
}

TEST(FCrash, SilentCrashesAgreeOnOwners) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const SimConfig cfg = async_config(64, 8, 2, seed);
    Stream rng(seed);
    const auto dead = sample_peers(8, 2, rng);
    FCrashDownload on(true), off(false);
    on.set_audit(true);
    const BitString x = random_input(64, seed);
    const RunResult a = run_async(cfg, x, on, silent_plan(dead, seed));
    const RunResult b = run_async(cfg, x, off, silent_plan(dead, seed));
    EXPECT_TRUE(a.metrics.correct);
    EXPECT_TRUE(b.metrics.correct);
    EXPECT_EQ(on.assignment_conflicts(a.honest), 0);
    EXPECT_LE(a.metrics.t, b.metrics.t);
    for (PeerId p = 1; p <= 8; ++p) {
      if (a.honest[static_cast<std::size_t>(p)]) {
        EXPECT_EQ(a.outputs[static_cast<std::size_t>(p)].values, b.outputs[static_cast<std::size_t>(p)].values);
      }
    }
  }
}

TEST(FCrash, SlowPeerDoesNotBlockWithUnblocking) {
  const SimConfig cfg = async_config(64, 8, 2, 5);
  FaultPlan plan;
  plan.kind = FaultKind::kAsyncDelay;
  plan.delays = std::make_shared<SlowSetDelay>(std::vector<PeerId>{3, 6}, kTicksPerUnit / 64);
  FCrashDownload on(true), off(false);
  const BitString x = random_input(64, 5);
  const RunResult a = run_async(cfg, x, on, plan);
  const RunResult b = run_async(cfg, x, off, plan);
  EXPECT_TRUE(a.metrics.correct);
  EXPECT_TRUE(b.metrics.correct);
  EXPECT_LE(a.metrics.t, b.metrics.t);
}
