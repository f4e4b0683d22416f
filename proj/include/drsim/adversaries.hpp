#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/fault_plan.hpp"
#include "drsim/model.hpp"
#include "drsim/rng.hpp"

namespace drsim {

// Each corrupt peer votes against the true bit once per epoch, in the
// epoch's first round. Needs a protocol exposing vote hints.
class ContrarianVotes final : public ByzantineBehavior {
 public:
  std::string name() const override { return "contrarian"; }
  void act(const ByzView& view, ByzOutbox& out) override;

 private:
  std::map<PeerId, std::int64_t> voted_for_;  // peer -> bit index last voted on
};

// All corrupt peers submit fabricated strings for one interval. Variant 0 is
// the complement of the truth on that interval; variant v >= 1 additionally
// flips bit v-1. Corrupt peers are spread round-robin over the variants.
class IntervalFlood final : public ByzantineBehavior {
 public:
  // variants <= 0 selects |corrupt| / ceil(threshold) each round.
  IntervalFlood(std::int64_t target, int variants) : target_(target), variants_(variants) {}
  std::string name() const override { return "flood"; }
  void act(const ByzView& view, ByzOutbox& out) override;

  static BitString variant(const BitString& truth_slice, int v);

 private:
  std::int64_t target_;
  int variants_;
};

// Corruption schedules. Both draw from a stream seeded by `seed`.
std::function<std::vector<PeerId>(std::int64_t)> fixed_corruption(int k, int count, std::uint64_t seed);
std::function<std::vector<PeerId>(std::int64_t)> dynamic_corruption(int k, int count, std::uint64_t seed);

// Sorted sample of `count` distinct ids from 1..k.
std::vector<PeerId> sample_peers(int k, int count, Stream& rng);

// `f` random sync crashes with rounds in [1, horizon], random sub-rounds and
// random delivered subsets.
std::map<PeerId, CrashPoint> random_crashes(int k, int f, std::int64_t horizon, Stream& rng);
// `f` peers crashing before doing anything.
std::map<PeerId, CrashPoint> silent_crashes(const std::vector<PeerId>& who);
std::map<PeerId, AsyncCrashPoint> silent_async_crashes(const std::vector<PeerId>& who);
std::map<PeerId, AsyncCrashPoint> random_async_crashes(int k, int f, std::int64_t max_activation, Stream& rng);

class UnitDelay final : public DelayPolicy {
 public:
  std::string name() const override { return "unit"; }
  Ticks delay(const DelayQuery&) override { return kTicksPerUnit; }
};

// Delay is a hash of the message identity, so it does not depend on
// execution order.
class RandomDelay final : public DelayPolicy {
 public:
  explicit RandomDelay(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  Ticks delay(const DelayQuery& q) override;

 private:
  std::uint64_t seed_;
};

// Messages from or to `slow` peers take the full unit; the rest are fast.
class SlowSetDelay final : public DelayPolicy {
 public:
  SlowSetDelay(std::vector<PeerId> slow, Ticks fast) : slow_(std::move(slow)), fast_(fast) {}
  std::string name() const override { return "slow"; }
  Ticks delay(const DelayQuery& q) override;

 private:
  std::vector<PeerId> slow_;
  Ticks fast_;
};

// Builds the plan named by cfg.adversary. `params` holds optional knobs:
//   f, dynamic, target, variants ("auto" or integer), crash ("silent" or
//   "random"), delay ("unit", "random", "slow"), slow (peer list), horizon.
FaultPlan make_fault_plan(const SimConfig& cfg, const nlohmann::json& params = nlohmann::json::object());
bool known_adversary(const std::string& id);

}  // namespace drsim
