#include "drsim/adversaries.hpp"

#include <algorithm>
#include <numeric>

#include "drsim/byz_download.hpp"
#include "drsim/fast_download.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

void ContrarianVotes::act(const ByzView& view, ByzOutbox& out) {
  const AdversaryHints* hints = view.protocol ? view.protocol->hints() : nullptr;
  if (hints == nullptr) return;
  const auto index = hints->vote_index(view.round);
  if (!index) return;
  const bool truth = view.truth->get(static_cast<std::size_t>(*index - 1));
  auto vote = std::make_shared<Alg1Vote>(truth ? 0 : 1);
  for (const PeerId p : view.corrupt_list) {
    auto it = voted_for_.find(p);
    if (it != voted_for_.end() && it->second == *index) continue;
    voted_for_[p] = *index;
    out.broadcast(p, vote);
  }
}

BitString IntervalFlood::variant(const BitString& truth_slice, int v) {
  BitString s = truth_slice.complement();
  if (v >= 1) {
    const auto b = static_cast<std::size_t>(v - 1) % s.width();
    s.set(b, !s.get(b));
  }
  return s;
}

void IntervalFlood::act(const ByzView& view, ByzOutbox& out) {
  const AdversaryHints* hints = view.protocol ? view.protocol->hints() : nullptr;
  if (hints == nullptr || view.corrupt_list.empty()) return;
  const IntervalRound* ir = hints->interval_round(view.round);
  if (ir == nullptr || ir->open.empty()) return;
  std::int64_t ell = ir->open.front();
  if (std::find(ir->open.begin(), ir->open.end(), target_) != ir->open.end()) {
    ell = target_;
  } else if (target_ >= 1) {
    ell = ir->open[static_cast<std::size_t>(target_ - 1) % ir->open.size()];
  }
  const std::int64_t width = ir->scheme.width(ell);
  const BitString truth =
      view.truth->slice(static_cast<std::size_t>(ir->scheme.first(ell) - 1), static_cast<std::size_t>(width));
  const auto corrupt = static_cast<std::int64_t>(view.corrupt_list.size());
  std::int64_t count = variants_;
  if (count <= 0) count = corrupt / std::max<std::int64_t>(1, ceil_of(ir->threshold));
  // Distinct strings that all differ from the truth.
  count = std::clamp<std::int64_t>(count, 1, std::max<std::int64_t>(1, width));
  std::vector<PayloadPtr> payloads;
  payloads.reserve(static_cast<std::size_t>(count));
  for (std::int64_t v = 0; v < count; ++v) {
    payloads.push_back(std::make_shared<SubmissionPayload>(ell, ir->level, variant(truth, static_cast<int>(v))));
  }
  for (std::size_t i = 0; i < view.corrupt_list.size(); ++i) {
    out.broadcast(view.corrupt_list[i], payloads[i % payloads.size()]);
  }
}

std::vector<PeerId> sample_peers(int k, int count, Stream& rng) {
  count = std::clamp(count, 0, k);
  std::vector<PeerId> ids(static_cast<std::size_t>(k));
  std::iota(ids.begin(), ids.end(), 1);
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(rng.between(i, k - 1));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::function<std::vector<PeerId>(std::int64_t)> fixed_corruption(int k, int count, std::uint64_t seed) {
  Stream rng(seed);
  auto set = std::make_shared<const std::vector<PeerId>>(sample_peers(k, count, rng));
  return [set](std::int64_t) { return *set; };
}

std::function<std::vector<PeerId>(std::int64_t)> dynamic_corruption(int k, int count, std::uint64_t seed) {
  return [k, count, seed](std::int64_t round) {
    Stream rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
    return sample_peers(k, count, rng);
  };
}

std::map<PeerId, CrashPoint> random_crashes(int k, int f, std::int64_t horizon, Stream& rng) {
  std::map<PeerId, CrashPoint> out;
  for (const PeerId p : sample_peers(k, f, rng)) {
    CrashPoint c;
    c.round = rng.between(1, std::max<std::int64_t>(1, horizon));
    c.subround = static_cast<Subround>(rng.below(3));
    for (PeerId q = 1; q <= k; ++q) {
      if (q != p && rng.below(2) == 1) c.delivered.push_back(q);
    }
    out.emplace(p, std::move(c));
  }
  return out;
}

std::map<PeerId, CrashPoint> silent_crashes(const std::vector<PeerId>& who) {
  std::map<PeerId, CrashPoint> out;
  for (const PeerId p : who) out.emplace(p, CrashPoint{1, Subround::kQuery, {}});
  return out;
}

std::map<PeerId, AsyncCrashPoint> silent_async_crashes(const std::vector<PeerId>& who) {
  std::map<PeerId, AsyncCrashPoint> out;
  for (const PeerId p : who) out.emplace(p, AsyncCrashPoint{0, {}});
  return out;
}

std::map<PeerId, AsyncCrashPoint> random_async_crashes(int k, int f, std::int64_t max_activation, Stream& rng) {
  std::map<PeerId, AsyncCrashPoint> out;
  for (const PeerId p : sample_peers(k, f, rng)) {
    AsyncCrashPoint c;
    c.activation = rng.between(0, std::max<std::int64_t>(0, max_activation));
    for (PeerId q = 1; q <= k; ++q) {
      if (q != p && rng.below(2) == 1) c.delivered.push_back(q);
    }
    out.emplace(p, std::move(c));
  }
  return out;
}

Ticks RandomDelay::delay(const DelayQuery& q) {
  std::uint64_t state = seed_;
  state ^= derive_seed(static_cast<std::uint64_t>(q.sender) << 32 | static_cast<std::uint32_t>(q.recipient),
                       q.link_index);
  const std::uint64_t h = splitmix64(state);
  return 1 + static_cast<Ticks>(h % static_cast<std::uint64_t>(kTicksPerUnit));
}

Ticks SlowSetDelay::delay(const DelayQuery& q) {
  const bool slow = std::find(slow_.begin(), slow_.end(), q.sender) != slow_.end() ||
                    std::find(slow_.begin(), slow_.end(), q.recipient) != slow_.end();
  return slow ? kTicksPerUnit : fast_;
}

namespace {

const std::vector<std::string>& adversary_ids() {
  static const std::vector<std::string> ids{"none", "contrarian", "flood", "silent-byzantine", "crash", "delay"};
  return ids;
}

class SilentByzantine final : public ByzantineBehavior {
 public:
  std::string name() const override { return "silent-byzantine"; }
  void act(const ByzView&, ByzOutbox&) override {}
};

std::shared_ptr<DelayPolicy> make_delay(const SimConfig& cfg, const nlohmann::json& params, Stream& rng) {
  const std::string kind = params.value("delay", std::string("unit"));
  if (kind == "unit") return std::make_shared<UnitDelay>();
  if (kind == "random") return std::make_shared<RandomDelay>(derive_seed(adversary_seed(cfg.seed), label_tag("delay")));
  if (kind == "slow") {
    std::vector<PeerId> slow;
    if (params.contains("slow")) {
      slow = params.at("slow").get<std::vector<PeerId>>();
    } else {
      slow = sample_peers(cfg.k, std::max(1, cfg.fault_budget()), rng);
    }
    const Ticks fast = params.value("fast_ticks", kTicksPerUnit / 64);
    return std::make_shared<SlowSetDelay>(std::move(slow), fast);
  }
  throw ConfigError("unknown delay policy '" + kind + "'");
}

}  // namespace

bool known_adversary(const std::string& id) {
  const auto& ids = adversary_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

FaultPlan make_fault_plan(const SimConfig& cfg, const nlohmann::json& params) {
  FaultPlan plan;
  const std::string& id = cfg.adversary;
  if (!known_adversary(id)) throw ConfigError("unknown adversary '" + id + "'");
  Stream rng(adversary_seed(cfg.seed));
  const int f = params.value("f", cfg.fault_budget());
  if (f < 0 || f > cfg.fault_budget()) {
    throw ConfigError("adversary f=" + std::to_string(f) + " exceeds the fault budget " +
                      std::to_string(cfg.fault_budget()));
  }
  plan.budget = f;
  if (id == "none") return plan;

  if (id == "contrarian" || id == "flood" || id == "silent-byzantine") {
    const bool dynamic = params.value("dynamic", false);
    plan.kind = dynamic ? FaultKind::kDynamicByzantine : FaultKind::kFixedByzantine;
    const std::uint64_t seed = derive_seed(adversary_seed(cfg.seed), label_tag("corrupt"));
    plan.corrupt_schedule = dynamic ? dynamic_corruption(cfg.k, f, seed) : fixed_corruption(cfg.k, f, seed);
    if (id == "contrarian") {
      plan.behavior = std::make_shared<ContrarianVotes>();
    } else if (id == "flood") {
      int variants = 0;
      if (params.contains("variants") && params.at("variants").is_number_integer()) {
        variants = params.at("variants").get<int>();
        if (variants < 1) throw ConfigError("flood variants must be >= 1 or \"auto\"");
      } else if (params.contains("variants") && params.at("variants") != "auto") {
        throw ConfigError("flood variants must be an integer or \"auto\"");
      }
      plan.behavior = std::make_shared<IntervalFlood>(params.value("target", std::int64_t{1}), variants);
    } else {
      plan.behavior = std::make_shared<SilentByzantine>();
    }
    return plan;
  }

  if (id == "crash") {
    plan.kind = FaultKind::kCrash;
    const std::string how = params.value("crash", std::string("random"));
    if (cfg.timing == Timing::kSync) {
      if (how == "silent") {
        plan.crashes = silent_crashes(sample_peers(cfg.k, f, rng));
      } else if (how == "random") {
        const std::int64_t horizon = params.value("horizon", std::max<std::int64_t>(1, cfg.n));
        plan.crashes = random_crashes(cfg.k, f, horizon, rng);
      } else {
        throw ConfigError("unknown crash mode '" + how + "'");
      }
    } else {
      if (how == "silent") {
        plan.async_crashes = silent_async_crashes(sample_peers(cfg.k, f, rng));
      } else if (how == "random") {
        const std::int64_t horizon = params.value("horizon", std::int64_t{4} * cfg.k);
        plan.async_crashes = random_async_crashes(cfg.k, f, horizon, rng);
      } else {
        throw ConfigError("unknown crash mode '" + how + "'");
      }
      plan.delays = make_delay(cfg, params, rng);
    }
    return plan;
  }

  // delay
  if (cfg.timing != Timing::kAsync) throw ConfigError("delay adversary needs asynchronous timing");
  plan.kind = FaultKind::kAsyncDelay;
  plan.budget = 0;
  plan.delays = make_delay(cfg, params, rng);
  return plan;
}

}  // namespace drsim
