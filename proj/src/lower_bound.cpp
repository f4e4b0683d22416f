#include "drsim/lower_bound.hpp"

#include <algorithm>
#include <stdexcept>

#include "drsim/adversaries.hpp"
#include "drsim/source.hpp"

namespace drsim {

namespace {

struct SkipReport final : Payload {
  static constexpr std::uint32_t kTag = 0x4c420001;
  SkipReport(BitString v, std::vector<std::int64_t> s) : Payload(kTag), values(std::move(v)), skipped(std::move(s)) {}
  // Values of the queried bits plus one 32-bit index per skipped bit.
  std::int64_t bits() const override {
    return static_cast<std::int64_t>(values.width() - skipped.size() + 32 * skipped.size());
  }
  std::string describe() const override {
    BitString shown = values;
    std::string text = shown.to_string();
    for (const auto s : skipped) text[static_cast<std::size_t>(s - 1)] = '?';
    return text;
  }
  bool carries(std::int64_t i) const { return std::find(skipped.begin(), skipped.end(), i) == skipped.end(); }
  BitString values;
  std::vector<std::int64_t> skipped;
};

ExactRational exact(const Rational& r) { return ExactRational(r.numerator()) / ExactRational(r.denominator()); }

}  // namespace

TargetIndex compute_target_index(const SkipProfile& profile) {
  if (profile.p.empty() || profile.p.front().empty()) throw std::invalid_argument("empty skip profile");
  const std::size_t n = profile.p.front().size();
  for (const auto& row : profile.p) {
    if (row.size() != n) throw std::invalid_argument("skip profile rows differ in length");
    Rational sum(0);
    for (const auto& x : row) {
      if (x < Rational(0) || x > Rational(1)) throw std::invalid_argument("skip probability outside [0,1]");
      sum += x;
    }
    if (sum < Rational(1)) throw std::invalid_argument("skip profile row sums below 1: protocol may query every bit");
  }
  TargetIndex out;
  out.q.assign(n, ExactRational(1));
  for (const auto& row : profile.p) {
    for (std::size_t i = 0; i < n; ++i) out.q[i] *= ExactRational(1) - exact(row[i]);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (out.q[i] < out.q[best]) best = i;
  }
  out.index = static_cast<std::int64_t>(best) + 1;
  return out;
}

void OneRoundSkip::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  const auto slots = static_cast<std::size_t>(cfg.k) + 1;
  res_.assign(slots, PartialBits(static_cast<std::size_t>(cfg.n)));
  skipped_.assign(slots, {});
  received_.assign(slots, {});
}

SkipProfile OneRoundSkip::profile(std::int64_t n, int k) const {
  SkipProfile prof;
  const Rational share = Rational(std::min<std::int64_t>(skips_, n), n);
  prof.p.assign(static_cast<std::size_t>(k), std::vector<Rational>(static_cast<std::size_t>(n), share));
  return prof;
}

std::vector<std::int64_t> OneRoundSkip::draw_skips(Stream& rng, std::int64_t n) const {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
  const std::int64_t m = std::min<std::int64_t>(skips_, n);
  for (std::int64_t i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(rng.between(i, n - 1));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(m));
  std::sort(ids.begin(), ids.end());
  return ids;
}

PayloadPtr OneRoundSkip::report(const BitString& x, const std::vector<std::int64_t>& skips) const {
  BitString v = x;
  for (const auto s : skips) v.set(static_cast<std::size_t>(s - 1), false);
  return std::make_shared<SkipReport>(std::move(v), skips);
}

void OneRoundSkip::on_query(SyncContext& ctx) {
  if (ctx.round() != 1) return;
  const auto i = static_cast<std::size_t>(ctx.self());
  skipped_[i] = draw_skips(ctx.rng(), cfg_.n);
  std::int64_t next = 1;
  for (const auto s : skipped_[i]) {
    if (s > next) ctx.request_range(next, s - next);
    next = s + 1;
  }
  if (next <= cfg_.n) ctx.request_range(next, cfg_.n - next + 1);
}

void OneRoundSkip::on_response(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (ctx.round() == 1) {
    for (const auto& a : ctx.answers()) {
      for (std::size_t b = 0; b < a.bits.width(); ++b) res_[i].learn(static_cast<std::size_t>(a.first - 1) + b, a.bits.get(b));
    }
    return;
  }
  if (ctx.round() != 2) return;
  std::vector<const SkipReport*> reports;
  ctx.inbox().for_each([&](const Envelope& e) {
    if (e.sender == ctx.self()) return;
    if (const auto* r = payload_as<SkipReport>(e.payload)) {
      if (r->values.width() == static_cast<std::size_t>(cfg_.n)) {
        reports.push_back(r);
        received_[i].push_back(r->describe());
      }
    }
  });
  std::sort(received_[i].begin(), received_[i].end());
  for (const auto s : skipped_[i]) {
    std::int64_t ones = 0, zeros = 0;
    for (const auto* r : reports) {
      if (!r->carries(s)) continue;
      (r->values.get(static_cast<std::size_t>(s - 1)) ? ones : zeros) += 1;
    }
    res_[i].learn(static_cast<std::size_t>(s - 1), ones > zeros);
  }
  ctx.decide_previous_round();
}

void OneRoundSkip::on_message(SyncContext& ctx) {
  if (ctx.round() != 1) return;
  const auto i = static_cast<std::size_t>(ctx.self());
  ctx.broadcast(report(res_[i].values, skipped_[i]));
}

void MirrorBehavior::act(const ByzView& view, ByzOutbox& out) {
  if (view.round != 1) return;
  BitString flipped = *view.truth;
  const auto at = static_cast<std::size_t>(flip_ - 1);
  flipped.set(at, !flipped.get(at));
  for (const PeerId p : view.corrupt_list) {
    Stream own(peer_seed(view.config->seed, p));
    out.broadcast(p, protocol_.report(flipped, protocol_.draw_skips(own, view.config->n)));
  }
}

double MirrorResult::worse() const {
  if (trials <= 0) return 0.0;
  return static_cast<double>(std::max(fail0, fail1)) / static_cast<double>(trials);
}

namespace {

SimConfig mirror_config(int k, std::int64_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.beta = Rational(k - 1, 2 * k);
  cfg.mode = CommMode::kBroadcast;
  cfg.protocol = "one-round-skip";
  cfg.adversary = "mirror";
  cfg.seed = seed;
  return cfg;
}

FaultPlan mirror_plan(const std::vector<PeerId>& byz, std::shared_ptr<ByzantineBehavior> behavior) {
  FaultPlan plan;
  plan.kind = FaultKind::kFixedByzantine;
  plan.budget = static_cast<int>(byz.size());
  plan.corrupt_schedule = [byz](std::int64_t) { return byz; };
  plan.behavior = std::move(behavior);
  return plan;
}

void check_mirror_args(int k, std::int64_t n) {
  if (k < 3 || k % 2 == 0) throw ConfigError("mirror attack needs an odd peer count k >= 3");
  if (n < 1) throw ConfigError("mirror attack needs n >= 1");
}

}  // namespace

MirrorResult mirror_attack(int k, std::int64_t n, std::int64_t trials, std::uint64_t seed, int skips) {
  check_mirror_args(k, n);
  if (trials <= 0) throw ConfigError("mirror attack needs at least one trial");
  if (skips < 1 || skips > n) throw ConfigError("mirror attack needs a protocol that skips between 1 and n bits");
  OneRoundSkip protocol(skips);
  const TargetIndex target = compute_target_index(protocol.profile(n, k));
  MirrorResult out;
  out.target = target.index;
  out.trials = trials;
  BitString x0 = random_input(n, derive_seed(seed, label_tag("mirror-input")));
  x0.set(static_cast<std::size_t>(target.index - 1), false);
  BitString x1 = x0;
  x1.set(static_cast<std::size_t>(target.index - 1), true);
  auto behavior = std::make_shared<MirrorBehavior>(protocol, target.index);
  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const SimConfig cfg = mirror_config(k, n, run_seed);
    Stream adv(adversary_seed(run_seed));
    const auto byz = sample_peers(k, (k - 1) / 2, adv);
    const FaultPlan plan = mirror_plan(byz, behavior);
    if (!run_sync(cfg, x0, protocol, plan).metrics.correct) ++out.fail0;
    if (!run_sync(cfg, x1, protocol, plan).metrics.correct) ++out.fail1;
  }
  return out;
}

std::optional<ReplayOutcome> mirror_replay(int k, std::int64_t n, std::uint64_t seed) {
  check_mirror_args(k, n);
  OneRoundSkip protocol(1);
  const std::int64_t ell = compute_target_index(protocol.profile(n, k)).index;
  const SimConfig cfg = mirror_config(k, n, seed);
  Stream adv(adversary_seed(seed));
  const auto byz = sample_peers(k, (k - 1) / 2, adv);
  PeerId defective = 0;
  for (PeerId v = 1; v <= k && defective == 0; ++v) {
    if (std::binary_search(byz.begin(), byz.end(), v)) continue;
    Stream own(peer_seed(seed, v));
    const auto s = protocol.draw_skips(own, n);
    if (std::find(s.begin(), s.end(), ell) != s.end()) defective = v;
  }
  if (defective == 0) return std::nullopt;
  std::vector<PeerId> inv;
  for (PeerId v = 1; v <= k; ++v) {
    if (v != defective && !std::binary_search(byz.begin(), byz.end(), v)) inv.push_back(v);
  }
  BitString x0 = random_input(n, derive_seed(seed, label_tag("mirror-input")));
  x0.set(static_cast<std::size_t>(ell - 1), false);
  BitString x1 = x0;
  x1.set(static_cast<std::size_t>(ell - 1), true);
  auto behavior = std::make_shared<MirrorBehavior>(protocol, ell);
  OneRoundSkip second(1);
  auto behavior2 = std::make_shared<MirrorBehavior>(second, ell);
  const RunResult a = run_sync(cfg, x0, protocol, mirror_plan(byz, behavior));
  const RunResult b = run_sync(cfg, x1, second, mirror_plan(inv, behavior2));
  ReplayOutcome out;
  out.defective = defective;
  out.same_messages = protocol.received(defective) == second.received(defective);
  out.fails_one = !a.metrics.correct || !b.metrics.correct;
  return out;
}

}  // namespace drsim
