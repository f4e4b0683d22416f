#include "drsim/crash_sync.hpp"

#include <algorithm>

namespace drsim {

namespace {

struct StaticRelay final : Payload {
  static constexpr std::uint32_t kTag = 0x53440001;
  StaticRelay(std::int64_t v, std::int64_t i, bool b) : Payload(kTag), view(v), index(i), bit(b) {}
  std::int64_t bits() const override { return 64 + 64 + 1; }
  std::int64_t view;
  std::int64_t index;
  bool bit;
};

// index n+1 announces that every bit is confirmed.
struct RapidViewMsg final : Payload {
  static constexpr std::uint32_t kTag = 0x52440001;
  RapidViewMsg(std::int64_t v, std::int64_t i, bool b) : Payload(kTag), view(v), index(i), bit(b) {}
  std::int64_t bits() const override { return 64 + 64 + 1; }
  std::int64_t view;
  std::int64_t index;
  bool bit;
};

struct RapidChangeMsg final : Payload {
  static constexpr std::uint32_t kTag = 0x52440002;
  RapidChangeMsg(std::int64_t v, std::int64_t i) : Payload(kTag), view(v), index(i) {}
  std::int64_t bits() const override { return 64 + 64; }
  std::int64_t view;
  std::int64_t index;
};

std::int64_t next_view(std::int64_t after, const std::vector<bool>& suspected, int k) {
  std::int64_t v = after + 1;
  while (suspected[static_cast<std::size_t>(view_leader(v, k))]) ++v;
  return v;
}

}  // namespace

// ---------------------------------------------------------------- static

void StaticDownload::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  f_ = static_cast<int>(cfg.constant("f", Rational(cfg.fault_budget())).numerator());
  if (f_ < 0 || f_ >= cfg.k) throw ConfigError("static-crash needs 0 <= f < k");
  PeerState init;
  init.suspected_crashed.assign(static_cast<std::size_t>(cfg.k) + 1, false);
  init.res = PartialBits(static_cast<std::size_t>(cfg.n));
  peers_.assign(static_cast<std::size_t>(cfg.k) + 1, init);
  pending_.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
  views_.clear();
  recorded_through_ = 0;
}

void StaticDownload::on_query(SyncContext& ctx) {
  const PeerId self = ctx.self();
  PeerState& s = peers_[static_cast<std::size_t>(self)];
  pending_[static_cast<std::size_t>(self)] = 0;
  if (s.done) return;
  ctx.inbox().for_each([&](const Envelope& e) {
    const auto* m = payload_as<StaticRelay>(e.payload);
    if (m != nullptr && m->view == s.view && m->index >= 1 && m->index <= cfg_.n) {
      s.res.learn(static_cast<std::size_t>(m->index - 1), m->bit);
    }
  });
  if (s.position > f_ + 1) {
    const bool good = s.res.has(static_cast<std::size_t>(s.index - 1));
    const PeerId leader = view_leader(s.view, cfg_.k);
    if (s.view > recorded_through_) {
      views_.push_back({s.view, leader, s.index, good});
      recorded_through_ = s.view;
    }
    if (ctx.tracing()) ctx.trace({{"view", s.view}, {"leader", leader}, {"outcome", good ? "good" : "bad"}});
    if (good) {
      ++s.index;
    } else {
      s.suspected_crashed[static_cast<std::size_t>(leader)] = true;
    }
    if (s.index > cfg_.n) {
      s.done = true;
      ctx.decide_previous_round();
      return;
    }
    s.view = next_view(s.view, s.suspected_crashed, cfg_.k);
    ++s.views_entered;
    s.position = 1;
  }
  if (s.position == 1 && view_leader(s.view, cfg_.k) == self && !s.res.has(static_cast<std::size_t>(s.index - 1))) {
    pending_[static_cast<std::size_t>(self)] = 1;
    ctx.request(s.index);
  }
}

void StaticDownload::on_response(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (!pending_[i]) return;
  const QueryAnswer& a = ctx.answers().front();
  peers_[i].res.learn(static_cast<std::size_t>(a.first - 1), a.bit(a.first));
}

void StaticDownload::on_message(SyncContext& ctx) {
  PeerState& s = peers_[static_cast<std::size_t>(ctx.self())];
  if (s.done) return;
  const auto at = static_cast<std::size_t>(s.index - 1);
  if (s.res.has(at)) ctx.broadcast(std::make_shared<StaticRelay>(s.view, s.index, s.res.get(at)));
  ++s.position;
}

SyncObserver static_checker(const StaticDownload& proto, StaticAudit& audit, bool strict) {
  return [&proto, &audit, strict](const SyncRoundView& rv) {
    ++audit.rounds;
    const int k = static_cast<int>(rv.crashed->size()) - 1;
    const StaticDownload::PeerState* ref = nullptr;
    bool differ = false;
    for (PeerId p = 1; p <= k; ++p) {
      const auto& s = proto.state(p);
      audit.max_views = std::max(audit.max_views, s.views_entered);
      for (PeerId q = 1; q <= k; ++q) {
        if (s.suspected_crashed[static_cast<std::size_t>(q)] && !(*rv.crashed)[static_cast<std::size_t>(q)]) {
          ++audit.unjustified;
        }
      }
      if ((*rv.crashed)[static_cast<std::size_t>(p)] || s.done) continue;
      if (ref == nullptr) {
        ref = &s;
      } else if (ref->view != s.view || ref->index != s.index || ref->suspected_crashed != s.suspected_crashed) {
        differ = true;
      }
    }
    if (differ) {
      ++audit.disagreements;
      if (strict) {
        throw InvariantViolation("static-crash: live peers out of sync after round " + std::to_string(rv.round));
      }
    }
  };
}

// ---------------------------------------------------------------- rapid

void RapidDownload::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  PeerState init;
  init.suspected_crashed.assign(static_cast<std::size_t>(cfg.k) + 1, false);
  init.res = PartialBits(static_cast<std::size_t>(cfg.n));
  // Round 1 behaves as if everyone had just sent a view change for view 1.
  init.idle = true;
  peers_.assign(static_cast<std::size_t>(cfg.k) + 1, init);
  pending_.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
  arrivals_.clear();
  views_.clear();
}

void RapidDownload::change_view(PeerState& s, PeerId self) {
  (void)self;
  const std::int64_t target = next_view(s.view, s.suspected_crashed, cfg_.k);
  s.view_change = std::make_pair(view_leader(target, cfg_.k), target);
  s.view = target;
  s.idle = true;
}

void RapidDownload::on_query(SyncContext& ctx) {
  const PeerId self = ctx.self();
  const auto me = static_cast<std::size_t>(self);
  PeerState& s = peers_[me];
  pending_[me] = 0;
  s.view_change.reset();
  const bool was_idle = s.idle;
  s.idle = false;

  std::vector<const RapidViewMsg*> view_msgs;
  std::map<std::int64_t, std::vector<std::int64_t>> changes;  // view -> indices
  ctx.inbox().for_each([&](const Envelope& e) {
    if (const auto* m = payload_as<RapidViewMsg>(e.payload)) {
      if (e.sender == view_leader(m->view, cfg_.k)) view_msgs.push_back(m);
    } else if (const auto* c = payload_as<RapidChangeMsg>(e.payload)) {
      if (view_leader(c->view, cfg_.k) == self) changes[c->view].push_back(c->index);
    }
  });

  // Leader instructions: the first view-change round for a view starts it.
  std::optional<std::int64_t> start;
  for (auto& [v, indices] : changes) {
    std::sort(indices.begin(), indices.end());
    const bool fresh = v >= s.view && !s.led.count(v);
    arrivals_.push_back({self, v, ctx.round(), indices, fresh});
    if (fresh) start = v;
  }
  if (ctx.round() == 1 && view_leader(1, cfg_.k) == self) start = 1;
  if (start) {
    const std::int64_t v = *start;
    s.led.insert(v);
    s.view = v;
    const auto& idx = changes[v];
    if (!idx.empty()) s.index = std::max(s.index, idx.back());
    s.index = std::min<std::int64_t>(s.index, cfg_.n + 1);
    if (s.index <= cfg_.n && !s.res.has(static_cast<std::size_t>(s.index - 1))) {
      pending_[me] = 1;
      ctx.request(s.index);
    }
    s.sends_left = 2;
    s.sending_view = v;
    views_.push_back({v, self, s.index, false});
    if (ctx.tracing()) ctx.trace({{"view", v}, {"leader", self}, {"index", s.index}, {"changes", idx}});
  }

  // View messages, lowest view first.
  std::sort(view_msgs.begin(), view_msgs.end(),
            [](const RapidViewMsg* a, const RapidViewMsg* b) { return a->view < b->view; });
  bool heard = false;
  bool changed = false;
  for (const RapidViewMsg* m : view_msgs) {
    if (m->view < s.view) continue;
    s.view = m->view;
    if (m->index >= s.index) s.index = std::min<std::int64_t>(m->index, cfg_.n + 1);
    if (m->index <= cfg_.n) s.res.learn(static_cast<std::size_t>(m->index - 1), m->bit);
    heard = true;
    if (++s.copies[m->view] == 2) {
      s.index = std::min<std::int64_t>(s.index + 1, cfg_.n + 1);
      change_view(s, self);
      changed = true;
    }
  }
  if (!changed && !heard && !was_idle && !start && view_leader(s.view, cfg_.k) != self && !s.finished) {
    s.suspected_crashed[static_cast<std::size_t>(view_leader(s.view, cfg_.k))] = true;
    change_view(s, self);
  }
  if (!s.finished && s.index > cfg_.n) {
    s.finished = true;
    ctx.decide_previous_round();
  }
}

void RapidDownload::on_response(SyncContext& ctx) {
  const auto me = static_cast<std::size_t>(ctx.self());
  if (!pending_[me]) return;
  const QueryAnswer& a = ctx.answers().front();
  peers_[me].res.learn(static_cast<std::size_t>(a.first - 1), a.bit(a.first));
}

void RapidDownload::on_message(SyncContext& ctx) {
  PeerState& s = peers_[static_cast<std::size_t>(ctx.self())];
  if (s.sends_left > 0) {
    --s.sends_left;
    const bool done = s.index > cfg_.n;
    const bool bit = done ? false : s.res.get(static_cast<std::size_t>(s.index - 1));
    ctx.broadcast(std::make_shared<RapidViewMsg>(s.sending_view, s.index, bit));
  }
  if (s.view_change) {
    ctx.send(s.view_change->first, std::make_shared<RapidChangeMsg>(s.view_change->second, s.index));
  }
}

SyncObserver rapid_checker(const RapidDownload& proto, const BitString& truth, RapidAudit& audit) {
  return [&proto, &truth, &audit](const SyncRoundView& rv) {
    ++audit.rounds;
    const int k = static_cast<int>(rv.crashed->size()) - 1;
    std::int64_t lo = -1, hi = -1;
    for (PeerId p = 1; p <= k; ++p) {
      const auto& s = proto.state(p);
      for (PeerId q = 1; q <= k; ++q) {
        if (s.suspected_crashed[static_cast<std::size_t>(q)] && !(*rv.crashed)[static_cast<std::size_t>(q)]) {
          ++audit.unjustified;
        }
      }
      if ((*rv.crashed)[static_cast<std::size_t>(p)]) continue;
      lo = lo < 0 ? s.index : std::min(lo, s.index);
      hi = std::max(hi, s.index);
    }
    if (lo < 0) return;
    audit.max_spread = std::max(audit.max_spread, hi - lo);
    // Every bit below the largest live I must be known, correctly, by every live peer.
    for (PeerId p = 1; p <= k; ++p) {
      if ((*rv.crashed)[static_cast<std::size_t>(p)]) continue;
      const auto& res = proto.state(p).res;
      for (std::int64_t i = 1; i < hi; ++i) {
        const auto at = static_cast<std::size_t>(i - 1);
        if (!res.has(at) || res.get(at) != truth.get(at)) {
          ++audit.prefix_violations;
          break;
        }
      }
    }
  };
}

}  // namespace drsim
