#include "drsim/crash_async.hpp"

#include "drsim/rng.hpp"

#include <algorithm>

#include <boost/multiprecision/cpp_int.hpp>

namespace drsim {

namespace {

struct MissingAsk final : Payload {
  static constexpr std::uint32_t kTag = 0x41430002;
  explicit MissingAsk(PeerId j) : Payload(kTag), missing(j) {}
  std::int64_t bits() const override { return 64; }
  PeerId missing;
};

struct MissingAnswer final : Payload {
  static constexpr std::uint32_t kTag = 0x41430003;
  MissingAnswer(PeerId j, IndexedBits b) : Payload(kTag), missing(j), entries(std::move(b)) {}
  std::int64_t bits() const override { return 64 + 33 * static_cast<std::int64_t>(entries.size()); }
  PeerId missing;
  IndexedBits entries;  // empty: "me neither"
};

using Wanted = std::vector<std::pair<PeerId, std::vector<std::int64_t>>>;

struct BlockRequest final : Payload {
  static constexpr std::uint32_t kTag = 0x41430004;
  BlockRequest(int phase_, bool second_, Wanted w) : Payload(kTag), phase(phase_), second(second_), wanted(std::move(w)) {}
  std::int64_t bits() const override {
    std::int64_t b = 64;
    for (const auto& [who, idx] : wanted) b += 32 + 32 * static_cast<std::int64_t>(idx.size());
    return b;
  }
  int phase;
  bool second;
  Wanted wanted;
};

struct BlockReply final : Payload {
  static constexpr std::uint32_t kTag = 0x41430005;
  BlockReply(int phase_, bool second_, std::vector<std::pair<PeerId, IndexedBits>> g)
      : Payload(kTag), phase(phase_), second(second_), given(std::move(g)) {}
  std::int64_t bits() const override {
    std::int64_t b = 64;
    for (const auto& [who, e] : given) b += 32 + std::max<std::int64_t>(1, 33 * static_cast<std::int64_t>(e.size()));
    return b;
  }
  int phase;
  bool second;
  std::vector<std::pair<PeerId, IndexedBits>> given;
};

IndexedBits known_among(const PartialBits& res, const std::vector<std::int64_t>& indices) {
  IndexedBits out;
  for (std::int64_t i : indices) {
    const auto c = static_cast<std::size_t>(i - 1);
    if (res.has(c)) out.emplace_back(i, res.get(c));
  }
  return out;
}

IndexedBits all_known(const PartialBits& res) {
  IndexedBits out;
  for (std::size_t c = 0; c < res.width(); ++c) {
    if (res.has(c)) out.emplace_back(static_cast<std::int64_t>(c) + 1, res.get(c));
  }
  return out;
}

std::vector<PeerId> block_owners(std::int64_t n, int k) {
  std::vector<PeerId> owner(static_cast<std::size_t>(n));
  for (std::int64_t l = 0; l < n; ++l) owner[static_cast<std::size_t>(l)] = spread_owner(l, n, k);
  return owner;
}

}  // namespace

std::vector<std::vector<PeerId>> nested_owners(std::int64_t n, int k, int levels) {
  std::vector<std::vector<PeerId>> out(static_cast<std::size_t>(std::max(levels, 1)),
                                       std::vector<PeerId>(static_cast<std::size_t>(n)));
  std::vector<std::int64_t> lo(static_cast<std::size_t>(n), 0), size(static_cast<std::size_t>(n), n);
  for (std::size_t d = 0; d < out.size(); ++d) {
    for (std::int64_t x = 0; x < n; ++x) {
      const auto i = static_cast<std::size_t>(x);
      if (size[i] <= 1) {
        // Single bit: nothing left to split, so scatter by a fixed hash.
        out[d][i] = static_cast<PeerId>(derive_seed(static_cast<std::uint64_t>(x), d) % static_cast<std::uint64_t>(k)) + 1;
        continue;
      }
      const std::int64_t c = ((x - lo[i]) * k) / size[i];
      out[d][i] = static_cast<PeerId>(c) + 1;
      const std::int64_t a = (c * size[i] + k - 1) / k;
      const std::int64_t b = ((c + 1) * size[i] + k - 1) / k;
      lo[i] += a;
      size[i] = b - a;
    }
  }
  return out;
}

int fcrash_phase_cap(std::int64_t n, int k, int f) {
  if (f <= 0) return 1;
  using boost::multiprecision::cpp_int;
  cpp_int up = 1, down = 1;
  int c = 0;
  while (up < cpp_int(n) * down) {
    up *= k;
    down *= f;
    ++c;
  }
  return c;
}

// ---------------------------------------------------------------- one crash

void SingleCrashDownload::setup(const SimConfig& cfg) {
  if (cfg.k < 3) throw ConfigError("async-1crash needs k >= 3");
  if (cfg.n < 1) throw ConfigError("async-1crash needs n >= 1");
  cfg_ = cfg;
  peers_.assign(static_cast<std::size_t>(cfg.k) + 1, PeerState{});
  const auto owner = block_owners(cfg.n, cfg.k);
  for (PeerId p = 1; p <= cfg.k; ++p) {
    auto& s = peers_[static_cast<std::size_t>(p)];
    s.owner = owner;
    s.res = PartialBits(static_cast<std::size_t>(cfg.n));
    s.unknown_of.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
    for (PeerId o : owner) ++s.unknown_of[static_cast<std::size_t>(o)];
    s.responded.assign(static_cast<std::size_t>(cfg.k) + 1, false);
  }
}

int SingleCrashDownload::reassignments() const {
  int c = 0;
  for (std::size_t p = 1; p < peers_.size(); ++p) c += peers_[p].reassigned ? 1 : 0;
  return c;
}

void SingleCrashDownload::learn(PeerState& s, std::int64_t index, bool bit) {
  const auto c = static_cast<std::size_t>(index - 1);
  if (s.res.learn(c, bit)) --s.unknown_of[static_cast<std::size_t>(s.owner[c])];
}

void SingleCrashDownload::on_start(AsyncContext& ctx) {
  auto& s = peers_[static_cast<std::size_t>(ctx.self())];
  IndexedBits mine;
  for (std::int64_t i = 1; i <= cfg_.n; ++i) {
    if (s.owner[static_cast<std::size_t>(i - 1)] != ctx.self()) continue;
    const bool b = ctx.query_bit(i);
    learn(s, i, b);
    mine.emplace_back(i, b);
  }
  ctx.send_all(std::make_shared<CrashBitsMsg>(1, std::move(mine)));
  s.stage = 2;
  advance(ctx);
}

void SingleCrashDownload::answer(AsyncContext& ctx, PeerState& s, PeerId to, PeerId about) {
  std::vector<std::int64_t> block;
  for (std::int64_t i = 1; i <= cfg_.n; ++i) {
    if (spread_owner(i - 1, cfg_.n, cfg_.k) == about) block.push_back(i);
  }
  ctx.send(to, std::make_shared<MissingAnswer>(about, known_among(s.res, block)));
}

void SingleCrashDownload::on_deliver(AsyncContext& ctx, const Envelope& env) {
  auto& s = peers_[static_cast<std::size_t>(ctx.self())];
  if (const auto* m = payload_as<CrashBitsMsg>(env.payload)) {
    for (const auto& [i, b] : m->entries) learn(s, i, b);
  } else if (const auto* a = payload_as<MissingAsk>(env.payload)) {
    if (s.phase == 1 && s.stage < 3 && !s.done) {
      s.waiting.emplace_back(env.sender, a->missing);
    } else {
      answer(ctx, s, env.sender, a->missing);
    }
  } else if (const auto* r = payload_as<MissingAnswer>(env.payload)) {
    for (const auto& [i, b] : r->entries) learn(s, i, b);
    const auto from = static_cast<std::size_t>(env.sender);
    if (s.phase == 1 && s.stage == 3 && r->missing == s.missing && !s.responded[from]) {
      s.responded[from] = true;
      ++s.responses;
      if (!r->entries.empty()) s.all_neither = false;
    }
  }
  advance(ctx);
}

void SingleCrashDownload::advance(AsyncContext& ctx) {
  const PeerId me = ctx.self();
  auto& s = peers_[static_cast<std::size_t>(me)];
  const int k = cfg_.k;
  for (;;) {
    if (s.done) return;
    if (s.res.complete()) {
      // Completion mode: a peer that finished inside phase 1 hands every bit
      // to the others as its phase-2 message.
      if (s.phase == 1) ctx.send_all(std::make_shared<CrashBitsMsg>(2, all_known(s.res)));
      s.done = true;
      ctx.decide();
      for (const auto& [to, about] : s.waiting) answer(ctx, s, to, about);
      s.waiting.clear();
      return;
    }
    if (s.phase == 1 && s.stage == 2) {
      int heard = 0;
      PeerId gap = 0;
      for (PeerId x = 1; x <= k; ++x) {
        if (s.unknown_of[static_cast<std::size_t>(x)] == 0) {
          ++heard;
        } else {
          gap = x;
        }
      }
      if (heard < k - 1) return;
      s.stage = 3;
      s.missing = gap;
      s.responses = 1;  // own "me neither"
      s.all_neither = true;
      for (const auto& [to, about] : s.waiting) answer(ctx, s, to, about);
      s.waiting.clear();
      ctx.send_all(std::make_shared<MissingAsk>(gap));
      continue;
    }
    if (s.phase == 1 && s.stage == 3) {
      if (s.responses < k - 1) return;
      // Not complete here: either nobody had the block, or answers were
      // partial; both cases take a share of the missing block.
      std::vector<std::int64_t> block;
      for (std::int64_t c = 0; c < cfg_.n; ++c) {
        if (s.owner[static_cast<std::size_t>(c)] == s.missing) block.push_back(c);
      }
      const auto count = static_cast<std::int64_t>(block.size());
      for (std::int64_t l = 0; l < count; ++l) {
        // Peers other than the missing one, in id order.
        PeerId to = static_cast<PeerId>((l * (k - 1)) / count) + 1;
        if (to >= s.missing) ++to;
        s.owner[static_cast<std::size_t>(block[static_cast<std::size_t>(l)])] = to;
      }
      std::fill(s.unknown_of.begin(), s.unknown_of.end(), 0);
      for (std::int64_t c = 0; c < cfg_.n; ++c) {
        if (!s.res.has(static_cast<std::size_t>(c))) ++s.unknown_of[static_cast<std::size_t>(s.owner[static_cast<std::size_t>(c)])];
      }
      s.reassigned = true;
      s.phase = 2;
      s.stage = 1;
      if (ctx.tracing()) ctx.trace({{"phase", 2}, {"reassigned", s.missing}});
      IndexedBits mine;
      for (std::int64_t i = 1; i <= cfg_.n; ++i) {
        const auto c = static_cast<std::size_t>(i - 1);
        if (s.owner[c] != me) continue;
        if (!s.res.has(c)) learn(s, i, ctx.query_bit(i));
        mine.emplace_back(i, s.res.get(c));
      }
      ctx.send_all(std::make_shared<CrashBitsMsg>(2, std::move(mine)));
      s.stage = 2;
      continue;
    }
    // Phase 2: wait for the remaining shares.
    return;
  }
}

// ---------------------------------------------------------------- f crashes

void FCrashDownload::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  f_ = static_cast<int>(floor_of(cfg.constant("f", Rational(cfg.fault_budget()))));
  if (f_ < 0 || f_ >= cfg.k) throw ConfigError("async-fcrash needs 0 <= f < k");
  if (cfg.n < 1) throw ConfigError("async-fcrash needs n >= 1");
  cap_ = fcrash_phase_cap(cfg.n, cfg.k, f_);
  owner_at_ = nested_owners(cfg.n, cfg.k, cap_ + 1);
  const auto& owner = owner_at_.front();
  peers_.assign(static_cast<std::size_t>(cfg.k) + 1, PeerState{});
  unknown_at_.assign(static_cast<std::size_t>(cfg.k) + 1, {});
  snapshots_.assign(static_cast<std::size_t>(cfg.k) + 1, {});
  for (PeerId p = 1; p <= cfg.k; ++p) {
    auto& s = peers_[static_cast<std::size_t>(p)];
    s.owner = owner;
    s.res = PartialBits(static_cast<std::size_t>(cfg.n));
    s.responded.assign(static_cast<std::size_t>(cfg.k) + 1, false);
    recount(s);
  }
}

void FCrashDownload::recount(PeerState& s) {
  s.unknown_of.assign(static_cast<std::size_t>(cfg_.k) + 1, 0);
  for (std::size_t c = 0; c < s.owner.size(); ++c) {
    if (!s.res.has(c)) ++s.unknown_of[static_cast<std::size_t>(s.owner[c])];
  }
}

void FCrashDownload::learn(PeerState& s, std::int64_t index, bool bit) {
  const auto c = static_cast<std::size_t>(index - 1);
  if (s.res.learn(c, bit)) --s.unknown_of[static_cast<std::size_t>(s.owner[c])];
}

std::int64_t FCrashDownload::heard(const PeerState& s) const {
  std::int64_t h = 0;
  for (PeerId x = 1; x <= cfg_.k; ++x) h += s.unknown_of[static_cast<std::size_t>(x)] == 0 ? 1 : 0;
  return h;
}

void FCrashDownload::on_start(AsyncContext& ctx) {
  enter_phase(ctx, peers_[static_cast<std::size_t>(ctx.self())]);
  advance(ctx);
}

void FCrashDownload::enter_phase(AsyncContext& ctx, PeerState& s) {
  const PeerId me = ctx.self();
  const auto mi = static_cast<std::size_t>(me);
  unknown_at_[mi].push_back(static_cast<std::int64_t>(s.res.width() - s.res.known_count()));
  if (s.phase >= cap_) return;  // advance() finishes
  std::vector<std::vector<std::int64_t>> ask(static_cast<std::size_t>(cfg_.k) + 1);
  for (std::int64_t i = 1; i <= cfg_.n; ++i) {
    const auto c = static_cast<std::size_t>(i - 1);
    if (s.res.has(c)) continue;
    if (s.owner[c] == me) {
      learn(s, i, ctx.query_bit(i));
    } else {
      ask[static_cast<std::size_t>(s.owner[c])].push_back(i);
    }
  }
  if (audit_) snapshots_[mi].push_back(Snapshot{s.owner, s.res.known});
  for (PeerId x = 1; x <= cfg_.k; ++x) {
    auto& idx = ask[static_cast<std::size_t>(x)];
    if (x == me || idx.empty()) continue;
    ctx.send(x, std::make_shared<BlockRequest>(s.phase, false, Wanted{{x, std::move(idx)}}));
  }
  s.stage = 2;
}

bool FCrashDownload::can_serve(const PeerState& s, const PeerState::Ask& a) const {
  if (s.terminated || s.phase > a.phase) return true;
  return s.phase == a.phase && s.stage >= (a.second ? 3 : 2);
}

void FCrashDownload::reply(AsyncContext& ctx, PeerState& s, const PeerState::Ask& a) {
  std::vector<std::pair<PeerId, IndexedBits>> given;
  for (const auto& [who, idx] : a.wanted) given.emplace_back(who, known_among(s.res, idx));
  ctx.send(a.from, std::make_shared<BlockReply>(a.phase, a.second, std::move(given)));
}

void FCrashDownload::serve(AsyncContext& ctx, PeerState& s) {
  std::vector<PeerState::Ask> keep;
  for (auto& a : s.waiting) {
    if (can_serve(s, a)) {
      reply(ctx, s, a);
    } else {
      keep.push_back(std::move(a));
    }
  }
  s.waiting = std::move(keep);
}

void FCrashDownload::on_deliver(AsyncContext& ctx, const Envelope& env) {
  auto& s = peers_[static_cast<std::size_t>(ctx.self())];
  if (const auto* m = payload_as<CrashBitsMsg>(env.payload)) {
    for (const auto& [i, b] : m->entries) learn(s, i, b);
  } else if (const auto* q = payload_as<BlockRequest>(env.payload)) {
    PeerState::Ask a{env.sender, q->phase, q->second, q->wanted};
    if (can_serve(s, a)) {
      reply(ctx, s, a);
    } else {
      s.waiting.push_back(std::move(a));
    }
  } else if (const auto* r = payload_as<BlockReply>(env.payload)) {
    for (const auto& [who, e] : r->given) {
      for (const auto& [i, b] : e) learn(s, i, b);
    }
    const auto from = static_cast<std::size_t>(env.sender);
    if (r->second && r->phase == s.phase && s.stage == 3 && !s.terminated && !s.responded[from]) {
      s.responded[from] = true;
      ++s.responses;
    }
  }
  advance(ctx);
}

void FCrashDownload::finish(AsyncContext& ctx, PeerState& s) {
  for (std::int64_t i = 1; i <= cfg_.n; ++i) {
    if (!s.res.has(static_cast<std::size_t>(i - 1))) learn(s, i, ctx.query_bit(i));
  }
  ctx.send_all(std::make_shared<CrashBitsMsg>(-1, all_known(s.res)));
  s.terminated = true;
  ctx.decide();
  if (ctx.tracing()) ctx.trace({{"terminate", s.phase}});
}

void FCrashDownload::advance(AsyncContext& ctx) {
  const PeerId me = ctx.self();
  auto& s = peers_[static_cast<std::size_t>(me)];
  const int k = cfg_.k;
  for (;;) {
    serve(ctx, s);
    if (s.terminated) return;
    // Without unblocking, the third-stage wait is only left through replies.
    const bool free = unblock_ || s.stage != 3;
    if (free && (s.res.complete() || s.phase >= cap_)) {
      finish(ctx, s);
      serve(ctx, s);
      return;
    }
    if (s.stage == 2) {
      if (heard(s) < k - f_) return;
      s.missing.clear();
      Wanted wanted;
      for (PeerId x = 1; x <= k; ++x) {
        if (s.unknown_of[static_cast<std::size_t>(x)] == 0) continue;
        s.missing.push_back(x);
        std::vector<std::int64_t> idx;
        for (std::size_t c = 0; c < s.owner.size(); ++c) {
          if (s.owner[c] == x && !s.res.has(c)) idx.push_back(static_cast<std::int64_t>(c) + 1);
        }
        wanted.emplace_back(x, std::move(idx));
      }
      if (s.missing.empty()) continue;  // complete
      std::fill(s.responded.begin(), s.responded.end(), false);
      s.responses = 1;  // own answer is "me neither" for every missing block
      s.stage = 3;
      ctx.send_all(std::make_shared<BlockRequest>(s.phase, true, std::move(wanted)));
      continue;
    }
    if (s.stage == 3) {
      bool filled = true;
      for (PeerId x : s.missing) filled = filled && s.unknown_of[static_cast<std::size_t>(x)] == 0;
      if (s.responses < k - f_ && !(unblock_ && filled)) return;
      // Whatever is still unknown came from a block nobody could supply;
      // the next level of the split hands it to all k peers.
      ++s.phase;
      s.owner = owner_at_[static_cast<std::size_t>(std::min(s.phase, cap_))];
      recount(s);
      s.stage = 1;
      if (ctx.tracing()) ctx.trace({{"phase", s.phase}});
      enter_phase(ctx, s);
      continue;
    }
    return;
  }
}

std::int64_t FCrashDownload::assignment_conflicts(const std::vector<bool>& include) const {
  std::int64_t conflicts = 0;
  const int k = cfg_.k;
  for (PeerId a = 1; a <= k; ++a) {
    if (!include[static_cast<std::size_t>(a)]) continue;
    for (PeerId b = a + 1; b <= k; ++b) {
      if (!include[static_cast<std::size_t>(b)]) continue;
      const auto& sa = snapshots_[static_cast<std::size_t>(a)];
      const auto& sb = snapshots_[static_cast<std::size_t>(b)];
      const std::size_t phases = std::min(sa.size(), sb.size());
      for (std::size_t p = 0; p < phases; ++p) {
        for (std::size_t c = 0; c < sa[p].owner.size(); ++c) {
          if (sa[p].known.get(c) || sb[p].known.get(c)) continue;
          if (sa[p].owner[c] != sb[p].owner[c]) ++conflicts;
        }
      }
    }
  }
  return conflicts;
}

}  // namespace drsim
