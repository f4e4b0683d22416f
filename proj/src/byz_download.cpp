#include "drsim/byz_download.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace drsim {

namespace {

// Rounds values that sit within 1e-9 of an integer onto it, so exact powers
// of two survive floating-point logs.
long double snap(long double x) {
  const long double r = std::nearbyint(x);
  return std::fabs(x - r) < 1e-9L ? r : x;
}

int ceil_int(long double x) { return static_cast<int>(std::ceil(snap(x))); }

}  // namespace

Alg1Params derive_alg1_params(std::int64_t n, long double gamma_k, const Rational& delta) {
  if (n < 2) throw ConfigError("alg1 needs n >= 2");
  if (gamma_k <= 0) throw ConfigError("alg1 needs a positive honest count");
  Alg1Params p;
  p.delta = delta;
  p.gamma_k = gamma_k;
  p.lg_n = snap(std::log2(static_cast<long double>(n)));
  p.lglg_n = snap(std::log2(p.lg_n));
  const long double d = static_cast<long double>(delta.numerator()) / static_cast<long double>(delta.denominator());
  p.first_round = std::max(1, ceil_int(d + p.lglg_n));
  p.last_round = std::max(p.first_round, ceil_int(std::log2(gamma_k) - p.lglg_n));
  p.fallback = 2.0L * gamma_k <= std::pow(2.0L, d) * p.lg_n * p.lg_n;
  return p;
}

Alg1Params derive_alg1_params(std::int64_t n, int k, const Rational& gamma, const Rational& delta) {
  const Rational gk = gamma * Rational(k);
  return derive_alg1_params(n, static_cast<long double>(gk.numerator()) / static_cast<long double>(gk.denominator()),
                            delta);
}

CoinToss toss_query_coins(WordSource& coins, int j, const Alg1Params& params) {
  if (j < params.first_round || j > params.last_round || j < 1) {
    throw std::invalid_argument("coin round outside [first, last]");
  }
  CoinToss t;
  if (j == params.last_round) {
    t.forced = true;
    return t;
  }
  t.heads = sample_binomial(coins, std::uint64_t{1} << j, 1.0L / params.gamma_k);
  return t;
}

PjBounds check_pj_bounds(std::int64_t gamma_k, std::int64_t n, int j) {
  constexpr mpfr_prec_t kPrec = 256;
  mpfr_t x, pj, upper, lower, lg, tmp;
  mpfr_inits2(kPrec, x, pj, upper, lower, lg, tmp, static_cast<mpfr_ptr>(0));
  mpfr_set_ui(x, 1, MPFR_RNDN);
  mpfr_div_ui(x, x, static_cast<unsigned long>(gamma_k), MPFR_RNDN);
  mpfr_ui_sub(x, 1, x, MPFR_RNDN);
  mpfr_pow_ui(x, x, 1UL << j, MPFR_RNDN);
  mpfr_ui_sub(pj, 1, x, MPFR_RNDN);
  mpfr_set_ui(upper, 1UL << j, MPFR_RNDN);
  mpfr_div_ui(upper, upper, static_cast<unsigned long>(gamma_k), MPFR_RNDN);
  mpfr_set_ui(lg, static_cast<unsigned long>(n), MPFR_RNDN);
  mpfr_log2(lg, lg, MPFR_RNDN);
  mpfr_mul_ui(tmp, lg, 2, MPFR_RNDN);
  mpfr_ui_div(tmp, 1, tmp, MPFR_RNDN);
  mpfr_ui_sub(tmp, 1, tmp, MPFR_RNDN);
  mpfr_mul(lower, upper, tmp, MPFR_RNDN);
  PjBounds out;
  out.pj = mpfr_get_d(pj, MPFR_RNDN);
  out.lower = mpfr_get_d(lower, MPFR_RNDN);
  out.upper = mpfr_get_d(upper, MPFR_RNDN);
  out.holds = mpfr_less_p(lower, pj) != 0 && mpfr_less_p(pj, upper) != 0;
  mpfr_clears(x, pj, upper, lower, lg, tmp, static_cast<mpfr_ptr>(0));
  return out;
}

void VoteDigest::add(const Envelope& e) {
  const auto* v = payload_as<Alg1Vote>(e.payload);
  if (v == nullptr || v->value > 1) {
    bad.insert(e.sender);
  } else if (v->value == 0) {
    zero.insert(e.sender);
  } else {
    one.insert(e.sender);
  }
}

Alg1Peer::Alg1Peer(const Alg1Params& params, PeerId self, int k, std::int64_t n)
    : params_(params),
      self_(self),
      k_(k),
      n_(n),
      res_(static_cast<std::size_t>(n)),
      blacklist_(k),
      votes0_(k),
      votes1_(k),
      records_(static_cast<std::size_t>(n)) {}

void Alg1Peer::add_to_blacklist(const PeerSet& offenders, std::int64_t round, std::int64_t epoch) {
  const PeerSet fresh = offenders.minus(blacklist_);
  if (fresh.empty()) return;
  for (PeerId p : fresh.members()) blacklist_log_.push_back({p, round});
  blacklist_ |= fresh;
  if (epoch >= 1 && epoch <= n_) records_[static_cast<std::size_t>(epoch - 1)].blacklisted +=
      static_cast<std::int32_t>(fresh.size());
}

void Alg1Peer::ingest(std::int64_t round, const VoteDigest& votes) {
  const std::int64_t sent = round - 1;
  if (sent < 1) return;
  const std::int64_t epoch = epoch_of(sent);
  PeerSet me(k_);
  me.insert(self_);
  const PeerSet zero = votes.zero.minus(me);
  const PeerSet one = votes.one.minus(me);
  PeerSet offenders = votes.bad.minus(me);
  offenders |= zero.intersect(one);
  add_to_blacklist(offenders, sent, epoch);

  votes0_ |= zero.minus(blacklist_);
  votes1_ |= one.minus(blacklist_);
  // A different vote in an earlier round of the same epoch.
  add_to_blacklist(votes0_.intersect(votes1_), sent, epoch);
  if (voted_ && epoch_of(voted_round_) == epoch) {
    const bool b = res_.get(static_cast<std::size_t>(epoch - 1));
    add_to_blacklist(b ? votes0_ : votes1_, sent, epoch);
  }
  votes0_ = votes0_.minus(blacklist_);
  votes1_ = votes1_.minus(blacklist_);

  if (coin_round_of(sent) == params_.last_round) {
    votes0_.clear();
    votes1_.clear();
    voted_ = false;
  }
}

Alg1Peer::Step Alg1Peer::act(std::int64_t round, WordSource& coins) {
  if (voted_ && epoch_of(voted_round_) == epoch_of(round)) return Step::kIdle;
  const std::int64_t epoch = epoch_of(round);
  const int j = coin_round_of(round);
  EpochRecord& rec = records_[static_cast<std::size_t>(epoch - 1)];
  const auto idx = static_cast<std::size_t>(epoch - 1);
  if (j != params_.first_round) {
    // Decisive majority: one side reaches nu*2^j, the other stays below it.
    const Rational threshold = params_.nu * Rational(std::int64_t{1} << j);
    const Rational c0(votes0_.size());
    const Rational c1(votes1_.size());
    for (const bool b : {false, true}) {
      const Rational& mine = b ? c1 : c0;
      const Rational& other = b ? c0 : c1;
      if (mine >= threshold && other < threshold) {
        res_.learn(idx, b);
        voted_ = true;
        voted_round_ = round;
        rec.learn_round = j;
        rec.by_query = false;
        ++rec.learning_steps;
        return Step::kGossip;
      }
    }
  }
  const CoinToss toss = toss_query_coins(coins, j, params_);
  rec.heads += static_cast<std::uint32_t>(toss.heads);
  if (!toss.query()) return Step::kIdle;
  voted_ = true;
  voted_round_ = round;
  rec.learn_round = j;
  rec.by_query = true;
  ++rec.learning_steps;
  return Step::kQuery;
}

void Alg1Peer::learn_queried(bool bit) {
  const std::int64_t epoch = epoch_of(voted_round_);
  res_.learn(static_cast<std::size_t>(epoch - 1), bit);
}

void Alg1Peer::learn_all(const BitString& bits) {
  for (std::size_t b = 0; b < bits.width(); ++b) res_.learn(b, bits.get(b));
}

std::optional<bool> Alg1Peer::vote(std::int64_t round) const {
  if (!voted_ || voted_round_ != round) return std::nullopt;
  const auto idx = static_cast<std::size_t>(epoch_of(round) - 1);
  if (!res_.has(idx)) return std::nullopt;
  return res_.get(idx);
}

bool operator==(const Alg1Peer& a, const Alg1Peer& b) {
  return a.self_ == b.self_ && a.res_.values == b.res_.values && a.res_.known == b.res_.known &&
         a.blacklist_ == b.blacklist_ && a.votes0_ == b.votes0_ && a.votes1_ == b.votes1_ &&
         a.voted_ == b.voted_ && a.voted_round_ == b.voted_round_ && a.records_ == b.records_ &&
         a.blacklist_log_ == b.blacklist_log_;
}

void Alg1Protocol::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  params_ = derive_alg1_params(cfg.n, cfg.k, cfg.gamma(), cfg.constant("delta", Rational(0)));
  peers_.clear();
  peers_.reserve(static_cast<std::size_t>(cfg.k) + 1);
  for (PeerId p = 0; p <= cfg.k; ++p) peers_.emplace_back(params_, p, cfg.k, cfg.n);
  digest_ = VoteDigest(cfg.k);
  pending_query_.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
  vote0_ = std::make_shared<Alg1Vote>(0);
  vote1_ = std::make_shared<Alg1Vote>(1);
  transcripts_.assign(static_cast<std::size_t>(cfg.k) + 1, {});
  snapshots_.clear();
}

std::optional<std::int64_t> Alg1Protocol::vote_index(std::int64_t round) const {
  if (params_.fallback || round < 1 || round > peers_.front().total_rounds()) return std::nullopt;
  return peers_.front().epoch_of(round);
}

bool Alg1Protocol::epoch_start(std::int64_t round) const {
  return vote_index(round).has_value() && peers_.front().coin_round_of(round) == params_.first_round;
}

void Alg1Protocol::begin_round(std::int64_t, const std::vector<const Envelope*>& shared) {
  digest_ = VoteDigest(cfg_.k);
  for (const Envelope* e : shared) digest_.add(*e);
}

void Alg1Protocol::on_query(SyncContext& ctx) {
  const PeerId p = ctx.self();
  const auto i = static_cast<std::size_t>(p);
  const std::int64_t r = ctx.round();
  pending_query_[i] = 0;
  if (record_) transcripts_[i].emplace_back();
  if (params_.fallback) {
    if (r == 1) ctx.request_range(1, cfg_.n);
    return;
  }
  Alg1Peer& peer = peers_[i];
  if (ctx.inbox().has_direct()) {
    VoteDigest mine = digest_;
    for (const Envelope* e : *ctx.inbox().direct) mine.add(*e);
    peer.ingest(r, mine);
  } else {
    peer.ingest(r, digest_);
  }
  if (r > peer.total_rounds()) {
    ctx.decide_previous_round();
    return;
  }
  Stream& s = ctx.rng();
  if (record_) s.record_to(&transcripts_[i].back().words);
  StreamSource coins(s);
  const Alg1Peer::Step step = peer.act(r, coins);
  if (record_) s.record_to(nullptr);
  if (ctx.tracing() && step != Alg1Peer::Step::kIdle) {
    const auto& rec = peer.records()[static_cast<std::size_t>(peer.epoch_of(r) - 1)];
    ctx.trace({{"alg1", step == Alg1Peer::Step::kQuery ? "query-learn" : "gossip-learn"},
               {"epoch", peer.epoch_of(r)},
               {"j", peer.coin_round_of(r)},
               {"heads", rec.heads}});
  }
  if (step == Alg1Peer::Step::kQuery) {
    pending_query_[i] = 1;
    ctx.request(peer.epoch_of(r));
  }
}

void Alg1Protocol::on_response(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (params_.fallback) {
    if (ctx.round() == 1) {
      const QueryAnswer& a = ctx.answers().front();
      peers_[i].learn_all(a.bits);
      if (record_) {
        for (std::int64_t x = a.first; x <= a.last(); ++x) transcripts_[i].back().queried.emplace_back(x, a.bit(x));
      }
    }
    return;
  }
  if (!pending_query_[i]) return;
  const QueryAnswer& a = ctx.answers().front();
  const bool bit = a.bit(a.first);
  peers_[i].learn_queried(bit);
  if (record_) transcripts_[i].back().queried.emplace_back(a.first, bit);
}

void Alg1Protocol::on_message(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (params_.fallback) {
    if (ctx.round() == 1) ctx.decide();
    return;
  }
  const auto v = peers_[i].vote(ctx.round());
  if (v) ctx.broadcast(*v ? vote1_ : vote0_);
}

Output Alg1Protocol::output(PeerId p) const { return peers_[static_cast<std::size_t>(p)].res(); }

void Alg1Protocol::snapshot_round() { snapshots_.push_back(peers_); }

}  // namespace drsim
