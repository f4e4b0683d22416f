#include "drsim/fast_download.hpp"

#include <cmath>
#include <stdexcept>

namespace drsim {

namespace {

long double snap(long double x) {
  const long double r = std::nearbyint(x);
  return std::fabs(x - r) < 1e-9L ? r : x;
}

long double as_ld(const Rational& r) {
  return static_cast<long double>(r.numerator()) / static_cast<long double>(r.denominator());
}

int ceil_lg(std::int64_t x) {
  int l = 0;
  while ((std::int64_t{1} << l) < x) ++l;
  return l;
}

// Walks the candidate tree using answers consumed from `answers` starting at
// `cursor`. Returns false when the interval cannot be determined.
bool walk_candidates(const IntervalCandidates& c, const std::vector<QueryAnswer>& answers, std::size_t& cursor,
                     BitString& out) {
  if (!c.tree) return false;
  const auto rel = c.tree->query_bits();
  std::vector<std::pair<std::int64_t, bool>> seen;
  seen.reserve(rel.size());
  for (const auto r : rel) {
    const QueryAnswer& a = answers.at(cursor++);
    seen.emplace_back(r, a.bit(a.first));
  }
  try {
    const Determination d = determine(
        *c.tree,
        [&](std::int64_t absolute) {
          const std::int64_t r = absolute - c.first;
          for (const auto& [key, b] : seen) {
            if (key == r) return b;
          }
          throw std::logic_error("determine asked for an unqueried bit");
        },
        Validation::kQueried);
    out = d.value;
    return true;
  } catch (const InconsistencyError&) {
    return false;
  }
}

void request_tree(SyncContext& ctx, const IntervalCandidates& c) {
  if (!c.tree) return;
  for (const auto r : c.tree->query_bits()) ctx.request(c.first + r);
}

}  // namespace

IntervalScheme IntervalScheme::make(std::int64_t n, std::int64_t phi) {
  if (n < 1 || phi < 1) throw ConfigError("interval scheme needs n >= 1 and phi >= 1");
  IntervalScheme s;
  s.n = n;
  s.phi = std::min(phi, n);
  s.count = (n + s.phi - 1) / s.phi;
  return s;
}

SubmissionDigest::SubmissionDigest(const IntervalScheme& scheme, int level, int k)
    : scheme_(scheme),
      level_(level),
      first_(static_cast<std::size_t>(k) + 1, nullptr),
      multi_(static_cast<std::size_t>(k) + 1, 0) {}

void SubmissionDigest::add_all(const std::vector<const Envelope*>& envs) {
  for (const Envelope* e : envs) add(*e);
}

void SubmissionDigest::add(const Envelope& e) {
  const auto* s = payload_as<SubmissionPayload>(e.payload);
  if (s == nullptr || s->level != level_ || s->interval < 1 || s->interval > scheme_.count) return;
  if (static_cast<std::int64_t>(s->value.width()) != scheme_.width(s->interval)) return;
  const auto i = static_cast<std::size_t>(e.sender);
  if (i >= first_.size()) return;
  if (first_[i] == nullptr) {
    first_[i] = s;
  } else if (first_[i]->interval != s->interval || !(first_[i]->value == s->value)) {
    multi_[i] = 1;
  }
  sealed_ = false;
}

void SubmissionDigest::seal() {
  by_interval_.clear();
  by_interval_.reserve(static_cast<std::size_t>(scheme_.count));
  for (std::int64_t ell = 1; ell <= scheme_.count; ++ell) {
    by_interval_.emplace_back(static_cast<std::size_t>(scheme_.width(ell)));
  }
  for (std::size_t i = 0; i < first_.size(); ++i) {
    if (first_[i] == nullptr || multi_[i]) continue;
    by_interval_[static_cast<std::size_t>(first_[i]->interval - 1)].add(first_[i]->value);
  }
  sealed_ = true;
}

std::vector<BitString> SubmissionDigest::frequent(std::int64_t ell, const Rational& t) const {
  if (!sealed_) throw std::logic_error("submission digest used before seal()");
  return frequent_strings(strings(ell), t);
}

TwoRoundChoice select_phi_2round(std::int64_t n, int k, const Rational& gamma, const Rational& c) {
  TwoRoundChoice out;
  const long double ln_n = std::log(static_cast<long double>(n));
  const long double g = as_ld(gamma);
  const long double cc = as_ld(c);
  const long double gk = g * static_cast<long double>(k);
  if (gk < 64.0L * cc * ln_n) {
    out.query_all = true;
    out.phi = n;
    out.count = 1;
    out.t = Rational(1);
    return out;
  }
  const long double root = std::sqrt(2.0L * static_cast<long double>(n) / g);
  long double phi = 0;
  if (static_cast<long double>(k) >= 12.0L * cc * ln_n * root) {
    phi = 16.0L * root;
  } else {
    phi = 32.0L * cc * ln_n * static_cast<long double>(n) / gk;
  }
  out.phi = std::min<std::int64_t>(n, std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(snap(phi)))));
  out.count = (n + out.phi - 1) / out.phi;
  out.t = gamma * Rational(k) / Rational(2 * out.count);
  return out;
}

std::int64_t logn_phi(std::int64_t n, int k, const Rational& gamma, long double mult) {
  const long double gk = as_ld(gamma) * static_cast<long double>(k);
  const long double phi = static_cast<long double>(n) / gk * mult * std::log(static_cast<long double>(n));
  return std::min<std::int64_t>(n, std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(snap(phi)))));
}

Rational level_threshold(int level, std::int64_t phi, int k, const Rational& gamma, std::int64_t n) {
  return Rational(phi) * gamma * Rational(k) * Rational(std::int64_t{1} << level) / Rational(2 * n);
}

IntervalCandidates IntervalCandidates::make(std::int64_t first, std::vector<BitString> strings) {
  IntervalCandidates c;
  c.first = first;
  c.strings = std::move(strings);
  if (!c.strings.empty()) c.tree = std::make_shared<DecisionTree>(build_decision_tree(c.strings, first));
  return c;
}

// ---------------------------------------------------------------- two rounds

void TwoRoundProtocol::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  choice_ = select_phi_2round(cfg.n, cfg.k, cfg.gamma(), cfg.constant("c", Rational(1)));
  scheme_ = IntervalScheme::make(cfg.n, choice_.phi);
  round1_ = IntervalRound{};
  round1_.level = 0;
  round1_.scheme = scheme_;
  for (std::int64_t ell = 1; ell <= scheme_.count; ++ell) round1_.open.push_back(ell);
  round1_.threshold = choice_.t;
  res_.assign(static_cast<std::size_t>(cfg.k) + 1, PartialBits(static_cast<std::size_t>(cfg.n)));
  picked_.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
  candidates_.clear();
  stats_ = FastStats{};
  stats_.levels = 1;
  stats_.level_cost.assign(2, 0);
  stats_.level_samples.assign(2, 0);
}

const IntervalRound* TwoRoundProtocol::interval_round(std::int64_t round) const {
  return (round == 1 && !choice_.query_all) ? &round1_ : nullptr;
}

void TwoRoundProtocol::begin_round(std::int64_t round, const std::vector<const Envelope*>& shared) {
  stats_.communication_rounds = std::max(stats_.communication_rounds, round);
  if (round != 2 || choice_.query_all) return;
  SubmissionDigest digest(scheme_, 0, cfg_.k);
  digest.add_all(shared);
  digest.seal();
  candidates_.clear();
  for (std::int64_t ell = 1; ell <= scheme_.count; ++ell) {
    candidates_.push_back(IntervalCandidates::make(scheme_.first(ell), digest.frequent(ell, choice_.t)));
  }
}

void TwoRoundProtocol::on_query(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (ctx.round() == 1) {
    if (choice_.query_all) {
      ctx.request_range(1, cfg_.n);
      return;
    }
    const auto ell = static_cast<std::int64_t>(ctx.rng().below(static_cast<std::uint64_t>(scheme_.count))) + 1;
    picked_[i] = ell;
    ctx.request_range(scheme_.first(ell), scheme_.width(ell));
    return;
  }
  if (ctx.round() != 2 || choice_.query_all) return;
  std::int64_t cost = 0;
  for (const auto& c : candidates_) {
    request_tree(ctx, c);
    cost += c.cost();
  }
  stats_.level_cost[1] += cost;
  stats_.level_samples[1] += 1;
}

void TwoRoundProtocol::on_response(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  PartialBits& res = res_[i];
  if (ctx.round() == 1) {
    const QueryAnswer& a = ctx.answers().front();
    for (std::size_t b = 0; b < a.bits.width(); ++b) res.learn(static_cast<std::size_t>(a.first - 1) + b, a.bits.get(b));
    if (choice_.query_all) ctx.decide();
    return;
  }
  if (ctx.round() != 2) return;
  std::size_t cursor = 0;
  for (std::int64_t ell = 1; ell <= scheme_.count; ++ell) {
    const auto& c = candidates_[static_cast<std::size_t>(ell - 1)];
    stats_.max_child_cost = std::max(stats_.max_child_cost, c.cost());
    BitString s;
    if (!walk_candidates(c, ctx.answers(), cursor, s)) {
      ++stats_.determine_failures;
      if (ctx.tracing()) ctx.trace({{"determine", "failed"}, {"interval", ell}});
      continue;
    }
    const auto off = static_cast<std::size_t>(scheme_.first(ell) - 1);
    for (std::size_t b = 0; b < s.width(); ++b) res.learn(off + b, s.get(b));
  }
  ctx.decide();
}

void TwoRoundProtocol::on_message(SyncContext& ctx) {
  if (ctx.round() != 1 || choice_.query_all) return;
  const auto i = static_cast<std::size_t>(ctx.self());
  const std::int64_t ell = picked_[i];
  const PartialBits& res = res_[i];
  BitString s(static_cast<std::size_t>(scheme_.width(ell)));
  const auto off = static_cast<std::size_t>(scheme_.first(ell) - 1);
  for (std::size_t b = 0; b < s.width(); ++b) s.set(b, res.get(off + b));
  ctx.broadcast(std::make_shared<SubmissionPayload>(ell, 0, std::move(s)));
}

// ---------------------------------------------------------------- Algs. 4 and 5

void LogRoundProtocol::setup(const SimConfig& cfg) {
  cfg_ = cfg;
  if (boosting_ && cfg.mode != CommMode::kBroadcast) {
    throw ConfigError("alg5-broadcast requires broadcast communication mode");
  }
  const Rational c = cfg.constant("c", Rational(1));
  const long double mult = 8.0L * (as_ld(c) + (boosting_ ? 2.0L : 1.0L));
  phi_ = logn_phi(cfg.n, cfg.k, cfg.gamma(), mult);
  const IntervalScheme base = IntervalScheme::make(cfg.n, phi_);
  top_level_ = ceil_lg(base.count);
  schemes_.clear();
  thresholds_.clear();
  for (int level = 0; level <= top_level_; ++level) {
    schemes_.push_back(IntervalScheme::make(cfg.n, phi_ << level));
    thresholds_.push_back(level_threshold(level, phi_, cfg.k, cfg.gamma(), cfg.n));
  }
  labels_.assign(static_cast<std::size_t>(top_level_) + 1, {});
  labeled_.assign(static_cast<std::size_t>(top_level_) + 1, {});
  for (int level = 0; level <= top_level_; ++level) {
    labels_[static_cast<std::size_t>(level)].assign(static_cast<std::size_t>(scheme(level).count), -1);
    labeled_[static_cast<std::size_t>(level)].resize(static_cast<std::size_t>(scheme(level).count));
  }
  boost_log_.clear();
  pending_level_ = -1;
  pending_iteration_ = -1;
  const auto slots = static_cast<std::size_t>(cfg.k) + 1;
  res_.assign(slots, PartialBits(static_cast<std::size_t>(cfg.n)));
  picked_.assign(slots, 0);
  built_.assign(slots, BitString());
  ok_.assign(slots, 0);
  stats_ = FastStats{};
  stats_.levels = top_level_ + 1;
  stats_.level_cost.assign(static_cast<std::size_t>(top_level_) + 1, 0);
  stats_.level_samples.assign(static_cast<std::size_t>(top_level_) + 1, 0);
}

std::vector<std::int64_t> LogRoundProtocol::children(int level, std::int64_t ell) const {
  std::vector<std::int64_t> out;
  const std::int64_t below = scheme(level - 1).count;
  for (const std::int64_t u : {2 * ell - 1, 2 * ell}) {
    if (u <= below) out.push_back(u);
  }
  return out;
}

const IntervalRound* LogRoundProtocol::interval_round(std::int64_t) const {
  if (current_.level >= top_level_) return nullptr;
  return &current_;
}

void LogRoundProtocol::plan_round(std::int64_t round, const std::vector<const Envelope*>& shared) {
  const auto main_step = [&](int level) {
    current_ = IntervalRound{};
    current_.level = level;
    current_.iteration = -1;
    current_.scheme = scheme(level);
    for (std::int64_t ell = 1; ell <= scheme(level).count; ++ell) current_.open.push_back(ell);
    current_.threshold = thresholds_[static_cast<std::size_t>(level)];
  };
  if (round == 1) {
    main_step(0);
    return;
  }
  const int level = pending_level_;
  SubmissionDigest digest(scheme(level), level, cfg_.k);
  digest.add_all(shared);
  digest.seal();
  const Rational& t = thresholds_[static_cast<std::size_t>(level)];
  if (!boosting_) {
    auto& slot = labeled_[static_cast<std::size_t>(level)];
    for (std::int64_t u = 1; u <= scheme(level).count; ++u) {
      slot[static_cast<std::size_t>(u - 1)] = IntervalCandidates::make(scheme(level).first(u), digest.frequent(u, t));
    }
    main_step(level + 1);
    return;
  }
  const int j = pending_iteration_ < 0 ? 0 : pending_iteration_ + 1;
  if (pending_iteration_ < 0) {
    open_.clear();
    for (std::int64_t ell = 1; ell <= scheme(level).count; ++ell) open_.push_back(ell);
  }
  const Rational limit = Rational(4) / cfg_.gamma();
  const Rational tj = t * Rational(std::int64_t{1} << j);
  std::vector<std::int64_t> still;
  for (const std::int64_t ell : open_) {
    auto fs = digest.frequent(ell, tj);
    if (Rational(static_cast<std::int64_t>(fs.size())) <= limit) {
      labels_[static_cast<std::size_t>(level)][static_cast<std::size_t>(ell - 1)] = j;
      labeled_[static_cast<std::size_t>(level)][static_cast<std::size_t>(ell - 1)] =
          IntervalCandidates::make(scheme(level).first(ell), std::move(fs));
    } else {
      still.push_back(ell);
    }
  }
  open_ = std::move(still);
  boost_log_.push_back({level, j, static_cast<std::int64_t>(open_.size()), scheme(level).count});
  if (open_.empty()) {
    main_step(level + 1);
    return;
  }
  if (j >= ceil_lg(scheme(level).count) + 1) {
    throw InvariantViolation("boosting left " + std::to_string(open_.size()) + " overloaded intervals at level " +
                             std::to_string(level));
  }
  current_ = IntervalRound{};
  current_.level = level;
  current_.iteration = j;
  current_.scheme = scheme(level);
  current_.open = open_;
  current_.threshold = t * Rational(std::int64_t{1} << (j + 1));
}

void LogRoundProtocol::begin_round(std::int64_t round, const std::vector<const Envelope*>& shared) {
  plan_round(round, shared);
  stats_.communication_rounds = round;
  pending_level_ = current_.level;
  pending_iteration_ = current_.iteration;
}

void LogRoundProtocol::on_query(SyncContext& ctx) {
  if (ctx.decided()) return;
  const auto i = static_cast<std::size_t>(ctx.self());
  const int level = current_.level;
  const auto pick = ctx.rng().below(static_cast<std::uint64_t>(current_.open.size()));
  const std::int64_t ell = current_.open[static_cast<std::size_t>(pick)];
  picked_[i] = ell;
  const IntervalScheme& s = scheme(level);
  std::int64_t cost = 0;
  if (level == 0) {
    ctx.request_range(s.first(ell), s.width(ell));
    cost = s.width(ell);
  } else {
    const auto& below = labeled_[static_cast<std::size_t>(level - 1)];
    for (const std::int64_t u : children(level, ell)) {
      const auto& c = below[static_cast<std::size_t>(u - 1)];
      request_tree(ctx, c);
      cost += c.cost();
    }
  }
  stats_.level_cost[static_cast<std::size_t>(level)] += cost;
  stats_.level_samples[static_cast<std::size_t>(level)] += 1;
}

void LogRoundProtocol::on_response(SyncContext& ctx) {
  if (ctx.decided()) return;
  const auto i = static_cast<std::size_t>(ctx.self());
  const int level = current_.level;
  const std::int64_t ell = picked_[i];
  const IntervalScheme& s = scheme(level);
  BitString built(static_cast<std::size_t>(s.width(ell)));
  bool ok = true;
  if (level == 0) {
    built = ctx.answers().front().bits;
  } else {
    std::size_t cursor = 0;
    const auto& below = labeled_[static_cast<std::size_t>(level - 1)];
    for (const std::int64_t u : children(level, ell)) {
      const auto& c = below[static_cast<std::size_t>(u - 1)];
      stats_.max_child_cost = std::max(stats_.max_child_cost, c.cost());
      BitString part;
      if (!walk_candidates(c, ctx.answers(), cursor, part)) {
        ok = false;
        ++stats_.determine_failures;
        if (ctx.tracing()) ctx.trace({{"determine", "failed"}, {"level", level - 1}, {"interval", u}});
        break;
      }
      built.assign(static_cast<std::size_t>(scheme(level - 1).first(u) - s.first(ell)), part);
    }
  }
  ok_[i] = ok ? 1 : 0;
  if (ok) {
    const auto off = static_cast<std::size_t>(s.first(ell) - 1);
    for (std::size_t b = 0; b < built.width(); ++b) res_[i].learn(off + b, built.get(b));
  }
  built_[i] = std::move(built);
  if (level == top_level_) ctx.decide();
}

void LogRoundProtocol::on_message(SyncContext& ctx) {
  const auto i = static_cast<std::size_t>(ctx.self());
  if (current_.level == top_level_ || !ok_[i]) return;
  ctx.broadcast(std::make_shared<SubmissionPayload>(picked_[i], current_.level, built_[i]));
}

}  // namespace drsim
