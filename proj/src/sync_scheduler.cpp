#include "drsim/sync_scheduler.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "drsim/source.hpp"

namespace drsim {

void ByzOutbox::check(PeerId from, bool to_all) {
  if (!corrupt_.contains(from)) {
    throw SchedulerViolation("byzantine send from non-corrupt peer " + std::to_string(from));
  }
  if (mode_ == CommMode::kBroadcast) {
    if (!to_all) throw SchedulerViolation("broadcast mode: corrupt peers may only broadcast");
    if (std::find(broadcasters_.begin(), broadcasters_.end(), from) != broadcasters_.end()) {
      throw SchedulerViolation("broadcast mode: one message per peer per round");
    }
    broadcasters_.push_back(from);
  }
}

void ByzOutbox::send(PeerId from, PeerId to, PayloadPtr payload) {
  multicast(from, std::vector<PeerId>{to}, std::move(payload));
}

void ByzOutbox::multicast(PeerId from, std::vector<PeerId> to, PayloadPtr payload) {
  check(from, false);
  Envelope e;
  e.sender = from;
  e.recipients = std::move(to);
  e.bits = payload ? payload->bits() : 0;
  e.payload = std::move(payload);
  e.sent_round = round_;
  e.deliver_round = round_ + 1;
  e.from_honest = false;
  out_.push_back(std::move(e));
}

void ByzOutbox::broadcast(PeerId from, PayloadPtr payload) {
  check(from, true);
  Envelope e;
  e.sender = from;
  e.to_all = true;
  e.bits = payload ? payload->bits() : 0;
  e.payload = std::move(payload);
  e.sent_round = round_;
  e.deliver_round = round_ + 1;
  e.from_honest = false;
  out_.push_back(std::move(e));
}

namespace detail {

class SyncEngine {
 public:
  SyncEngine(const SimConfig& cfg, const BitString& input, SyncProtocol& proto, const FaultPlan& plan,
             const SyncObserver& observer)
      : cfg_(cfg),
        k_(cfg.k),
        source_(input, cfg.k),
        proto_(proto),
        plan_(plan),
        observer_(observer),
        crashed_(static_cast<std::size_t>(k_) + 1, false),
        ever_faulty_(static_cast<std::size_t>(k_) + 1, false),
        corrupt_(k_),
        decided_at_(static_cast<std::size_t>(k_) + 1, -1),
        direct_(static_cast<std::size_t>(k_) + 1),
        inboxes_(static_cast<std::size_t>(k_) + 1),
        answers_(static_cast<std::size_t>(k_) + 1),
        sent_broadcast_(static_cast<std::size_t>(k_) + 1, -1),
        log_(cfg.record_events) {
    streams_.reserve(static_cast<std::size_t>(k_) + 1);
    for (PeerId p = 0; p <= k_; ++p) streams_.emplace_back(peer_seed(cfg.seed, p));
    for (PeerId p = 0; p <= k_; ++p) {
      inboxes_[static_cast<std::size_t>(p)].shared = &shared_pool_;
      inboxes_[static_cast<std::size_t>(p)].direct = &direct_[static_cast<std::size_t>(p)];
    }
    if (log_.enabled()) {
      source_.set_observer([this](PeerId p, std::int64_t first, std::int64_t len) {
        Event e;
        e.round = round_;
        e.kind = EventKind::kQuery;
        e.peer = p;
        e.detail = {{"first", first}, {"len", len}};
        log_.add(std::move(e));
      });
    }
    adversary_rng_ = Stream(adversary_seed(cfg.seed));
    metrics_.seed = cfg.seed;
  }

  RunResult run() {
    if (input_width() != cfg_.n) throw ConfigError("input width does not match n");
    plan_.validate(cfg_);
    proto_.setup(cfg_);
    const std::int64_t cap = cfg_.effective_round_cap();
    for (round_ = 1;; ++round_) {
      if (round_ > cap) {
        --round_;
        RunResult partial = finish();
        throw NonTermination("round cap " + std::to_string(cap) + " exceeded", partial.metrics);
      }
      step_round();
      if (observer_) {
        SyncRoundView view;
        view.round = round_;
        view.crashed = &crashed_;
        view.ever_faulty = &ever_faulty_;
        view.corrupt = &corrupt_;
        view.queries = &source_.counts();
        view.decided_at = &decided_at_;
        observer_(view);
      }
      if (all_decided()) break;
    }
    return finish();
  }

  // Context plumbing.
  std::int64_t round() const { return round_; }
  Subround subround() const { return sub_; }
  const SimConfig& config() const { return cfg_; }
  int k() const { return k_; }
  std::int64_t n() const { return cfg_.n; }
  Stream& rng(PeerId p) { return streams_[static_cast<std::size_t>(p)]; }
  const Inbox& inbox(PeerId p) const { return inboxes_[static_cast<std::size_t>(p)]; }

  void request(PeerId p, std::int64_t first, std::int64_t len) {
    if (sub_ != Subround::kQuery) throw SchedulerViolation("request outside the query sub-round");
    QueryAnswer a;
    a.first = first;
    a.bits = source_.query_range(p, first, len);
    answers_[static_cast<std::size_t>(p)].push_back(std::move(a));
  }

  const std::vector<QueryAnswer>& answers(PeerId p) const {
    if (sub_ == Subround::kQuery) throw SchedulerViolation("query answers read before the response sub-round");
    return answers_[static_cast<std::size_t>(p)];
  }

  void send(PeerId p, bool to_all, std::vector<PeerId> to, PayloadPtr payload) {
    if (sub_ != Subround::kMessage) throw SchedulerViolation("send outside the message sub-round");
    if (cfg_.mode == CommMode::kBroadcast) {
      if (!to_all) throw SchedulerViolation("broadcast mode: peers may only broadcast");
      if (sent_broadcast_[static_cast<std::size_t>(p)] == round_) {
        throw SchedulerViolation("broadcast mode: one message per peer per round");
      }
      sent_broadcast_[static_cast<std::size_t>(p)] = round_;
    }
    for (PeerId q : to) {
      if (q < 1 || q > k_) throw ConfigError("send to unknown peer " + std::to_string(q));
    }
    Envelope e;
    e.sender = p;
    e.to_all = to_all;
    e.recipients = std::move(to);
    e.bits = payload ? payload->bits() : 0;
    e.payload = std::move(payload);
    e.sent_round = round_;
    e.deliver_round = round_ + 1;
    e.seq = seq_++;
    e.from_honest = true;
    if (crashing_ == p) {
      crash_batch_.push_back(std::move(e));
    } else {
      post(std::move(e));
    }
  }

  void decide(PeerId p, bool previous) {
    if (decided_at_[static_cast<std::size_t>(p)] >= 0) return;
    const std::int64_t at = previous ? round_ - 1 : round_;
    decided_at_[static_cast<std::size_t>(p)] = at;
    if (log_.enabled()) {
      Event e;
      e.round = round_;
      e.kind = EventKind::kDecide;
      e.peer = p;
      e.detail = {{"finish", at}};
      log_.add(std::move(e));
    }
  }
  bool decided(PeerId p) const { return decided_at_[static_cast<std::size_t>(p)] >= 0; }

  bool tracing() const { return log_.enabled(); }
  void trace(PeerId p, nlohmann::json detail) {
    if (!log_.enabled()) return;
    Event e;
    e.round = round_;
    e.kind = EventKind::kTrace;
    e.peer = p;
    e.detail = std::move(detail);
    log_.add(std::move(e));
  }

 private:
  std::int64_t input_width() const { return source_.n(); }

  bool active(PeerId p) const { return !crashed_[static_cast<std::size_t>(p)]; }

  const CrashPoint* crash_point(PeerId p) const {
    const auto it = plan_.crashes.find(p);
    if (it == plan_.crashes.end()) return nullptr;
    return &it->second;
  }

  void crash(PeerId p, Subround at) {
    crashed_[static_cast<std::size_t>(p)] = true;
    ever_faulty_[static_cast<std::size_t>(p)] = true;
    if (log_.enabled()) {
      Event e;
      e.round = round_;
      e.kind = EventKind::kCrash;
      e.peer = p;
      const CrashPoint* c = crash_point(p);
      e.detail = {{"subround", to_string(at)}, {"delivered", c ? c->delivered : std::vector<PeerId>{}}};
      log_.add(std::move(e));
    }
  }

  void post(Envelope e) {
    if (e.from_honest) {
      const std::int64_t count = e.to_all ? k_ - 1
                                          : static_cast<std::int64_t>(std::count_if(
                                                e.recipients.begin(), e.recipients.end(),
                                                [&](PeerId q) { return q != e.sender; }));
      metrics_.m_total += count;
      if (count > 0) metrics_.s_max = std::max(metrics_.s_max, e.bits);
    }
    if (log_.enabled()) {
      Event ev;
      ev.round = round_;
      ev.kind = EventKind::kSend;
      ev.peer = e.sender;
      nlohmann::json to = e.to_all ? nlohmann::json("all") : nlohmann::json(e.recipients);
      ev.detail = {{"to", to}, {"bits", e.bits}, {"honest", e.from_honest},
                   {"tag", e.payload ? e.payload->tag : 0}};
      if (e.payload) {
        const std::string d = e.payload->describe();
        if (!d.empty()) ev.detail["payload"] = d;
      }
      log_.add(std::move(ev));
    }
    current_.push_back(std::move(e));
  }

  void update_corruption() {
    if (!plan_.corrupt_schedule) return;
    std::vector<PeerId> now = plan_.corrupt_at(round_);
    if (static_cast<int>(now.size()) > plan_.budget || static_cast<int>(now.size()) > cfg_.fault_budget()) {
      throw InvariantViolation("corrupt set exceeds the fault budget in round " + std::to_string(round_));
    }
    PeerSet next(k_);
    for (PeerId p : now) {
      if (p < 1 || p > k_) throw ConfigError("corrupt schedule names unknown peer");
      next.insert(p);
      ever_faulty_[static_cast<std::size_t>(p)] = true;
    }
    if (!(next == corrupt_) || round_ == 1) {
      if (log_.enabled() && (!now.empty() || !(next == corrupt_))) {
        Event e;
        e.round = round_;
        e.kind = EventKind::kCorrupt;
        e.peer = now.empty() ? 0 : now.front();
        e.detail = {{"set", now}};
        log_.add(std::move(e));
      }
    }
    corrupt_ = std::move(next);
  }

  void step_round() {
    update_corruption();
    proto_.begin_round(round_, shared_pool_);
    for (auto& a : answers_) a.clear();

    sub_ = Subround::kQuery;
    source_.set_open(true);
    for (PeerId p = 1; p <= k_; ++p) {
      if (!active(p)) continue;
      const CrashPoint* c = crash_point(p);
      if (c && c->round == round_ && c->subround == Subround::kQuery) {
        crash(p, Subround::kQuery);
        continue;
      }
      if (corrupt_.contains(p)) continue;
      SyncContext ctx(this, p);
      proto_.on_query(ctx);
    }
    source_.set_open(false);

    sub_ = Subround::kResponse;
    for (PeerId p = 1; p <= k_; ++p) {
      if (!active(p)) continue;
      const CrashPoint* c = crash_point(p);
      if (c && c->round == round_ && c->subround == Subround::kResponse) {
        crash(p, Subround::kResponse);
        continue;
      }
      if (corrupt_.contains(p)) continue;
      SyncContext ctx(this, p);
      proto_.on_response(ctx);
    }

    sub_ = Subround::kMessage;
    current_.clear();
    for (PeerId p = 1; p <= k_; ++p) {
      if (!active(p) || corrupt_.contains(p)) continue;
      const CrashPoint* c = crash_point(p);
      const bool crashing = c && c->round == round_ && c->subround == Subround::kMessage;
      if (crashing) crashing_ = p;
      SyncContext ctx(this, p);
      proto_.on_message(ctx);
      if (crashing) {
        crashing_ = 0;
        for (auto& e : crash_cut(std::move(crash_batch_), c->delivered)) post(std::move(e));
        crash_batch_.clear();
        crash(p, Subround::kMessage);
      }
    }
    if (plan_.behavior && !corrupt_.empty()) {
      ByzView view;
      view.round = round_;
      view.config = &cfg_;
      view.corrupt = &corrupt_;
      view.corrupt_list = corrupt_.members();
      view.truth = &source_.bits();
      view.protocol = &proto_;
      view.last_round = &last_round_;
      view.rng = &adversary_rng_;
      ByzOutbox out(corrupt_, cfg_.mode, round_);
      plan_.behavior->act(view, out);
      for (auto& e : out.envelopes()) {
        e.seq = seq_++;
        post(std::move(e));
      }
    }

    // Deliver: this round's sends become next round's inboxes.
    delivered_.swap(current_);
    current_.clear();
    shared_pool_.clear();
    last_round_.clear();
    for (auto& d : direct_) d.clear();
    for (const Envelope& e : delivered_) {
      last_round_.push_back(&e);
      if (e.to_all) {
        shared_pool_.push_back(&e);
      } else {
        for (PeerId q : e.recipients) direct_[static_cast<std::size_t>(q)].push_back(&e);
      }
    }
  }

  bool all_decided() const {
    for (PeerId p = 1; p <= k_; ++p) {
      if (ever_faulty_[static_cast<std::size_t>(p)]) continue;
      if (decided_at_[static_cast<std::size_t>(p)] < 0) return false;
    }
    return true;
  }

  RunResult finish() {
    RunResult r;
    r.rounds = round_;
    r.outputs.resize(static_cast<std::size_t>(k_) + 1);
    r.honest.assign(static_cast<std::size_t>(k_) + 1, false);
    r.finish = decided_at_;
    metrics_.q_per_peer = source_.counts();
    metrics_.q_max = 0;
    std::int64_t t = 0;
    bool correct = true;
    for (PeerId p = 1; p <= k_; ++p) {
      const auto i = static_cast<std::size_t>(p);
      r.outputs[i] = proto_.output(p);
      if (ever_faulty_[i]) continue;
      r.honest[i] = true;
      metrics_.q_max = std::max(metrics_.q_max, metrics_.q_per_peer[i]);
      t = std::max(t, decided_at_[i]);
      const Output& o = r.outputs[i];
      if (!(o.complete() && o.values == source_.bits())) correct = false;
    }
    metrics_.t = Rational(t);
    metrics_.correct = correct;
    r.metrics = metrics_;
    r.log = std::move(log_);
    return r;
  }

  const SimConfig& cfg_;
  int k_;
  Source source_;
  SyncProtocol& proto_;
  const FaultPlan& plan_;
  const SyncObserver& observer_;

  std::int64_t round_ = 0;
  Subround sub_ = Subround::kQuery;
  std::vector<Stream> streams_;
  Stream adversary_rng_;
  std::vector<bool> crashed_;
  std::vector<bool> ever_faulty_;
  PeerSet corrupt_;
  std::vector<std::int64_t> decided_at_;

  std::deque<Envelope> current_;
  std::deque<Envelope> delivered_;
  std::vector<const Envelope*> shared_pool_;
  std::vector<const Envelope*> last_round_;
  std::vector<std::vector<const Envelope*>> direct_;
  std::vector<Inbox> inboxes_;
  std::vector<std::vector<QueryAnswer>> answers_;
  std::vector<std::int64_t> sent_broadcast_;
  PeerId crashing_ = 0;
  std::vector<Envelope> crash_batch_;
  std::uint64_t seq_ = 0;

  RunMetrics metrics_;
  EventLog log_;
};

}  // namespace detail

std::int64_t SyncContext::round() const { return engine_->round(); }
Subround SyncContext::subround() const { return engine_->subround(); }
const SimConfig& SyncContext::config() const { return engine_->config(); }
int SyncContext::k() const { return engine_->k(); }
std::int64_t SyncContext::n() const { return engine_->n(); }
Stream& SyncContext::rng() { return engine_->rng(self_); }
const Inbox& SyncContext::inbox() const { return engine_->inbox(self_); }
void SyncContext::request(std::int64_t index) { engine_->request(self_, index, 1); }
void SyncContext::request_range(std::int64_t first, std::int64_t len) { engine_->request(self_, first, len); }
const std::vector<QueryAnswer>& SyncContext::answers() const { return engine_->answers(self_); }
void SyncContext::send(PeerId to, PayloadPtr payload) {
  engine_->send(self_, false, std::vector<PeerId>{to}, std::move(payload));
}
void SyncContext::send(std::vector<PeerId> to, PayloadPtr payload) {
  engine_->send(self_, false, std::move(to), std::move(payload));
}
void SyncContext::broadcast(PayloadPtr payload) { engine_->send(self_, true, {}, std::move(payload)); }
void SyncContext::decide() { engine_->decide(self_, false); }
void SyncContext::decide_previous_round() { engine_->decide(self_, true); }
bool SyncContext::decided() const { return engine_->decided(self_); }
bool SyncContext::tracing() const { return engine_->tracing(); }
void SyncContext::trace(nlohmann::json detail) { engine_->trace(self_, std::move(detail)); }

RunResult run_sync(const SimConfig& cfg, const BitString& input, SyncProtocol& protocol, const FaultPlan& plan,
                   const SyncObserver& observer) {
  cfg.validate();
  if (cfg.timing != Timing::kSync) throw ConfigError("run_sync needs synchronous timing");
  detail::SyncEngine engine(cfg, input, protocol, plan, observer);
  return engine.run();
}

}  // namespace drsim
