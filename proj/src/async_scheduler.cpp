#include "drsim/async_scheduler.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <tuple>

#include "drsim/source.hpp"

namespace drsim {
namespace detail {

namespace {

struct Pending {
  Ticks at;
  PeerId sender;
  std::uint64_t seq;
  PeerId recipient;
  std::shared_ptr<const Envelope> env;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const {
    return std::tie(a.at, a.sender, a.seq, a.recipient) > std::tie(b.at, b.sender, b.seq, b.recipient);
  }
};

}  // namespace

class AsyncEngine {
 public:
  AsyncEngine(const SimConfig& cfg, const BitString& input, AsyncProtocol& proto, const FaultPlan& plan,
              const AsyncObserver& observer)
      : cfg_(cfg),
        k_(cfg.k),
        source_(input, cfg.k),
        proto_(proto),
        plan_(plan),
        observer_(observer),
        crashed_(static_cast<std::size_t>(k_) + 1, false),
        activations_(static_cast<std::size_t>(k_) + 1, 0),
        decided_at_(static_cast<std::size_t>(k_) + 1, -1),
        log_(cfg.record_events) {
    for (PeerId p = 0; p <= k_; ++p) streams_.emplace_back(peer_seed(cfg.seed, p));
    if (log_.enabled()) {
      source_.set_observer([this](PeerId p, std::int64_t first, std::int64_t len) {
        Event e;
        e.timed = true;
        e.ticks = now_;
        e.kind = EventKind::kQuery;
        e.peer = p;
        e.detail = {{"first", first}, {"len", len}};
        log_.add(std::move(e));
      });
    }
    metrics_.seed = cfg.seed;
  }

  RunResult run() {
    plan_.validate(cfg_);
    proto_.setup(cfg_);
    const std::int64_t cap = cfg_.effective_round_cap();
    for (PeerId p = 1; p <= k_; ++p) activate(p, nullptr);
    std::int64_t events = 0;
    while (!queue_.empty()) {
      if (events >= cap) {
        RunResult partial = finish(events);
        throw NonTermination("event cap " + std::to_string(cap) + " exceeded", partial.metrics);
      }
      Pending next = queue_.top();
      queue_.pop();
      now_ = next.at;
      ++events;
      if (crashed_[static_cast<std::size_t>(next.recipient)]) continue;
      if (log_.enabled()) {
        Event e;
        e.timed = true;
        e.ticks = now_;
        e.kind = EventKind::kDeliver;
        e.peer = next.recipient;
        e.detail = {{"from", next.sender}, {"seq", next.seq}};
        log_.add(std::move(e));
      }
      activate(next.recipient, next.env.get());
      if (observer_) {
        AsyncStepView view;
        view.events = events;
        view.now = now_;
        view.active = next.recipient;
        view.crashed = &crashed_;
        view.decided_at = &decided_at_;
        observer_(view);
      }
    }
    for (PeerId p = 1; p <= k_; ++p) {
      if (!crashed_[static_cast<std::size_t>(p)] && decided_at_[static_cast<std::size_t>(p)] < 0) {
        throw LivenessError("no pending events but peer " + std::to_string(p) + " has not terminated");
      }
    }
    return finish(events);
  }

  Ticks now() const { return now_; }
  const SimConfig& config() const { return cfg_; }
  int k() const { return k_; }
  std::int64_t n() const { return cfg_.n; }
  Stream& rng(PeerId p) { return streams_[static_cast<std::size_t>(p)]; }
  bool query_bit(PeerId p, std::int64_t i) { return source_.query_bit(p, i); }
  BitString query_range(PeerId p, std::int64_t first, std::int64_t len) {
    return source_.query_range(p, first, len);
  }

  void send(PeerId p, PeerId to, PayloadPtr payload) {
    if (to < 1 || to > k_) throw ConfigError("send to unknown peer " + std::to_string(to));
    Envelope e;
    e.sender = p;
    e.recipients = {to};
    e.bits = payload ? payload->bits() : 0;
    e.payload = std::move(payload);
    e.sent_at = now_;
    e.seq = seq_++;
    e.from_honest = true;
    if (crashing_ == p) {
      crash_batch_.push_back(std::move(e));
    } else {
      post(std::move(e));
    }
  }

  void send_all(PeerId p, PayloadPtr payload) {
    for (PeerId q = 1; q <= k_; ++q) {
      if (q != p) send(p, q, payload);
    }
  }

  void decide(PeerId p) {
    if (decided_at_[static_cast<std::size_t>(p)] >= 0) return;
    decided_at_[static_cast<std::size_t>(p)] = now_;
    if (log_.enabled()) {
      Event e;
      e.timed = true;
      e.ticks = now_;
      e.kind = EventKind::kDecide;
      e.peer = p;
      log_.add(std::move(e));
    }
  }
  bool decided(PeerId p) const { return decided_at_[static_cast<std::size_t>(p)] >= 0; }
  bool tracing() const { return log_.enabled(); }
  void trace(PeerId p, nlohmann::json detail) {
    if (!log_.enabled()) return;
    Event e;
    e.timed = true;
    e.ticks = now_;
    e.kind = EventKind::kTrace;
    e.peer = p;
    e.detail = std::move(detail);
    log_.add(std::move(e));
  }

 private:
  void activate(PeerId p, const Envelope* env) {
    const auto i = static_cast<std::size_t>(p);
    const std::int64_t index = activations_[i]++;
    const auto it = plan_.async_crashes.find(p);
    const bool crashing = it != plan_.async_crashes.end() && it->second.activation == index;
    if (crashing) crashing_ = p;
    AsyncContext ctx(this, p);
    if (env == nullptr) {
      proto_.on_start(ctx);
    } else {
      proto_.on_deliver(ctx, *env);
    }
    if (crashing) {
      crashing_ = 0;
      for (auto& e : crash_cut(std::move(crash_batch_), it->second.delivered)) post(std::move(e));
      crash_batch_.clear();
      crashed_[i] = true;
      if (log_.enabled()) {
        Event e;
        e.timed = true;
        e.ticks = now_;
        e.kind = EventKind::kCrash;
        e.peer = p;
        e.detail = {{"activation", index}, {"delivered", it->second.delivered}};
        log_.add(std::move(e));
      }
    }
  }

  void post(Envelope e) {
    const PeerId to = e.recipients.front();
    DelayQuery q;
    q.sender = e.sender;
    q.recipient = to;
    q.sent_at = e.sent_at;
    q.seq = e.seq;
    q.link_index = link_counts_[{e.sender, to}]++;
    q.tag = e.payload ? e.payload->tag : 0;
    const Ticks d = plan_.delays ? plan_.delays->delay(q) : kTicksPerUnit;
    if (d < 1 || d > kTicksPerUnit) {
      throw DelayError("delay must lie in (0, 1] time units, got " + std::to_string(d) + " ticks");
    }
    e.deliver_at = e.sent_at + d;
    if (e.from_honest && to != e.sender) {
      metrics_.m_total += 1;
      metrics_.s_max = std::max(metrics_.s_max, e.bits);
    }
    if (log_.enabled()) {
      Event ev;
      ev.timed = true;
      ev.ticks = now_;
      ev.kind = EventKind::kSend;
      ev.peer = e.sender;
      ev.detail = {{"to", e.recipients}, {"bits", e.bits}, {"honest", e.from_honest},
                   {"deliver_ticks", e.deliver_at}, {"tag", q.tag}};
      log_.add(std::move(ev));
    }
    auto shared = std::make_shared<const Envelope>(std::move(e));
    queue_.push(Pending{shared->deliver_at, shared->sender, shared->seq, to, shared});
  }

  RunResult finish(std::int64_t events) {
    RunResult r;
    r.rounds = events;
    r.outputs.resize(static_cast<std::size_t>(k_) + 1);
    r.honest.assign(static_cast<std::size_t>(k_) + 1, false);
    r.finish = decided_at_;
    metrics_.q_per_peer = source_.counts();
    metrics_.q_max = 0;
    Ticks t = 0;
    bool correct = true;
    for (PeerId p = 1; p <= k_; ++p) {
      const auto i = static_cast<std::size_t>(p);
      r.outputs[i] = proto_.output(p);
      if (crashed_[i]) continue;
      r.honest[i] = true;
      metrics_.q_max = std::max(metrics_.q_max, metrics_.q_per_peer[i]);
      t = std::max(t, decided_at_[i]);
      const Output& o = r.outputs[i];
      if (!(o.complete() && o.values == source_.bits())) correct = false;
    }
    metrics_.t = ticks_to_time(t);
    metrics_.correct = correct;
    r.metrics = metrics_;
    r.log = std::move(log_);
    return r;
  }

  const SimConfig& cfg_;
  int k_;
  Source source_;
  AsyncProtocol& proto_;
  const FaultPlan& plan_;
  const AsyncObserver& observer_;

  Ticks now_ = 0;
  std::vector<Stream> streams_;
  std::vector<bool> crashed_;
  std::vector<std::int64_t> activations_;
  std::vector<std::int64_t> decided_at_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::map<std::pair<PeerId, PeerId>, std::uint64_t> link_counts_;
  PeerId crashing_ = 0;
  std::vector<Envelope> crash_batch_;
  std::uint64_t seq_ = 0;
  RunMetrics metrics_;
  EventLog log_;
};

}  // namespace detail

Ticks AsyncContext::now() const { return engine_->now(); }
const SimConfig& AsyncContext::config() const { return engine_->config(); }
int AsyncContext::k() const { return engine_->k(); }
std::int64_t AsyncContext::n() const { return engine_->n(); }
Stream& AsyncContext::rng() { return engine_->rng(self_); }
bool AsyncContext::query_bit(std::int64_t index) { return engine_->query_bit(self_, index); }
BitString AsyncContext::query_range(std::int64_t first, std::int64_t len) {
  return engine_->query_range(self_, first, len);
}
void AsyncContext::send(PeerId to, PayloadPtr payload) { engine_->send(self_, to, std::move(payload)); }
void AsyncContext::send_all(PayloadPtr payload) { engine_->send_all(self_, std::move(payload)); }
void AsyncContext::decide() { engine_->decide(self_); }
bool AsyncContext::decided() const { return engine_->decided(self_); }
bool AsyncContext::tracing() const { return engine_->tracing(); }
void AsyncContext::trace(nlohmann::json detail) { engine_->trace(self_, std::move(detail)); }

RunResult run_async(const SimConfig& cfg, const BitString& input, AsyncProtocol& protocol, const FaultPlan& plan,
                    const AsyncObserver& observer) {
  cfg.validate();
  if (cfg.timing != Timing::kAsync) throw ConfigError("run_async needs asynchronous timing");
  if (static_cast<std::int64_t>(input.width()) != cfg.n) throw ConfigError("input width does not match n");
  detail::AsyncEngine engine(cfg, input, protocol, plan, observer);
  return engine.run();
}

}  // namespace drsim
