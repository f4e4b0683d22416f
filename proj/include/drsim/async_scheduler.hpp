#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/bits.hpp"
#include "drsim/fault_plan.hpp"
#include "drsim/model.hpp"
#include "drsim/rng.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

namespace detail {
class AsyncEngine;
}

class AsyncContext {
 public:
  PeerId self() const { return self_; }
  Ticks now() const;
  const SimConfig& config() const;
  int k() const;
  std::int64_t n() const;
  Stream& rng();

  bool query_bit(std::int64_t index);
  BitString query_range(std::int64_t first, std::int64_t len);

  void send(PeerId to, PayloadPtr payload);
  // Every other peer.
  void send_all(PayloadPtr payload);

  void decide();
  bool decided() const;

  bool tracing() const;
  void trace(nlohmann::json detail);

 private:
  friend class detail::AsyncEngine;
  AsyncContext(detail::AsyncEngine* engine, PeerId self) : engine_(engine), self_(self) {}
  detail::AsyncEngine* engine_;
  PeerId self_;
};

class AsyncProtocol {
 public:
  virtual ~AsyncProtocol() = default;
  virtual std::string name() const = 0;
  virtual void setup(const SimConfig& cfg) = 0;
  virtual void on_start(AsyncContext& ctx) = 0;
  virtual void on_deliver(AsyncContext& ctx, const Envelope& env) = 0;
  virtual Output output(PeerId p) const = 0;
};

struct AsyncStepView {
  std::int64_t events = 0;
  Ticks now = 0;
  PeerId active = 0;
  const std::vector<bool>* crashed = nullptr;
  const std::vector<std::int64_t>* decided_at = nullptr;  // ticks, -1 = undecided
};
using AsyncObserver = std::function<void(const AsyncStepView&)>;

// Delivers every message with the plan's delay policy (unit delay when
// unset). T is the latest honest decision time in units.
RunResult run_async(const SimConfig& cfg, const BitString& input, AsyncProtocol& protocol,
                    const FaultPlan& plan, const AsyncObserver& observer = {});

}  // namespace drsim
