#include "drsim/protocols.hpp"

#include "drsim/adversaries.hpp"
#include "drsim/byz_download.hpp"
#include "drsim/crash_async.hpp"
#include "drsim/crash_sync.hpp"
#include "drsim/fast_download.hpp"
#include "drsim/lower_bound.hpp"

namespace drsim {

const std::vector<ProtocolInfo>& protocol_catalog() {
  static const std::vector<ProtocolInfo> catalog = {
      {"alg1", Timing::kSync, CommMode::kBroadcast},
      {"alg3-2round", Timing::kSync, CommMode::kBroadcast},
      {"alg4-logn", Timing::kSync, CommMode::kBroadcast},
      {"alg5-broadcast", Timing::kSync, CommMode::kBroadcast},
      {"static-crash", Timing::kSync, CommMode::kPointToPoint},
      {"rapid-crash", Timing::kSync, CommMode::kPointToPoint},
      {"async-1crash", Timing::kAsync, CommMode::kPointToPoint},
      {"async-fcrash", Timing::kAsync, CommMode::kPointToPoint},
      {"query-all", Timing::kSync, CommMode::kPointToPoint},
      {"one-round-skip", Timing::kSync, CommMode::kBroadcast},
  };
  return catalog;
}

const ProtocolInfo* find_protocol(const std::string& id) {
  for (const auto& p : protocol_catalog()) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::unique_ptr<SyncProtocol> make_sync_protocol(const std::string& id) {
  if (!find_protocol(id)) throw ConfigError("unknown protocol id '" + id + "'");
  if (id == "alg1") return std::make_unique<Alg1Protocol>();
  if (id == "alg3-2round") return std::make_unique<TwoRoundProtocol>();
  if (id == "alg4-logn") return std::make_unique<LogRoundProtocol>(false);
  if (id == "alg5-broadcast") return std::make_unique<LogRoundProtocol>(true);
  if (id == "static-crash") return std::make_unique<StaticDownload>();
  if (id == "rapid-crash") return std::make_unique<RapidDownload>();
  if (id == "query-all") return std::make_unique<QueryAllProtocol>();
  if (id == "one-round-skip") return std::make_unique<OneRoundSkip>();
  return nullptr;
}

std::unique_ptr<AsyncProtocol> make_async_protocol(const std::string& id, const nlohmann::json& options) {
  if (!find_protocol(id)) throw ConfigError("unknown protocol id '" + id + "'");
  if (id == "async-1crash") return std::make_unique<SingleCrashDownload>();
  if (id == "async-fcrash") {
    bool unblock = true;
    if (options.is_object() && options.contains("unblock")) unblock = options.at("unblock").get<bool>();
    return std::make_unique<FCrashDownload>(unblock);
  }
  return nullptr;
}

void QueryAllProtocol::setup(const SimConfig& cfg) {
  res_.assign(static_cast<std::size_t>(cfg.k) + 1, PartialBits(static_cast<std::size_t>(cfg.n)));
}

void QueryAllProtocol::on_query(SyncContext& ctx) {
  if (ctx.round() == 1) ctx.request_range(1, ctx.n());
}

void QueryAllProtocol::on_response(SyncContext& ctx) {
  auto& res = res_[static_cast<std::size_t>(ctx.self())];
  for (const auto& a : ctx.answers()) {
    for (std::int64_t i = a.first; i <= a.last(); ++i) res.learn(static_cast<std::size_t>(i - 1), a.bit(i));
  }
  if (res.complete()) ctx.decide();
}

RunResult run_configured(const SimConfig& cfg, const BitString& input, const nlohmann::json& adversary_params,
                         const nlohmann::json& protocol_options) {
  const ProtocolInfo* info = find_protocol(cfg.protocol);
  if (!info) throw ConfigError("unknown protocol id '" + cfg.protocol + "'");
  if (info->timing != cfg.timing) throw ConfigError("protocol '" + cfg.protocol + "' needs the other timing model");
  const FaultPlan plan = make_fault_plan(cfg, adversary_params.is_null() ? nlohmann::json::object() : adversary_params);
  if (info->timing == Timing::kSync) {
    auto proto = make_sync_protocol(cfg.protocol);
    return run_sync(cfg, input, *proto, plan);
  }
  auto proto = make_async_protocol(cfg.protocol, protocol_options);
  return run_async(cfg, input, *proto, plan);
}

}  // namespace drsim
