#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/async_scheduler.hpp"
#include "drsim/sync_scheduler.hpp"

namespace drsim {

struct ProtocolInfo {
  std::string id;
  Timing timing;
  CommMode default_mode;
};

const std::vector<ProtocolInfo>& protocol_catalog();
const ProtocolInfo* find_protocol(const std::string& id);

// Null for ids of the other timing model; ConfigError for unknown ids.
std::unique_ptr<SyncProtocol> make_sync_protocol(const std::string& id);
std::unique_ptr<AsyncProtocol> make_async_protocol(const std::string& id, const nlohmann::json& options = {});

// Every peer reads the whole input in round 1. Protocol id "query-all".
class QueryAllProtocol final : public SyncProtocol {
 public:
  std::string name() const override { return "query-all"; }
  void setup(const SimConfig& cfg) override;
  void on_query(SyncContext& ctx) override;
  void on_response(SyncContext& ctx) override;
  void on_message(SyncContext&) override {}
  Output output(PeerId p) const override { return res_[static_cast<std::size_t>(p)]; }

 private:
  std::vector<PartialBits> res_;
};

// One run of cfg.protocol against the fault plan built from cfg.adversary and
// `adversary_params`.
RunResult run_configured(const SimConfig& cfg, const BitString& input, const nlohmann::json& adversary_params = {},
                         const nlohmann::json& protocol_options = {});

}  // namespace drsim
