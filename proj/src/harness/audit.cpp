#include "drsim/harness/audit.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace drsim::harness {

AuditResult audit_events(const std::vector<Event>& events, int k, bool async) {
  AuditResult a;
  for (const auto& e : events) {
    k = std::max(k, e.peer);
    async = async || e.timed;
    if (e.kind == EventKind::kCorrupt && e.detail.contains("set")) {
      for (const auto& p : e.detail.at("set")) k = std::max(k, p.get<int>());
    }
  }
  a.k = k;
  a.events = static_cast<std::int64_t>(events.size());
  const auto slots = static_cast<std::size_t>(k) + 1;
  a.q_per_peer.assign(slots, 0);
  a.faulty.assign(slots, false);
  std::vector<std::int64_t> decided(slots, -1);
  for (const auto& e : events) {
    const auto p = static_cast<std::size_t>(e.peer);
    switch (e.kind) {
      case EventKind::kQuery:
        a.q_per_peer[p] += e.detail.at("len").get<std::int64_t>();
        break;
      case EventKind::kCrash:
        a.faulty[p] = true;
        break;
      case EventKind::kCorrupt:
        for (const auto& q : e.detail.at("set")) a.faulty[static_cast<std::size_t>(q.get<int>())] = true;
        break;
      case EventKind::kDecide: {
        const std::int64_t at = e.timed ? e.ticks : e.detail.value("finish", e.round);
        if (decided[p] < 0) decided[p] = at;
        break;
      }
      case EventKind::kSend: {
        if (!e.detail.value("honest", true)) break;
        const auto& to = e.detail.at("to");
        std::int64_t count = 0;
        if (to.is_string()) {
          count = k - 1;
        } else {
          for (const auto& q : to) count += q.get<int>() != e.peer ? 1 : 0;
        }
        a.m_total += count;
        if (count > 0) a.s_max = std::max(a.s_max, e.detail.at("bits").get<std::int64_t>());
        break;
      }
      default:
        break;
    }
  }
  std::int64_t t = 0;
  for (int p = 1; p <= k; ++p) {
    const auto i = static_cast<std::size_t>(p);
    if (a.faulty[i]) continue;
    a.q_max = std::max(a.q_max, a.q_per_peer[i]);
    t = std::max(t, decided[i]);
  }
  a.t = async ? ticks_to_time(t) : Rational(t);
  return a;
}

AuditResult audit_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<Event> events = EventLog::read_ndjson(in);
  int k = 0;
  bool async = false;
  nlohmann::json meta;
  const std::filesystem::path meta_path = path.string() + ".metrics.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream m(meta_path, std::ios::binary);
    meta = nlohmann::json::parse(m);
    k = meta.value("k", 0);
    async = meta.value("timing", std::string("sync")) == "async";
  }
  AuditResult a = audit_events(events, k, async);
  if (meta.is_object()) {
    a.compared = true;
    auto check = [&](const char* name, const std::string& got) {
      if (!meta.contains(name)) return;
      const auto& v = meta.at(name);
      const std::string want = v.is_string() ? v.get<std::string>() : v.dump();
      if (want != got) a.mismatches.push_back(std::string(name) + ": reported " + want + ", recomputed " + got);
    };
    check("q_max", std::to_string(a.q_max));
    check("m_total", std::to_string(a.m_total));
    check("s_max", std::to_string(a.s_max));
    check("t", to_string(a.t));
  }
  return a;
}

}  // namespace drsim::harness
