#include "drsim/event_log.hpp"

#include <istream>
#include <ostream>

namespace drsim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kQuery:
      return "query";
    case EventKind::kSend:
      return "send";
    case EventKind::kDeliver:
      return "deliver";
    case EventKind::kCrash:
      return "crash";
    case EventKind::kCorrupt:
      return "corrupt";
    case EventKind::kDecide:
      return "decide";
    case EventKind::kTrace:
      return "trace";
  }
  return "trace";
}

EventKind parse_event_kind(const std::string& text) {
  for (auto k : {EventKind::kQuery, EventKind::kSend, EventKind::kDeliver, EventKind::kCrash,
                 EventKind::kCorrupt, EventKind::kDecide, EventKind::kTrace}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown event kind: " + text);
}

nlohmann::json event_to_json(const Event& e) {
  nlohmann::json j;
  if (e.timed) {
    j["time"] = to_string(ticks_to_time(e.ticks));
    j["ticks"] = e.ticks;
  } else {
    j["round"] = e.round;
  }
  j["kind"] = to_string(e.kind);
  j["peer"] = e.peer;
  j["detail"] = e.detail;
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  if (j.contains("ticks")) {
    e.timed = true;
    e.ticks = j.at("ticks").get<Ticks>();
  } else if (j.contains("time")) {
    e.timed = true;
    const Rational t = parse_rational(j.at("time").get<std::string>());
    e.ticks = floor_of(t * Rational(kTicksPerUnit));
  } else {
    e.round = j.at("round").get<std::int64_t>();
  }
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.peer = j.value("peer", 0);
  if (j.contains("detail")) e.detail = j.at("detail");
  return e;
}

void EventLog::write_ndjson(std::ostream& out) const {
  for (const auto& e : events_) out << event_to_json(e).dump() << '\n';
}

std::vector<Event> EventLog::read_ndjson(std::istream& in) {
  std::vector<Event> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw ConfigError("event log line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace drsim
