#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/model.hpp"

namespace drsim {

enum class EventKind { kQuery, kSend, kDeliver, kCrash, kCorrupt, kDecide, kTrace };

const char* to_string(EventKind k);
EventKind parse_event_kind(const std::string& text);

struct Event {
  bool timed = false;  // async: `ticks` is set, otherwise `round`
  std::int64_t round = 0;
  Ticks ticks = 0;
  EventKind kind = EventKind::kTrace;
  PeerId peer = 0;
  nlohmann::json detail = nlohmann::json::object();
};

class EventLog {
 public:
  explicit EventLog(bool enabled = false) : enabled_(enabled) {}
  bool enabled() const { return enabled_; }
  void add(Event e) {
    if (enabled_) events_.push_back(std::move(e));
  }
  const std::vector<Event>& events() const { return events_; }

  void write_ndjson(std::ostream& out) const;
  static std::vector<Event> read_ndjson(std::istream& in);

 private:
  bool enabled_;
  std::vector<Event> events_;
};

nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

}  // namespace drsim
