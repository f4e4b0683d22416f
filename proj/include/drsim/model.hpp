#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "drsim/bits.hpp"
#include "drsim/rational.hpp"

namespace drsim {

using PeerId = int;  // 1..k

enum class CommMode { kPointToPoint, kBroadcast };
enum class Timing { kSync, kAsync };
enum class Subround { kQuery, kResponse, kMessage };

const char* to_string(CommMode m);
const char* to_string(Subround s);

// Async time: exact rational with a fixed denominator.
using Ticks = std::int64_t;
inline constexpr Ticks kTicksPerUnit = Ticks{1} << 20;
Rational ticks_to_time(Ticks t);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchedulerViolation : std::logic_error {
  using std::logic_error::logic_error;
};
struct DelayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LivenessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::int64_t n = 0;
  int k = 0;
  Rational beta{0};
  CommMode mode = CommMode::kPointToPoint;
  Timing timing = Timing::kSync;
  std::string protocol;
  std::string adversary = "none";
  std::uint64_t seed = 0;
  std::map<std::string, Rational> constants;
  std::int64_t round_cap = 0;  // 0: default for the timing model
  bool record_events = false;

  Rational gamma() const { return Rational(1) - beta; }
  int fault_budget() const { return static_cast<int>(floor_of(beta * Rational(k))); }
  Rational constant(const std::string& name, Rational fallback) const;
  std::int64_t effective_round_cap() const;
  // Throws ConfigError when n, k or beta are out of range.
  void validate() const;
};

struct RunMetrics {
  std::int64_t q_max = 0;
  std::vector<std::int64_t> q_per_peer;  // index 0 unused
  Rational t{0};
  std::int64_t m_total = 0;
  std::int64_t s_max = 0;
  bool correct = false;
  std::uint64_t seed = 0;
};

// Honest-peer outputs; values are meaningful where `known` is set.
using Output = PartialBits;

struct NonTermination : std::runtime_error {
  NonTermination(const std::string& what, RunMetrics partial)
      : std::runtime_error(what), metrics(std::move(partial)) {}
  RunMetrics metrics;
};

// Message body. Protocols tag their payload types so receivers can check
// the kind without RTTI.
struct Payload {
  explicit Payload(std::uint32_t t) : tag(t) {}
  virtual ~Payload() = default;
  virtual std::int64_t bits() const = 0;
  virtual std::string describe() const { return {}; }
  std::uint32_t tag;
};
using PayloadPtr = std::shared_ptr<const Payload>;

template <class T>
const T* payload_as(const PayloadPtr& p) {
  return (p && p->tag == T::kTag) ? static_cast<const T*>(p.get()) : nullptr;
}

struct Envelope {
  PeerId sender = 0;
  bool to_all = false;              // every peer, the sender included
  std::vector<PeerId> recipients;   // used when !to_all
  PayloadPtr payload;
  std::int64_t bits = 0;
  std::int64_t sent_round = 0;
  std::int64_t deliver_round = 0;
  Ticks sent_at = 0;
  Ticks deliver_at = 0;
  std::uint64_t seq = 0;
  bool from_honest = true;

  bool addressed_to(PeerId p) const;
  std::int64_t recipient_count(int k) const;
};

}  // namespace drsim

namespace drsim {

// Set of peer ids 1..k as a bitmap.
class PeerSet {
 public:
  PeerSet() = default;
  explicit PeerSet(int k) : k_(k), words_((static_cast<std::size_t>(k) + 64) / 64, 0) {}

  int capacity() const { return k_; }
  bool contains(PeerId p) const {
    return p >= 0 && p <= k_ && ((words_[p >> 6] >> (p & 63)) & 1u);
  }
  void insert(PeerId p) { words_[p >> 6] |= std::uint64_t{1} << (p & 63); }
  void erase(PeerId p) { words_[p >> 6] &= ~(std::uint64_t{1} << (p & 63)); }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }
  std::int64_t size() const;
  bool empty() const;

  PeerSet& operator|=(const PeerSet& o);
  PeerSet& operator&=(const PeerSet& o);
  // this & ~o
  PeerSet minus(const PeerSet& o) const;
  PeerSet intersect(const PeerSet& o) const;
  std::vector<PeerId> members() const;

  friend bool operator==(const PeerSet& a, const PeerSet& b) { return a.words_ == b.words_; }

 private:
  int k_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace drsim
