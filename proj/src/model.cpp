#include "drsim/model.hpp"

#include "drsim/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace drsim {

const char* to_string(CommMode m) {
  return m == CommMode::kBroadcast ? "broadcast" : "point-to-point";
}

const char* to_string(Subround s) {
  switch (s) {
    case Subround::kQuery:
      return "query";
    case Subround::kResponse:
      return "response";
    case Subround::kMessage:
      return "message";
  }
  return "?";
}

Rational ticks_to_time(Ticks t) { return Rational(t, kTicksPerUnit); }

Rational SimConfig::constant(const std::string& name, Rational fallback) const {
  const auto it = constants.find(name);
  return it == constants.end() ? fallback : it->second;
}

std::int64_t SimConfig::effective_round_cap() const {
  if (round_cap > 0) return round_cap;
  if (timing == Timing::kAsync) return 64 * n * k;
  const auto lgk = static_cast<std::int64_t>(std::ceil(std::log2(static_cast<double>(std::max(k, 1)))));
  return 8 * (n + k) * (lgk + 2);
}

void SimConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (n < 1) throw ConfigError("n must be at least 1");
  if (beta < Rational(0) || beta >= Rational(1)) throw ConfigError("beta must satisfy 0 <= beta < 1");
}

bool Envelope::addressed_to(PeerId p) const {
  return to_all || std::find(recipients.begin(), recipients.end(), p) != recipients.end();
}

std::int64_t Envelope::recipient_count(int k) const {
  if (to_all) return k - 1;
  return static_cast<std::int64_t>(recipients.size());
}

}  // namespace drsim

namespace drsim {

std::int64_t PeerSet::size() const {
  return static_cast<std::int64_t>(kernels().popcount(words_.data(), words_.size()));
}

bool PeerSet::empty() const {
  for (const auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

PeerSet& PeerSet::operator|=(const PeerSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

PeerSet& PeerSet::operator&=(const PeerSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

PeerSet PeerSet::minus(const PeerSet& o) const {
  PeerSet out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= ~o.words_[i];
  return out;
}

PeerSet PeerSet::intersect(const PeerSet& o) const {
  PeerSet out = *this;
  out &= o;
  return out;
}

std::vector<PeerId> PeerSet::members() const {
  std::vector<PeerId> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      const int b = __builtin_ctzll(bits);
      out.push_back(static_cast<PeerId>(w * 64 + b));
      bits &= bits - 1;
    }
  }
  return out;
}

}  // namespace drsim
