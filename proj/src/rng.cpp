#include "drsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace drsim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t label_tag(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t state = master ^ (tag * 0xd1b54a32d192ed03ULL);
  splitmix64(state);
  return splitmix64(state);
}

std::uint64_t peer_seed(std::uint64_t master, int peer) {
  return derive_seed(master, static_cast<std::uint64_t>(peer) + 1);
}

std::uint64_t adversary_seed(std::uint64_t master) { return derive_seed(master, label_tag("adversary")); }

double unit_from_word(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

namespace {

template <class Next>
std::uint64_t bounded(Next&& next, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform draw over an empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t w = next();
    if (w < limit) return w % bound;
  }
}

}  // namespace

std::uint64_t Stream::below(std::uint64_t bound) {
  return bounded([this] { return next(); }, bound);
}

std::int64_t Stream::between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Stream::unit() { return unit_from_word(next()); }

std::uint64_t TapeSource::next() {
  if (pos_ >= tape_.size()) throw std::runtime_error("random tape exhausted during replay");
  return tape_[pos_++];
}

std::uint64_t below_from(WordSource& src, std::uint64_t bound) {
  return bounded([&src] { return src.next(); }, bound);
}

std::uint64_t sample_binomial(WordSource& src, std::uint64_t trials, long double p) {
  if (p <= 0.0L || trials == 0) return 0;
  if (p >= 1.0L) return trials;
  const long double u = static_cast<long double>(unit_from_word(src.next()));
  long double pk = std::exp(static_cast<long double>(trials) * std::log1p(-p));
  long double cdf = pk;
  const long double odds = p / (1.0L - p);
  std::uint64_t k = 0;
  while (u >= cdf && k < trials) {
    pk *= static_cast<long double>(trials - k) / static_cast<long double>(k + 1) * odds;
    ++k;
    cdf += pk;
    if (pk == 0.0L) break;
  }
  return k;
}

}  // namespace drsim
