#include "drsim/source.hpp"

#include <string>

#include "drsim/rng.hpp"

namespace drsim {

Source::Source(BitString bits, int k) : bits_(std::move(bits)), counts_(static_cast<std::size_t>(k) + 1, 0) {
  if (bits_.width() == 0) throw ConfigError("input must have at least one bit");
}

void Source::check(PeerId p, std::int64_t first, std::int64_t len) const {
  if (len < 0 || first < 1 || first + len - 1 > n()) {
    throw ConfigError("query index out of range: " + std::to_string(first) + " (n=" + std::to_string(n()) + ")");
  }
  if (!open_) throw SchedulerViolation("query issued outside the query sub-round");
  if (p < 1 || static_cast<std::size_t>(p) >= counts_.size()) {
    throw ConfigError("query from unknown peer " + std::to_string(p));
  }
}

bool Source::query_bit(PeerId p, std::int64_t index) {
  check(p, index, 1);
  ++counts_[static_cast<std::size_t>(p)];
  if (observer_) observer_(p, index, 1);
  return bits_.get(static_cast<std::size_t>(index - 1));
}

BitString Source::query_range(PeerId p, std::int64_t first, std::int64_t len) {
  check(p, first, len);
  counts_[static_cast<std::size_t>(p)] += len;
  if (observer_ && len > 0) observer_(p, first, len);
  return bits_.slice(static_cast<std::size_t>(first - 1), static_cast<std::size_t>(len));
}

BitString random_input(std::int64_t n, std::uint64_t seed) {
  Stream s(derive_seed(seed, label_tag("input")));
  BitString out(static_cast<std::size_t>(n));
  for (std::size_t w = 0; w < out.word_count(); ++w) out.data()[w] = s.next();
  // Clear bits beyond the width.
  const std::size_t tail = out.width() % 64;
  if (tail != 0) out.data()[out.word_count() - 1] &= (std::uint64_t{1} << tail) - 1;
  return out;
}

}  // namespace drsim
