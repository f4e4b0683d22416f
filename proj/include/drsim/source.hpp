#pragma once

#include <functional>
#include <vector>

#include "drsim/bits.hpp"
#include "drsim/model.hpp"

namespace drsim {

// The external bit array with per-peer query counters. Indices are 1-based.
class Source {
 public:
  Source(BitString bits, int k);

  std::int64_t n() const { return static_cast<std::int64_t>(bits_.width()); }
  const BitString& bits() const { return bits_; }

  bool query_bit(PeerId p, std::int64_t index);
  BitString query_range(PeerId p, std::int64_t first, std::int64_t len);
  std::int64_t count(PeerId p) const { return counts_.at(static_cast<std::size_t>(p)); }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  // Sync runs close the source outside the query sub-round.
  void set_open(bool open) { open_ = open; }
  void set_observer(std::function<void(PeerId, std::int64_t, std::int64_t)> fn) {
    observer_ = std::move(fn);
  }

 private:
  void check(PeerId p, std::int64_t first, std::int64_t len) const;

  BitString bits_;
  std::vector<std::int64_t> counts_;
  bool open_ = true;
  std::function<void(PeerId, std::int64_t, std::int64_t)> observer_;
};

// Uniform random input of width n from a seed.
BitString random_input(std::int64_t n, std::uint64_t seed);

}  // namespace drsim
