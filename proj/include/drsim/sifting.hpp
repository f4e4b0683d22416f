#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "drsim/bits.hpp"
#include "drsim/model.hpp"
#include "drsim/rational.hpp"

namespace drsim {

struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class StringMultiset {
 public:
  explicit StringMultiset(std::size_t width = 0) : width_(width) {}

  // Throws std::invalid_argument on a width mismatch or a non-positive count.
  void add(const BitString& s, std::int64_t count = 1);
  std::int64_t count(const BitString& s) const;
  std::int64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }
  std::size_t width() const { return width_; }
  // Entries in ascending string order.
  std::vector<std::pair<BitString, std::int64_t>> entries() const;

 private:
  std::size_t width_;
  std::int64_t total_ = 0;
  std::unordered_map<BitString, std::int64_t, BitStringHash> counts_;
};

// Strings occurring at least t times, ascending.
std::vector<BitString> frequent_strings(const StringMultiset& s, const Rational& t);

struct Submission {
  PeerId sender = 0;
  std::int64_t interval = 0;
  BitString value;
};

// Drops every sender that submitted more than one distinct (interval, string)
// pair, then groups the remaining strings by interval.
std::map<std::int64_t, StringMultiset> sift_submissions(const std::vector<Submission>& subs);
std::vector<BitString> frequent_strings(const std::vector<Submission>& subs, std::int64_t interval,
                                        const Rational& t);

// Binary decision tree over distinct equal-width candidates. Internal nodes
// test an interval-relative bit (0-based); absolute index = offset + rel,
// where offset is the 1-based index of the interval's first bit.
class DecisionTree {
 public:
  struct Node {
    std::int64_t bit = -1;  // -1 for leaves
    int child[2] = {-1, -1};
    int leaf = -1;          // index into leaves()
  };

  std::int64_t offset() const { return offset_; }
  std::size_t width() const { return width_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<BitString>& leaves() const { return leaves_; }
  std::size_t internal_count() const { return nodes_.size() - leaves_.size(); }
  // Relative indices of the internal nodes, ascending and distinct per node.
  std::vector<std::int64_t> query_bits() const;
  // Walks from the root using bit(rel) and returns the leaf index.
  int walk(const std::function<bool(std::int64_t)>& bit) const;

 private:
  friend DecisionTree build_decision_tree(std::vector<BitString> candidates, std::int64_t offset);
  int build(std::size_t lo, std::size_t hi);

  std::int64_t offset_ = 1;
  std::size_t width_ = 0;
  std::vector<Node> nodes_;
  std::vector<BitString> leaves_;
};

// Splits on the smallest index where two candidates differ. Throws
// std::invalid_argument for an empty set, duplicates or mixed widths.
DecisionTree build_decision_tree(std::vector<BitString> candidates, std::int64_t offset = 1);

enum class Validation {
  kNone,
  kQueried,  // leaf must agree with the bits the walk queried
  kFull,     // leaf must agree with the oracle everywhere (extra oracle reads, not counted)
};

struct Determination {
  BitString value;
  std::int64_t queries = 0;
};

// Queries every internal-node bit (one batch) through `oracle(absolute index)`
// and walks to a leaf. Throws InconsistencyError when validation fails.
Determination determine(const DecisionTree& tree, const std::function<bool(std::int64_t)>& oracle,
                        Validation validation = Validation::kQueried);

}  // namespace drsim
