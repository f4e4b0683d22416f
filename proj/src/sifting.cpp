#include "drsim/sifting.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace drsim {

void StringMultiset::add(const BitString& s, std::int64_t count) {
  if (count <= 0) throw std::invalid_argument("multiset count must be positive");
  if (counts_.empty() && total_ == 0 && width_ == 0) width_ = s.width();
  if (s.width() != width_) throw std::invalid_argument("multiset strings must share one width");
  counts_[s] += count;
  total_ += count;
}

std::int64_t StringMultiset::count(const BitString& s) const {
  const auto it = counts_.find(s);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::pair<BitString, std::int64_t>> StringMultiset::entries() const {
  std::vector<std::pair<BitString, std::int64_t>> out(counts_.begin(), counts_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<BitString> frequent_strings(const StringMultiset& s, const Rational& t) {
  if (t <= Rational(0)) throw std::invalid_argument("frequency threshold must be positive");
  std::vector<BitString> out;
  for (const auto& [str, c] : s.entries()) {
    // c >= num/den
    if (Rational(c) >= t) out.push_back(str);
  }
  return out;
}

std::map<std::int64_t, StringMultiset> sift_submissions(const std::vector<Submission>& subs) {
  std::map<PeerId, std::pair<const Submission*, bool>> first;  // sender -> (first pair, multi)
  for (const auto& s : subs) {
    auto [it, inserted] = first.emplace(s.sender, std::make_pair(&s, false));
    if (!inserted) {
      const Submission* f = it->second.first;
      if (f->interval != s.interval || !(f->value == s.value)) it->second.second = true;
    }
  }
  std::map<std::int64_t, StringMultiset> out;
  for (const auto& [sender, entry] : first) {
    if (entry.second) continue;
    const Submission& s = *entry.first;
    auto it = out.try_emplace(s.interval, s.value.width()).first;
    // One vote per sender, even if it repeated the same pair.
    it->second.add(s.value);
  }
  return out;
}

std::vector<BitString> frequent_strings(const std::vector<Submission>& subs, std::int64_t interval,
                                        const Rational& t) {
  const auto grouped = sift_submissions(subs);
  const auto it = grouped.find(interval);
  if (it == grouped.end()) return {};
  return frequent_strings(it->second, t);
}

std::vector<std::int64_t> DecisionTree::query_bits() const {
  std::vector<std::int64_t> out;
  for (const auto& n : nodes_) {
    if (n.bit >= 0) out.push_back(n.bit);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int DecisionTree::walk(const std::function<bool(std::int64_t)>& bit) const {
  int at = 0;
  while (nodes_[static_cast<std::size_t>(at)].bit >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(at)];
    at = n.child[bit(n.bit) ? 1 : 0];
  }
  return nodes_[static_cast<std::size_t>(at)].leaf;
}

int DecisionTree::build(std::size_t lo, std::size_t hi) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (hi - lo == 1) {
    nodes_[static_cast<std::size_t>(id)].leaf = static_cast<int>(lo);
    return id;
  }
  std::size_t split = kNoDifference;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    split = std::min(split, first_difference(leaves_[i - 1], leaves_[i]));
  }
  std::size_t mid = lo;
  while (mid < hi && !leaves_[mid].get(split)) ++mid;
  nodes_[static_cast<std::size_t>(id)].bit = static_cast<std::int64_t>(split);
  const int left = build(lo, mid);
  const int right = build(mid, hi);
  nodes_[static_cast<std::size_t>(id)].child[0] = left;
  nodes_[static_cast<std::size_t>(id)].child[1] = right;
  return id;
}

DecisionTree build_decision_tree(std::vector<BitString> candidates, std::int64_t offset) {
  if (candidates.empty()) throw std::invalid_argument("decision tree needs at least one candidate");
  const std::size_t width = candidates.front().width();
  for (const auto& c : candidates) {
    if (c.width() != width) throw std::invalid_argument("decision tree candidates must share one width");
  }
  std::sort(candidates.begin(), candidates.end());
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i - 1] == candidates[i]) throw std::invalid_argument("duplicate decision tree candidate");
  }
  DecisionTree t;
  t.offset_ = offset;
  t.width_ = width;
  t.leaves_ = std::move(candidates);
  t.nodes_.reserve(2 * t.leaves_.size());
  t.build(0, t.leaves_.size());
  return t;
}

Determination determine(const DecisionTree& tree, const std::function<bool(std::int64_t)>& oracle,
                        Validation validation) {
  const auto bits = tree.query_bits();
  std::vector<std::pair<std::int64_t, bool>> answers;
  answers.reserve(bits.size());
  for (const auto rel : bits) answers.emplace_back(rel, oracle(tree.offset() + rel));
  const auto lookup = [&](std::int64_t rel) {
    const auto it = std::lower_bound(answers.begin(), answers.end(), std::make_pair(rel, false),
                                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return it->second;
  };
  const int leaf = tree.walk(lookup);
  const BitString& value = tree.leaves()[static_cast<std::size_t>(leaf)];
  if (validation != Validation::kNone) {
    for (const auto& [rel, b] : answers) {
      if (value.get(static_cast<std::size_t>(rel)) != b) {
        throw InconsistencyError("determined leaf disagrees with the source at offset " + std::to_string(rel));
      }
    }
  }
  if (validation == Validation::kFull) {
    for (std::size_t i = 0; i < value.width(); ++i) {
      if (value.get(i) != oracle(tree.offset() + static_cast<std::int64_t>(i))) {
        throw InconsistencyError("no candidate matches the source; mismatch at offset " + std::to_string(i));
      }
    }
  }
  return {value, static_cast<std::int64_t>(bits.size())};
}

}  // namespace drsim
