#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "drsim/byz_download.hpp"
#include "drsim/model.hpp"

namespace drsim {

// One peer's round in broadcast form: the random words it drew and the bits
// it queried, in index order. Receivers rebuild the sender's state from it.
struct BroadcastTranscript final : Payload {
  static constexpr std::uint32_t kTag = 0x42540001;
  BroadcastTranscript() : Payload(kTag) {}
  std::vector<std::uint64_t> words;
  std::vector<std::pair<std::int64_t, bool>> queried;

  std::int64_t random_bits() const { return 64 * static_cast<std::int64_t>(words.size()); }
  std::int64_t bits() const override { return random_bits() + static_cast<std::int64_t>(queried.size()); }
};

std::shared_ptr<const BroadcastTranscript> broadcast_compress(std::vector<std::uint64_t> words,
                                                              std::vector<std::pair<std::int64_t, bool>> queried);

struct CompressionAudit {
  std::int64_t rounds = 0;
  std::int64_t payloads = 0;
  std::int64_t state_mismatches = 0;   // (round, peer) pairs whose rebuilt state differs
  std::int64_t payload_violations = 0; // payload bits above r + Q
  std::int64_t max_payload_bits = 0;
  std::int64_t first_mismatch_round = 0;
  bool run_correct = false;
};

// Runs alg1 honestly in broadcast mode, compresses every peer's round into
// a BroadcastTranscript, and rebuilds all peer states from the transcripts
// alone, comparing against the live states after every round.
CompressionAudit audit_alg1_compression(const SimConfig& cfg, const BitString& input);

}  // namespace drsim
