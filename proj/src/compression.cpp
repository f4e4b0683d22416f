#include "drsim/compression.hpp"

#include <algorithm>

#include "drsim/sync_scheduler.hpp"

namespace drsim {

std::shared_ptr<const BroadcastTranscript> broadcast_compress(std::vector<std::uint64_t> words,
                                                              std::vector<std::pair<std::int64_t, bool>> queried) {
  auto t = std::make_shared<BroadcastTranscript>();
  std::sort(queried.begin(), queried.end());
  t->words = std::move(words);
  t->queried = std::move(queried);
  return t;
}

CompressionAudit audit_alg1_compression(const SimConfig& base, const BitString& input) {
  SimConfig cfg = base;
  cfg.mode = CommMode::kBroadcast;
  cfg.protocol = "alg1";
  Alg1Protocol live;
  live.record_transcripts(true);
  FaultPlan none;
  const RunResult run = run_sync(cfg, input, live, none, [&](const SyncRoundView&) { live.snapshot_round(); });

  CompressionAudit audit;
  audit.run_correct = run.metrics.correct;
  const auto& snaps = live.snapshots();
  audit.rounds = static_cast<std::int64_t>(snaps.size());
  const Alg1Params& params = live.params();
  const int k = cfg.k;

  // Everything a receiver sees: one transcript per peer per round.
  std::vector<std::vector<std::shared_ptr<const BroadcastTranscript>>> wire(static_cast<std::size_t>(k) + 1);
  for (PeerId p = 1; p <= k; ++p) {
    for (const auto& rt : live.transcripts(p)) {
      auto t = broadcast_compress(rt.words, rt.queried);
      ++audit.payloads;
      audit.max_payload_bits = std::max(audit.max_payload_bits, t->bits());
      if (t->bits() > t->random_bits() + static_cast<std::int64_t>(rt.queried.size())) ++audit.payload_violations;
      wire[static_cast<std::size_t>(p)].push_back(std::move(t));
    }
  }

  std::vector<Alg1Peer> rebuilt;
  for (PeerId p = 0; p <= k; ++p) rebuilt.emplace_back(params, p, k, cfg.n);
  const PayloadPtr vote0 = std::make_shared<Alg1Vote>(0);
  const PayloadPtr vote1 = std::make_shared<Alg1Vote>(1);
  for (std::int64_t r = 1; r <= audit.rounds; ++r) {
    VoteDigest digest(k);
    if (r > 1) {
      for (PeerId p = 1; p <= k; ++p) {
        const auto v = rebuilt[static_cast<std::size_t>(p)].vote(r - 1);
        if (!v) continue;
        Envelope e;
        e.sender = p;
        e.to_all = true;
        e.payload = *v ? vote1 : vote0;
        digest.add(e);
      }
    }
    for (PeerId p = 1; p <= k; ++p) {
      Alg1Peer& peer = rebuilt[static_cast<std::size_t>(p)];
      const auto& mine = wire[static_cast<std::size_t>(p)];
      if (params.fallback) {
        if (r == 1 && !mine.empty()) {
          BitString all(static_cast<std::size_t>(cfg.n));
          for (const auto& [index, bit] : mine.front()->queried) all.set(static_cast<std::size_t>(index - 1), bit);
          peer.learn_all(all);
        }
        continue;
      }
      peer.ingest(r, digest);
      if (r > peer.total_rounds()) continue;
      const auto at = static_cast<std::size_t>(r - 1);
      static const std::vector<std::uint64_t> kNoWords;
      const auto& words = at < mine.size() ? mine[at]->words : kNoWords;
      TapeSource tape(words);
      if (peer.act(r, tape) == Alg1Peer::Step::kQuery && at < mine.size() && !mine[at]->queried.empty()) {
        peer.learn_queried(mine[at]->queried.front().second);
      }
    }
    const auto& expect = snaps[static_cast<std::size_t>(r - 1)];
    for (PeerId p = 1; p <= k; ++p) {
      if (!(rebuilt[static_cast<std::size_t>(p)] == expect[static_cast<std::size_t>(p)])) {
        ++audit.state_mismatches;
        if (audit.first_mismatch_round == 0) audit.first_mismatch_round = r;
      }
    }
  }
  return audit;
}

}  // namespace drsim
