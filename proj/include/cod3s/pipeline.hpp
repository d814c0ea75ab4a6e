#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cod3s/scorer.hpp"
#include "cod3s/signature.hpp"

namespace cod3s {

struct PipelineConfig {
  std::size_t k = 3;
  double lambda_s = 1000.0;
  double lambda_y = 0.3;
  std::size_t hamming_threshold = 2;
  bool mmi_signatures = true;
  bool mmi_sentences = true;
  /// Worker cap for stage-two decodes; only used with a concurrent-safe
  /// gateway.
  std::size_t jobs = 1;
};

struct Pick {
  Signature signature;
  std::string sentence;
  double signature_score = 0.0;  // combined stage-one score
  double sentence_score = 0.0;   // combined stage-two score
  std::size_t signature_forward_rank = 0;  // rank in the forward n-best
  std::size_t signature_mmi_rank = 0;      // rank after MMI reranking
};

/// A kept signature whose sentence decode failed.
struct Gap {
  Signature signature;
  std::string error;
};

struct DiverseOutputs {
  std::string source;
  std::vector<Pick> picks;
  std::vector<Gap> gaps;
};

/// Stable sort by forward + lambda * backward, descending; `combined` is
/// written on every candidate. ContractError if lambda > 0 and a backward
/// score is missing. With lambda == 0 the combined score is the forward
/// score and backward scores are not consulted.
std::vector<ScoredCandidate> mmi_rerank(std::vector<ScoredCandidate> candidates,
                                        double lambda);

/// Keeps, in rank order, each signature whose Hamming distance to every
/// signature already kept exceeds t; stops after k keeps. The input must be
/// sorted best first.
std::vector<ScoredCandidate> greedy_hamming_filter(
    const std::vector<ScoredCandidate>& ranked, std::size_t t, std::size_t k);

/// Stage one: forward n-best signatures, optional MMI rerank with lambda_s,
/// then the Hamming filter.
std::vector<ScoredCandidate> decode_signatures(const std::string& source,
                                               const PipelineConfig& cfg,
                                               ScorerGateway& scorer);

/// Stage two: best sentence within one signature's bin. NotFoundError when
/// the scorer offers no candidates.
ScoredCandidate decode_sentences(const std::string& source,
                                 const Signature& signature,
                                 const PipelineConfig& cfg,
                                 ScorerGateway& scorer);

DiverseOutputs run_pipeline(const std::string& source, const PipelineConfig& cfg,
                            ScorerGateway& scorer);

}  // namespace cod3s
