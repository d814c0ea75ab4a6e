#include "cod3s/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "cod3s/errors.hpp"

namespace cod3s {
namespace {

void check_config(const PipelineConfig& cfg) {
  if (cfg.k == 0) throw DomainError("k must be positive");
  if (!(cfg.lambda_s >= 0.0) || !(cfg.lambda_y >= 0.0)) {
    throw DomainError("MMI weights must be non-negative");
  }
}

void fetch_backward(const std::string& source,
                    std::vector<ScoredCandidate>& candidates,
                    ScorerGateway& scorer) {
  for (auto& c : candidates) {
    if (!c.backward_logprob) {
      c.backward_logprob = scorer.backward_score(source, c.payload);
    }
  }
}

// Forward n-best, reranked with lambda_s when enabled.
std::vector<ScoredCandidate> ranked_signatures(const std::string& source,
                                               const PipelineConfig& cfg,
                                               ScorerGateway& scorer) {
  auto candidates = scorer.forward_signatures(source);
  if (cfg.mmi_signatures && cfg.lambda_s > 0.0) {
    fetch_backward(source, candidates, scorer);
    return mmi_rerank(std::move(candidates), cfg.lambda_s);
  }
  return mmi_rerank(std::move(candidates), 0.0);
}

}  // namespace

std::vector<ScoredCandidate> mmi_rerank(std::vector<ScoredCandidate> candidates,
                                        double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("MMI lambda must be a non-negative finite number");
  }
  for (auto& c : candidates) {
    if (lambda == 0.0) {
      c.combined = c.forward_logprob;
      continue;
    }
    if (!c.backward_logprob) {
      throw ContractError("mmi_rerank: candidate \"" + payload_text(c.payload) +
                          "\" has no backward score");
    }
    c.combined = c.forward_logprob + lambda * *c.backward_logprob;
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) {
                     return a.combined > b.combined;
                   });
  return candidates;
}

std::vector<ScoredCandidate> greedy_hamming_filter(
    const std::vector<ScoredCandidate>& ranked, std::size_t t, std::size_t k) {
  std::vector<ScoredCandidate> kept;
  std::size_t width = 0;
  for (const auto& c : ranked) {
    const auto* sig = std::get_if<Signature>(&c.payload);
    if (sig == nullptr) {
      throw ContractError("greedy_hamming_filter: candidate is not a signature");
    }
    if (width == 0) width = sig->bits();
    if (sig->bits() != width) {
      throw DomainError("greedy_hamming_filter: mixed signature widths (" +
                        std::to_string(width) + " and " +
                        std::to_string(sig->bits()) + ")");
    }
  }
  for (const auto& c : ranked) {
    if (kept.size() == k) break;
    const auto& sig = std::get<Signature>(c.payload);
    const bool far_enough =
        std::all_of(kept.begin(), kept.end(), [&](const ScoredCandidate& other) {
          return hamming_distance(sig, std::get<Signature>(other.payload)) > t;
        });
    if (far_enough) kept.push_back(c);
  }
  return kept;
}

std::vector<ScoredCandidate> decode_signatures(const std::string& source,
                                               const PipelineConfig& cfg,
                                               ScorerGateway& scorer) {
  check_config(cfg);
  return greedy_hamming_filter(ranked_signatures(source, cfg, scorer),
                               cfg.hamming_threshold, cfg.k);
}

ScoredCandidate decode_sentences(const std::string& source,
                                 const Signature& signature,
                                 const PipelineConfig& cfg,
                                 ScorerGateway& scorer) {
  check_config(cfg);
  auto candidates = scorer.forward_sentences(source, signature);
  if (candidates.empty()) {
    throw NotFoundError("no sentence candidates for signature " +
                        signature.to_string());
  }
  if (cfg.mmi_sentences && cfg.lambda_y > 0.0) {
    fetch_backward(source, candidates, scorer);
    candidates = mmi_rerank(std::move(candidates), cfg.lambda_y);
  } else {
    candidates = mmi_rerank(std::move(candidates), 0.0);
  }
  return std::move(candidates.front());
}

DiverseOutputs run_pipeline(const std::string& source, const PipelineConfig& cfg,
                            ScorerGateway& scorer) {
  check_config(cfg);
  DiverseOutputs out;
  out.source = source;

  // Stage one is unrolled here so the full reranked list is still around to
  // report each pick's MMI rank.
  const auto candidates = ranked_signatures(source, cfg, scorer);
  const auto kept = greedy_hamming_filter(candidates, cfg.hamming_threshold, cfg.k);

  std::vector<std::size_t> mmi_rank(kept.size());
  for (std::size_t i = 0, j = 0; i < kept.size(); ++i) {
    while (candidates[j].forward_rank != kept[i].forward_rank) ++j;
    mmi_rank[i] = j;
  }

  using Outcome = std::pair<std::optional<ScoredCandidate>, std::string>;
  auto decode_one = [&](const Signature& sig) -> Outcome {
    try {
      return {decode_sentences(source, sig, cfg, scorer), {}};
    } catch (const Error& e) {
      return {std::nullopt, e.what()};
    }
  };

  std::vector<Outcome> outcomes(kept.size());
  if (cfg.jobs > 1 && scorer.concurrent_safe() && kept.size() > 1) {
    std::vector<std::future<Outcome>> futures;
    std::size_t next = 0;
    while (next < kept.size()) {
      futures.clear();
      const std::size_t start = next;
      for (; next < kept.size() && next - start < cfg.jobs; ++next) {
        futures.push_back(std::async(std::launch::async, decode_one,
                                     std::get<Signature>(kept[next].payload)));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) {
        outcomes[start + i] = futures[i].get();
      }
    }
  } else {
    for (std::size_t i = 0; i < kept.size(); ++i) {
      outcomes[i] = decode_one(std::get<Signature>(kept[i].payload));
    }
  }

  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& sig = std::get<Signature>(kept[i].payload);
    auto& [sentence, error] = outcomes[i];
    if (!sentence) {
      out.gaps.push_back({sig, error});
      continue;
    }
    Pick p;
    p.signature = sig;
    p.sentence = std::get<std::string>(sentence->payload);
    p.signature_score = kept[i].combined;
    p.sentence_score = sentence->combined;
    p.signature_forward_rank = kept[i].forward_rank;
    p.signature_mmi_rank = mmi_rank[i];
    out.picks.push_back(std::move(p));
  }
  return out;
}

}  // namespace cod3s
