#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "cod3s/errors.hpp"
#include "cod3s/scorer.hpp"

namespace cod3s {
namespace {

void require_source(const std::string& source) {
  if (source.empty()) throw DomainError("scorer request with empty source");
}

void check_logprob(double lp, const std::string& what) {
  if (!std::isfinite(lp) || lp > 0.0) {
    throw GatewayError("scorer returned invalid log-probability for " + what,
                       std::to_string(lp));
  }
}

std::vector<ScoredCandidate> finish_list(std::vector<ScoredCandidate> raw,
                                         std::size_t beam) {
  for (const auto& c : raw) check_logprob(c.forward_logprob, payload_text(c.payload));
  std::stable_sort(raw.begin(), raw.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) {
                     return a.forward_logprob > b.forward_logprob;
                   });
  std::vector<ScoredCandidate> out;
  out.reserve(std::min(beam, raw.size()));
  std::unordered_set<std::string> seen;
  for (auto& c : raw) {
    if (out.size() == beam) break;
    // Signatures and sentences never share a list, so the textual form is a
    // faithful key.
    if (!seen.insert(payload_text(c.payload)).second) continue;
    c.combined = c.forward_logprob;
    c.forward_rank = out.size();
    out.push_back(std::move(c));
  }
  return out;
}

std::shared_ptr<ScorerBackend> make_backend(ScorerMode mode,
                                            const std::string& endpoint) {
  if (endpoint.empty()) {
    throw ContractError("scorer mode " + to_string(mode) +
                        " needs an endpoint");
  }
  switch (mode) {
    case ScorerMode::fixture:
      return make_fixture_backend(endpoint);
    case ScorerMode::process:
      return make_process_backend(endpoint);
    case ScorerMode::ngram:
      return make_ngram_backend(endpoint);
  }
  throw ContractError("unknown scorer mode");
}

}  // namespace

std::string payload_text(const Payload& payload) {
  if (const auto* sig = std::get_if<Signature>(&payload)) return sig->to_string();
  return std::get<std::string>(payload);
}

ScorerMode parse_scorer_mode(const std::string& name) {
  if (name == "fixture") return ScorerMode::fixture;
  if (name == "process") return ScorerMode::process;
  if (name == "ngram") return ScorerMode::ngram;
  throw ParseError("unknown scorer mode \"" + name + "\"");
}

std::string to_string(ScorerMode mode) {
  switch (mode) {
    case ScorerMode::fixture:
      return "fixture";
    case ScorerMode::process:
      return "process";
    case ScorerMode::ngram:
      return "ngram";
  }
  return "unknown";
}

ScorerGateway::ScorerGateway(ScorerConfig config) : config_(std::move(config)) {
  if (config_.signature_beam == 0 || config_.sentence_beam == 0) {
    throw DomainError("beam sizes must be positive");
  }
  auto pick = [&](const std::string& override_endpoint) {
    return override_endpoint.empty() ? config_.endpoint : override_endpoint;
  };
  std::map<std::string, std::shared_ptr<ScorerBackend>> by_endpoint;
  auto backend_for = [&](const std::string& endpoint) {
    auto& slot = by_endpoint[endpoint];
    if (!slot) slot = make_backend(config_.mode, endpoint);
    return slot;
  };
  signatures_ = backend_for(pick(config_.signature_endpoint));
  sentences_ = backend_for(pick(config_.sentence_endpoint));
  backward_ = backend_for(pick(config_.backward_endpoint));
}

ScorerGateway::ScorerGateway(ScorerConfig config,
                             std::shared_ptr<ScorerBackend> signatures,
                             std::shared_ptr<ScorerBackend> sentences,
                             std::shared_ptr<ScorerBackend> backward)
    : config_(std::move(config)),
      signatures_(std::move(signatures)),
      sentences_(std::move(sentences)),
      backward_(std::move(backward)) {
  if (!signatures_ || !sentences_ || !backward_) {
    throw ContractError("scorer gateway needs three backends");
  }
  if (config_.signature_beam == 0 || config_.sentence_beam == 0) {
    throw DomainError("beam sizes must be positive");
  }
}

bool ScorerGateway::concurrent_safe() const noexcept {
  return signatures_->concurrent_safe() && sentences_->concurrent_safe() &&
         backward_->concurrent_safe();
}

std::vector<ScoredCandidate> ScorerGateway::forward_signatures(
    const std::string& source) {
  require_source(source);
  auto raw = signatures_->forward_signatures(source, config_.signature_beam);
  for (const auto& c : raw) {
    if (!std::holds_alternative<Signature>(c.payload)) {
      throw GatewayError("signature list holds a sentence payload",
                         payload_text(c.payload));
    }
  }
  return finish_list(std::move(raw), config_.signature_beam);
}

std::vector<ScoredCandidate> ScorerGateway::forward_sentences(
    const std::string& source, const Signature& signature) {
  require_source(source);
  auto raw = sentences_->forward_sentences(source, signature,
                                           config_.sentence_beam);
  for (const auto& c : raw) {
    if (!std::holds_alternative<std::string>(c.payload)) {
      throw GatewayError("sentence list holds a signature payload",
                         payload_text(c.payload));
    }
  }
  return finish_list(std::move(raw), config_.sentence_beam);
}

double ScorerGateway::backward_score(const std::string& source,
                                     const Payload& payload) {
  require_source(source);
  if (const auto* sig = std::get_if<Signature>(&payload); sig && sig->bits() == 0) {
    throw DomainError("backward_score: empty signature");
  }
  const double lp = backward_->backward_score(source, payload);
  check_logprob(lp, "backward score of " + payload_text(payload));
  return lp;
}

}  // namespace cod3s
