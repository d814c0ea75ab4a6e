#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cod3s/signature.hpp"

namespace cod3s {

/// What a candidate proposes: a sentence code or a surface sentence.
using Payload = std::variant<Signature, std::string>;

std::string payload_text(const Payload& payload);

/// One entry of an n-best list. Log-probabilities are natural-log and
/// length-normalized.
struct ScoredCandidate {
  Payload payload;
  double forward_logprob = 0.0;
  std::optional<double> backward_logprob;
  /// forward + lambda * backward once reranked; equals forward before.
  double combined = 0.0;
  /// Position in the forward n-best list (0 = best).
  std::size_t forward_rank = 0;
};

enum class ScorerMode { fixture, process, ngram };

ScorerMode parse_scorer_mode(const std::string& name);
std::string to_string(ScorerMode mode);

struct ScorerConfig {
  ScorerMode mode = ScorerMode::fixture;
  std::size_t signature_beam = 100;
  std::size_t sentence_beam = 40;
  /// Fixture file, scorer command line, or n-gram training TSV, per mode.
  std::string endpoint;
  /// Optional per-operation overrides; empty means `endpoint`. Identical
  /// endpoints share one backend (one child process in process mode).
  std::string signature_endpoint;
  std::string sentence_endpoint;
  std::string backward_endpoint;
};

/// A source of forward n-best lists and backward scores. Implementations
/// return raw lists; the gateway sorts, deduplicates, and truncates.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual std::vector<ScoredCandidate> forward_signatures(
      const std::string& source, std::size_t beam) = 0;
  virtual std::vector<ScoredCandidate> forward_sentences(
      const std::string& source, const Signature& signature,
      std::size_t beam) = 0;
  virtual double backward_score(const std::string& source,
                                const Payload& payload) = 0;

  /// True when calls may overlap from several threads.
  virtual bool concurrent_safe() const noexcept = 0;
};

std::shared_ptr<ScorerBackend> make_fixture_backend(
    const std::filesystem::path& path);
std::shared_ptr<ScorerBackend> make_process_backend(const std::string& command);
std::shared_ptr<ScorerBackend> make_ngram_backend(
    const std::filesystem::path& training_tsv);

/// Uniform front end over the three scorer kinds. Forward lists come back
/// sorted by forward_logprob descending (stable w.r.t. backend order),
/// deduplicated by payload, truncated to the configured beam, and with
/// forward_rank filled in.
class ScorerGateway {
 public:
  explicit ScorerGateway(ScorerConfig config);
  ScorerGateway(ScorerConfig config, std::shared_ptr<ScorerBackend> signatures,
                std::shared_ptr<ScorerBackend> sentences,
                std::shared_ptr<ScorerBackend> backward);

  const ScorerConfig& config() const noexcept { return config_; }
  bool concurrent_safe() const noexcept;

  std::vector<ScoredCandidate> forward_signatures(const std::string& source);
  std::vector<ScoredCandidate> forward_sentences(const std::string& source,
                                                 const Signature& signature);
  double backward_score(const std::string& source, const Payload& payload);

 private:
  ScorerConfig config_;
  std::shared_ptr<ScorerBackend> signatures_;
  std::shared_ptr<ScorerBackend> sentences_;
  std::shared_ptr<ScorerBackend> backward_;
};

}  // namespace cod3s
