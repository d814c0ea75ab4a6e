#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cod3s/signature.hpp"

namespace cod3s {

/// Conditional bigram model p(w | prev, x) for toy end-to-end scoring.
///
/// The distribution is a fixed interpolation of three add-k smoothed
/// components, each normalized over the target vocabulary (seen tokens plus
/// "</s>" and "<unk>"):
///
///   bigram   (c(prev, w) + k) / (c(prev) + k|V|)
///   lexical  mean over source features u of (c(u, w) + k) / (c(u) + k|V|)
///   unigram  (c(w) + k) / (N + k|V|)
///
/// c(u, w) counts co-occurrences of a source feature with a target token in
/// the same training pair; the lexical term is what makes the model depend on
/// its conditioning input. With `positional_lexical` the lexical context is
/// the pair (u, target position) instead, which suits fixed-width targets
/// such as signature bits. With an empty source the lexical weight falls to
/// the unigram term.
class ConditionalBigramModel {
 public:
  struct Weights {
    double bigram = 0.5;
    double lexical = 0.3;
    double unigram = 0.2;
    double add_k = 0.1;
    bool positional_lexical = false;
  };

  static constexpr std::string_view kBegin = "<s>";
  static constexpr std::string_view kEnd = "</s>";
  static constexpr std::string_view kUnknown = "<unk>";

  ConditionalBigramModel() : ConditionalBigramModel(Weights{}) {}
  explicit ConditionalBigramModel(Weights weights);

  /// Accumulates one (source features, target tokens) pair. Must precede
  /// every query.
  void observe(std::span<const std::string> source,
               std::span<const std::string> target);

  /// Vocabulary in first-seen order, ending with "</s>" and "<unk>".
  std::vector<std::string> vocabulary() const;
  std::size_t vocabulary_size() const noexcept { return vocab_size(); }

  /// Probability of target token `token` after `prev` given the source;
  /// `position` is the token's 0-based index in the target and only matters
  /// for positional models. Tokens outside the vocabulary score as "<unk>".
  double token_prob(std::string_view prev, std::string_view token,
                    std::span<const std::string> source,
                    std::size_t position = 0) const;

  /// Chain-rule natural-log probability of target followed by "</s>",
  /// divided by the number of scored tokens (target length + 1).
  double sequence_logprob(std::span<const std::string> source,
                          std::span<const std::string> target) const;

 private:
  struct Context {
    std::unordered_map<std::string, double> next;
    double total = 0.0;
  };

  std::size_t vocab_size() const noexcept { return order_.size() + 2; }
  std::string_view canonical(std::string_view token) const;
  std::string lexical_key(const std::string& feature, std::size_t position) const;
  double smoothed(const Context* ctx, std::string_view token) const;

  Weights weights_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> seen_;
  std::unordered_map<std::string, Context> bigram_;
  std::unordered_map<std::string, Context> lexical_;
  Context unigram_;
};

/// Position-tagged conditioning features of a signature, "@i=b" per bit.
std::vector<std::string> signature_features(const Signature& signature);

/// Bit tokens "0"/"1" of a signature, in bit order.
std::vector<std::string> signature_tokens(const Signature& signature);

/// One (source, signature, target) training triple.
struct TrainingTriple {
  std::string source;
  Signature signature;
  std::string target;
};

/// Reads tab-separated source, signature, target lines. Blank lines and lines
/// starting with '#' are skipped; signature widths must agree.
std::vector<TrainingTriple> load_training_tsv(const std::filesystem::path& path);

/// The four directional models of the reference scorer, trained from the
/// same triples:
///   signature forward   p(s | x)     targets are the b bit tokens of s
///   sentence forward    p(y | x, s)  source features are x tokens + "@i=b"
///   signature backward  p(x | s)
///   sentence backward   p(x | y)
class NgramScorerModels {
 public:
  static constexpr ConditionalBigramModel::Weights kSignatureWeights{
      0.3, 0.6, 0.1, 0.1, true};
  static constexpr ConditionalBigramModel::Weights kSentenceWeights{
      0.1, 0.8, 0.1, 0.1, false};

  explicit NgramScorerModels(const std::vector<TrainingTriple>& triples);

  std::size_t signature_bits() const noexcept { return bits_; }
  /// Distinct training targets in first-seen order; the sentence candidate
  /// pool.
  const std::vector<std::string>& targets() const noexcept { return targets_; }

  double forward_signature(std::string_view source, const Signature& s) const;
  double forward_sentence(std::string_view source, const Signature& s,
                          std::string_view sentence) const;
  double backward_signature(std::string_view source, const Signature& s) const;
  double backward_sentence(std::string_view source,
                           std::string_view sentence) const;

  /// Length-normalized beam search over the bit tokens; returns up to `beam`
  /// distinct signatures with their forward scores, best first.
  std::vector<std::pair<Signature, double>> beam_signatures(
      std::string_view source, std::size_t beam) const;

  const ConditionalBigramModel& signature_forward_model() const noexcept {
    return sig_fwd_;
  }
  const ConditionalBigramModel& sentence_forward_model() const noexcept {
    return sent_fwd_;
  }

 private:
  std::size_t bits_ = 0;
  std::vector<std::string> targets_;
  ConditionalBigramModel sig_fwd_{kSignatureWeights};
  ConditionalBigramModel sent_fwd_{kSentenceWeights};
  ConditionalBigramModel sig_bwd_;
  ConditionalBigramModel sent_bwd_;
};

}  // namespace cod3s
