#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cod3s/embedding_store.hpp"
#include "cod3s/signature.hpp"

namespace cod3s {

/// Corpus rows grouped by their full-width signature. Prefixes of the
/// signatures give the coarser ancestor bins: each extra bit splits a bin in
/// two.
class BinIndex {
 public:
  using Members = std::vector<std::size_t>;

  std::size_t bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return signatures_.size(); }
  const std::map<Signature, Members>& bins() const noexcept { return bins_; }
  const std::vector<Signature>& signatures() const noexcept {
    return signatures_;
  }
  const std::vector<std::string>& sentences() const noexcept {
    return sentences_;
  }

  /// Members of the exact bin, or nullptr when unpopulated.
  const Members* find(const Signature& signature) const;

 private:
  friend BinIndex build_index(std::span<const Signature>,
                              const EmbeddingMatrix&);

  std::size_t bits_ = 0;
  std::map<Signature, Members> bins_;
  std::vector<Signature> signatures_;
  std::vector<std::string> sentences_;
};

struct BinStats {
  std::size_t bits_evaluated = 0;
  std::size_t populated_bins = 0;
  double percent_populated = 0.0;
  double mean_sentences_per_bin = 0.0;
  double std_sentences_per_bin = 0.0;
  double mean_unigrams_per_bin = 0.0;
  double std_unigrams_per_bin = 0.0;
};

/// Throws DomainError when the list and matrix disagree in length or the
/// signatures are not all the same width.
BinIndex build_index(std::span<const Signature> signatures,
                     const EmbeddingMatrix& matrix);

/// Statistics after re-binning by the first prefix_bits bits. Sentence
/// distinctness is string equality after trimming trailing whitespace;
/// unigrams are whitespace tokens. Spreads are population standard
/// deviations over populated bins.
BinStats bin_stats(const BinIndex& index, std::size_t prefix_bits);

/// Member minimizing the summed cosine distance to the rest of its bin,
/// lowest corpus index on ties. Throws NotFoundError for an empty bin.
std::size_t bin_medoid(const BinIndex& index, const EmbeddingMatrix& matrix,
                       const Signature& signature);

/// Every member whose signature begins with the '0'/'1' prefix, in corpus
/// order.
std::vector<std::size_t> query_prefix(const BinIndex& index,
                                      std::string_view prefix);

}  // namespace cod3s
