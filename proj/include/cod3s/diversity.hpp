#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cod3s/embedding_store.hpp"

namespace cod3s {

/// Single-reference sentence BLEU on the `tokenize` tokens, scaled to
/// [0, 100]: 100 * BP * geometric mean of clipped n-gram precisions for
/// n = 1..max_n, BP = min(1, exp(1 - |ref| / |hyp|)). No smoothing: any zero
/// precision yields 0. An empty hypothesis scores 0; an empty reference is a
/// DomainError.
double sentence_bleu(const std::string& hypothesis, const std::string& reference,
                     int max_n);

enum class DiversityMetric { inv_bleu1, inv_bleu2, cosine };

DiversityMetric parse_diversity_metric(const std::string& name);

/// Mean dissimilarity over all ordered pairs (i, j), i != j. Lexical metrics
/// use 100 - BLEU(y_i, y_j); the semantic metric uses the cosine distance of
/// embedding rows i and j, which must be supplied and index-aligned.
double pairwise_diversity(const std::vector<std::string>& sentences,
                          DiversityMetric metric,
                          const EmbeddingMatrix* embeddings = nullptr);

struct Duplicate {
  std::size_t index = 0;
  std::size_t representative = 0;
  double distance = 0.0;
};

struct DistinctCount {
  std::size_t distinct_count = 0;
  std::vector<Duplicate> duplicates;
};

/// Rank-order scan: candidate i is a duplicate when its cosine distance to
/// some already-kept candidate is below `threshold`; the nearest such kept
/// candidate (lowest index on ties) becomes its representative. Row i of
/// `embeddings` must encode sentence i; ContractError otherwise.
DistinctCount count_distinct(const std::vector<std::string>& sentences,
                             const EmbeddingMatrix& embeddings,
                             double threshold);

struct DiversityReport {
  std::size_t set_size = 0;
  double bleu1_diversity = 0.0;
  double bleu2_diversity = 0.0;
  double cosine_diversity = 0.0;
  std::size_t distinct_count = 0;
  std::vector<Duplicate> duplicate_map;
};

/// All metrics for one ranked candidate set. `embeddings` drive the cosine
/// diversity; `phrase_embeddings` (completed "X because/so Y" phrases, or the
/// same matrix when absent) drive duplicate counting.
DiversityReport diversity_report(const std::vector<std::string>& sentences,
                                 const EmbeddingMatrix& embeddings,
                                 double threshold,
                                 const EmbeddingMatrix* phrase_embeddings = nullptr);

/// Average ranks, 1-based; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of fractional ranks. DomainError on length mismatch,
/// fewer than 3 items, or a constant input.
double spearman_rho(std::span<const double> a, std::span<const double> b);

struct StsPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double score = 0.0;
};

struct StsRow {
  std::string label;  // "cosine" or "<b>b"
  std::size_t bits = 0;  // 0 for the cosine row
  double spearman = 0.0;
};

using StsTable = std::vector<StsRow>;

std::vector<StsPair> load_sts_pairs(const std::string& path);

/// Spearman correlation of human scores with full-precision cosine, then
/// with the Hamming-based cosine estimate at each width (hyperplanes drawn
/// from `seed`).
StsTable sts_eval(const std::vector<StsPair>& pairs, const EmbeddingMatrix& matrix,
                  const std::vector<std::size_t>& widths, std::uint64_t seed);

}  // namespace cod3s
