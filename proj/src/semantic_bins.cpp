#include "cod3s/semantic_bins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "cod3s/errors.hpp"
#include "cod3s/text.hpp"

namespace cod3s {
namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace

const BinIndex::Members* BinIndex::find(const Signature& signature) const {
  const auto it = bins_.find(signature);
  return it == bins_.end() ? nullptr : &it->second;
}

BinIndex build_index(std::span<const Signature> signatures,
                     const EmbeddingMatrix& matrix) {
  if (signatures.size() != matrix.count()) {
    throw DomainError("build_index: " + std::to_string(signatures.size()) +
                      " signatures for " + std::to_string(matrix.count()) +
                      " embedding rows");
  }
  BinIndex index;
  if (!signatures.empty()) index.bits_ = signatures.front().bits();
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    if (signatures[i].bits() != index.bits_) {
      throw DomainError("build_index: signature " + std::to_string(i) +
                        " has width " + std::to_string(signatures[i].bits()) +
                        ", expected " + std::to_string(index.bits_));
    }
    index.bins_[signatures[i]].push_back(i);
  }
  index.signatures_.assign(signatures.begin(), signatures.end());
  index.sentences_ = matrix.sentences();
  return index;
}

BinStats bin_stats(const BinIndex& index, std::size_t prefix_bits) {
  if (prefix_bits == 0 || prefix_bits > index.bits()) {
    throw DomainError("bin_stats: prefix width " + std::to_string(prefix_bits) +
                      " outside [1, " + std::to_string(index.bits()) + "]");
  }
  std::map<Signature, std::vector<std::size_t>> coarse;
  for (const auto& [sig, members] : index.bins()) {
    auto& dst = coarse[sig.prefix(prefix_bits)];
    dst.insert(dst.end(), members.begin(), members.end());
  }

  std::vector<double> sentence_counts;
  std::vector<double> unigram_counts;
  sentence_counts.reserve(coarse.size());
  unigram_counts.reserve(coarse.size());
  for (const auto& [sig, members] : coarse) {
    std::unordered_set<std::string_view> distinct_sentences;
    std::unordered_set<std::string> unigrams;
    for (std::size_t m : members) {
      const std::string& s = index.sentences()[m];
      distinct_sentences.insert(trim_right(s));
      for (auto& tok : split_whitespace(s)) unigrams.insert(std::move(tok));
    }
    sentence_counts.push_back(static_cast<double>(distinct_sentences.size()));
    unigram_counts.push_back(static_cast<double>(unigrams.size()));
  }

  BinStats stats;
  stats.bits_evaluated = prefix_bits;
  stats.populated_bins = coarse.size();
  // populated / 2^prefix_bits as a percentage; ldexp is exact for every
  // width whose power of two is representable.
  stats.percent_populated =
      std::ldexp(100.0 * static_cast<double>(coarse.size()),
                 -static_cast<int>(std::min<std::size_t>(
                     prefix_bits, std::numeric_limits<int>::max())));
  const auto s = population_mean_std(sentence_counts);
  const auto u = population_mean_std(unigram_counts);
  stats.mean_sentences_per_bin = s.mean;
  stats.std_sentences_per_bin = s.std;
  stats.mean_unigrams_per_bin = u.mean;
  stats.std_unigrams_per_bin = u.std;
  return stats;
}

std::size_t bin_medoid(const BinIndex& index, const EmbeddingMatrix& matrix,
                       const Signature& signature) {
  if (matrix.count() != index.size()) {
    throw ContractError("bin_medoid: matrix does not match the indexed corpus");
  }
  const auto* members = index.find(signature);
  if (members == nullptr || members->empty()) {
    throw NotFoundError("no populated bin " + signature.to_string());
  }
  const std::size_t n = members->size();
  std::vector<double> sums(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = cosine_distance(matrix.row((*members)[a]),
                                       matrix.row((*members)[b]));
      sums[a] += d;
      sums[b] += d;
    }
  }
  // Members are stored in corpus order, so the first minimum is the lowest
  // corpus index.
  const auto best = std::min_element(sums.begin(), sums.end());
  return (*members)[static_cast<std::size_t>(best - sums.begin())];
}

std::vector<std::size_t> query_prefix(const BinIndex& index,
                                      std::string_view prefix) {
  const Signature p = Signature::parse(prefix);
  if (p.bits() > index.bits()) {
    throw DomainError("query_prefix: prefix of " + std::to_string(p.bits()) +
                      " bits exceeds index width " +
                      std::to_string(index.bits()));
  }
  std::vector<std::size_t> out;
  // Bins sharing a prefix are contiguous in signature order.
  for (auto it = index.bins().lower_bound(p); it != index.bins().end(); ++it) {
    if (!it->first.starts_with(p)) break;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cod3s
