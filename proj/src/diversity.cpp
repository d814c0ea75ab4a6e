#include "cod3s/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "cod3s/errors.hpp"
#include "cod3s/lsh.hpp"
#include "cod3s/text.hpp"

namespace cod3s {
namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                          std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[Ngram(toks.begin() + static_cast<std::ptrdiff_t>(i),
                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("spearman_rho: constant input has no rank variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double sentence_bleu(const std::string& hypothesis, const std::string& reference,
                     int max_n) {
  if (max_n != 1 && max_n != 2) throw DomainError("BLEU order must be 1 or 2");
  const auto ref = tokenize(reference);
  if (ref.empty()) throw DomainError("BLEU reference is empty");
  const auto hyp = tokenize(hypothesis);
  if (hyp.empty()) return 0.0;

  double log_precision_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto h = ngram_counts(hyp, static_cast<std::size_t>(n));
    const auto r = ngram_counts(ref, static_cast<std::size_t>(n));
    std::size_t matched = 0, total = 0;
    for (const auto& [gram, count] : h) {
      total += count;
      if (const auto it = r.find(gram); it != r.end()) {
        matched += std::min(count, it->second);
      }
    }
    if (matched == 0) return 0.0;
    log_precision_sum +=
        std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_precision_sum / max_n);
}

DiversityMetric parse_diversity_metric(const std::string& name) {
  if (name == "inv-bleu1") return DiversityMetric::inv_bleu1;
  if (name == "inv-bleu2") return DiversityMetric::inv_bleu2;
  if (name == "cosine") return DiversityMetric::cosine;
  throw ParseError("unknown diversity metric \"" + name + "\"");
}

double pairwise_diversity(const std::vector<std::string>& sentences,
                          DiversityMetric metric,
                          const EmbeddingMatrix* embeddings) {
  const std::size_t n = sentences.size();
  if (n < 2) throw DomainError("pairwise_diversity needs at least 2 sentences");
  if (metric == DiversityMetric::cosine) {
    if (embeddings == nullptr) {
      throw ContractError("cosine diversity needs embeddings");
    }
    if (embeddings->count() != n) {
      throw ContractError("cosine diversity: " + std::to_string(n) +
                          " sentences but " + std::to_string(embeddings->count()) +
                          " embedding rows");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      switch (metric) {
        case DiversityMetric::inv_bleu1:
          sum += 100.0 - sentence_bleu(sentences[i], sentences[j], 1);
          break;
        case DiversityMetric::inv_bleu2:
          sum += 100.0 - sentence_bleu(sentences[i], sentences[j], 2);
          break;
        case DiversityMetric::cosine:
          sum += cosine_distance(embeddings->row(i), embeddings->row(j));
          break;
      }
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

DistinctCount count_distinct(const std::vector<std::string>& sentences,
                             const EmbeddingMatrix& embeddings,
                             double threshold) {
  if (!(threshold >= 0.0)) throw DomainError("duplicate threshold must be >= 0");
  if (sentences.size() != embeddings.count()) {
    throw ContractError("count_distinct: " + std::to_string(sentences.size()) +
                        " candidates but " + std::to_string(embeddings.count()) +
                        " embedding rows");
  }
  DistinctCount out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::optional<Duplicate> nearest;
    for (std::size_t k : kept) {
      const double d = cosine_distance(embeddings.row(i), embeddings.row(k));
      if (d < threshold && (!nearest || d < nearest->distance)) {
        nearest = Duplicate{i, k, d};
      }
    }
    if (nearest) {
      out.duplicates.push_back(*nearest);
    } else {
      kept.push_back(i);
    }
  }
  out.distinct_count = kept.size();
  return out;
}

DiversityReport diversity_report(const std::vector<std::string>& sentences,
                                 const EmbeddingMatrix& embeddings,
                                 double threshold,
                                 const EmbeddingMatrix* phrase_embeddings) {
  DiversityReport report;
  report.set_size = sentences.size();
  report.bleu1_diversity = pairwise_diversity(sentences, DiversityMetric::inv_bleu1);
  report.bleu2_diversity = pairwise_diversity(sentences, DiversityMetric::inv_bleu2);
  report.cosine_diversity =
      pairwise_diversity(sentences, DiversityMetric::cosine, &embeddings);
  auto counted = count_distinct(
      sentences, phrase_embeddings ? *phrase_embeddings : embeddings, threshold);
  report.distinct_count = counted.distinct_count;
  report.duplicate_map = std::move(counted.duplicates);
  return report;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double mean_rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DomainError("spearman_rho: length mismatch (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  if (a.size() < 3) throw DomainError("spearman_rho needs at least 3 items");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) {
      throw DomainError("spearman_rho: NaN input");
    }
  }
  const auto ra = fractional_ranks(a);
  const auto rb = fractional_ranks(b);
  return pearson(ra, rb);
}

std::vector<StsPair> load_sts_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open STS pairs " + path);
  std::vector<StsPair> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string a, b, score;
    if (!std::getline(fields, a, '\t') || !std::getline(fields, b, '\t') ||
        !std::getline(fields, score, '\t')) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected index-a, index-b, score");
    }
    StsPair p;
    try {
      std::size_t used = 0;
      p.a = std::stoull(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      p.b = std::stoull(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      p.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument(score);
    } catch (const std::logic_error&) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": malformed number");
    }
    out.push_back(p);
  }
  return out;
}

StsTable sts_eval(const std::vector<StsPair>& pairs, const EmbeddingMatrix& matrix,
                  const std::vector<std::size_t>& widths, std::uint64_t seed) {
  if (pairs.size() < 3) throw DomainError("sts_eval needs at least 3 pairs");
  for (const auto& p : pairs) {
    if (p.a >= matrix.count() || p.b >= matrix.count()) {
      throw DomainError("STS pair index out of range (corpus has " +
                        std::to_string(matrix.count()) + " rows)");
    }
  }
  std::vector<double> human;
  human.reserve(pairs.size());
  for (const auto& p : pairs) human.push_back(p.score);

  StsTable table;
  std::vector<double> model(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    model[i] = cosine_similarity(matrix.row(pairs[i].a), matrix.row(pairs[i].b));
  }
  table.push_back({"cosine", 0, spearman_rho(human, model)});

  for (std::size_t bits : widths) {
    const auto planes = generate_hyperplanes(matrix.dim(), bits, seed);
    // Hash each referenced row once.
    std::map<std::size_t, Signature> cache;
    auto sig = [&](std::size_t row) -> const Signature& {
      auto it = cache.find(row);
      if (it == cache.end()) {
        it = cache.emplace(row, hash_vector(planes, matrix.row(row))).first;
      }
      return it->second;
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto d = hamming_distance(sig(pairs[i].a), sig(pairs[i].b));
      model[i] = approx_cosine(d, bits);
    }
    table.push_back({std::to_string(bits) + "b", bits, spearman_rho(human, model)});
  }
  return table;
}

}  // namespace cod3s
