// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fail. Every tolerance and time budget is pinned below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cod3s/diversity.hpp"
#include "cod3s/lsh.hpp"
#include "cod3s/pipeline.hpp"
#include "cod3s/semantic_bins.hpp"
#include "test_util.hpp"

using namespace cod3s;

namespace {

constexpr double kEndpointTolerance = 1e-12;
constexpr double kMinLshSpearman = 0.95;
constexpr double kLshBudgetSeconds = 10.0;
constexpr double kFilterBudgetSeconds = 5.0;
constexpr double kDecodeBudgetSeconds = 1.0;
constexpr double kOracleTolerance = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  explicit Check(Outcome& o) : o_(o) {}
  void require(bool ok, const std::string& what) {
    if (!ok && o_.pass) {
      o_.pass = false;
      o_.detail = what;
    }
  }

 private:
  Outcome& o_;
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds,
               const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && secs >= budget_seconds && o.pass) {
    o.pass = false;
    o.detail = "over time budget";
  }
  if (!o.pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.3fs", secs);
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << timing;
  if (budget_seconds > 0) std::cout << " / budget " << budget_seconds << "s";
  std::cout << "]";
  if (!o.detail.empty()) std::cout << "  " << o.detail;
  std::cout << std::endl;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// ---- LSH -----------------------------------------------------------------

void lsh_fidelity(Outcome& o) {
  Check c(o);
  const std::size_t dim = 1024, pairs = 1000;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> corr(-1.0, 1.0);
  const auto planes256 = generate_hyperplanes(dim, 256, 4242);
  const auto planes16 = generate_hyperplanes(dim, 16, 4242);
  const auto planes8 = generate_hyperplanes(dim, 8, 4242);

  std::vector<double> hamming, distance;
  double err256 = 0, err16 = 0, err8 = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    // Pairs with a target correlation drawn uniformly from [-1, 1], so the
    // sample spans the whole range of angles.
    const auto u = cod3s::testing::gaussian_vector(dim, rng);
    const auto w = cod3s::testing::gaussian_vector(dim, rng);
    const double a = corr(rng), b = std::sqrt(1.0 - a * a);
    std::vector<float> v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      v[d] = static_cast<float>(a * u[d] + b * w[d]);
    }
    const double truth = cosine_similarity(u, v);
    const auto h256 = hamming_distance(hash_vector(planes256, u), hash_vector(planes256, v));
    const auto h16 = hamming_distance(hash_vector(planes16, u), hash_vector(planes16, v));
    const auto h8 = hamming_distance(hash_vector(planes8, u), hash_vector(planes8, v));
    hamming.push_back(static_cast<double>(h256));
    distance.push_back(1.0 - truth);
    err256 += std::abs(approx_cosine(h256, 256) - truth) / pairs;
    err16 += std::abs(approx_cosine(h16, 16) - truth) / pairs;
    err8 += std::abs(approx_cosine(h8, 8) - truth) / pairs;
  }
  const double rho = spearman_rho(hamming, distance);
  c.require(rho >= kMinLshSpearman, "spearman " + fmt(rho) + " < 0.95");
  c.require(err256 < err16 && err16 < err8,
            "errors not strictly decreasing: 8b " + fmt(err8) + ", 16b " + fmt(err16) +
                ", 256b " + fmt(err256));
  if (o.pass) {
    o.detail = "rho=" + fmt(rho) + " err8=" + fmt(err8) + " err16=" + fmt(err16) +
               " err256=" + fmt(err256);
  }
}

void approx_cosine_endpoints(Outcome& o) {
  Check c(o);
  for (std::size_t b = 1; b <= 1024; ++b) {
    c.require(std::abs(approx_cosine(0, b) - 1.0) <= kEndpointTolerance,
              "d=0 at b=" + std::to_string(b));
    c.require(std::abs(approx_cosine(b, b) + 1.0) <= kEndpointTolerance,
              "d=b at b=" + std::to_string(b));
    if (b % 2 == 0) {
      c.require(std::abs(approx_cosine(b / 2, b)) <= kEndpointTolerance,
                "d=b/2 at b=" + std::to_string(b));
    }
  }
}

// ---- Greedy filter -------------------------------------------------------

std::vector<std::string> reference_greedy(const std::vector<std::string>& ranked,
                                          std::size_t t, std::size_t k) {
  std::vector<std::string> kept;
  for (const auto& s : ranked) {
    if (kept.size() >= k) break;
    bool ok = true;
    for (const auto& other : kept) {
      std::size_t d = 0;
      for (std::size_t i = 0; i < s.size(); ++i) d += s[i] != other[i];
      if (d <= t) ok = false;
    }
    if (ok) kept.push_back(s);
  }
  return kept;
}

void greedy_filter_oracle(Outcome& o) {
  Check c(o);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> score(-20.0, 0.0);
  std::size_t lists = 0;
  for (std::size_t width = 1; width <= 6; ++width) {
    for (std::size_t n = 0; n <= 12; ++n) {
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<ScoredCandidate> cands(n);
        for (auto& cand : cands) {
          std::string bits;
          for (std::size_t i = 0; i < width; ++i) bits.push_back(rng() & 1u ? '1' : '0');
          cand.payload = Signature::parse(bits);
          cand.forward_logprob = cand.combined = score(rng);
        }
        std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
          return a.combined > b.combined;
        });
        std::vector<std::string> ranked;
        for (const auto& cand : cands) ranked.push_back(payload_text(cand.payload));
        for (std::size_t t = 0; t <= 3; ++t) {
          for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{12}}) {
            const auto got = greedy_hamming_filter(cands, t, k);
            std::vector<std::string> got_text;
            for (const auto& g : got) got_text.push_back(payload_text(g.payload));
            c.require(got_text == reference_greedy(ranked, t, k),
                      "mismatch at width " + std::to_string(width) + ", n " +
                          std::to_string(n) + ", t " + std::to_string(t));
            for (std::size_t a = 0; a < got.size(); ++a) {
              for (std::size_t b = a + 1; b < got.size(); ++b) {
                c.require(hamming_distance(std::get<Signature>(got[a].payload),
                                           std::get<Signature>(got[b].payload)) > t,
                          "kept pair within threshold");
              }
            }
          }
        }
        ++lists;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(lists) + " lists x t in {0..3} x k in {1,3,12}";
}

// ---- MMI -----------------------------------------------------------------

void mmi_reranking(Outcome& o) {
  Check c(o);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lp(-10.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredCandidate> list(1 + rng() % 30);
    for (std::size_t i = 0; i < list.size(); ++i) {
      list[i].payload = std::string("y") + std::to_string(i);
      list[i].forward_logprob = list[i].combined = lp(rng);
      list[i].backward_logprob = lp(rng);
    }
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.forward_logprob > b.forward_logprob;
    });
    for (std::size_t i = 0; i < list.size(); ++i) list[i].forward_rank = i;
    const auto zero = mmi_rerank(list, 0.0);
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.require(zero[i].forward_rank == i, "lambda=0 changed forward order");
    }
    const double lambda = 0.25 + static_cast<double>(trial % 8);
    const auto base = mmi_rerank(list, lambda);
    for (const double scale : {0.1, 10.0}) {
      auto scaled = list;
      for (auto& s : scaled) *s.backward_logprob *= scale;
      const auto again = mmi_rerank(scaled, lambda / scale);
      for (std::size_t i = 0; i < base.size(); ++i) {
        c.require(base[i].forward_rank == again[i].forward_rank,
                  "(c, 1/c) scaling changed order at c=" + fmt(scale));
      }
    }
  }
  // Backward scores flip the argmax: totals -6 and -3.
  std::vector<ScoredCandidate> hand(2);
  hand[0].payload = std::string("first");
  hand[0].forward_logprob = -1.0;
  hand[0].backward_logprob = -5.0;
  hand[1].payload = std::string("second");
  hand[1].forward_logprob = -2.0;
  hand[1].backward_logprob = -1.0;
  const auto flipped = mmi_rerank(hand, 1.0);
  c.require(payload_text(flipped[0].payload) == "second" && flipped[0].combined == -3.0 &&
                flipped[1].combined == -6.0,
            "hand-constructed flip not ranked per arithmetic");
}

// ---- End-to-end decode ---------------------------------------------------

void end_to_end_decode(Outcome& o) {
  Check c(o);
  const std::string fixtures = COD3S_FIXTURES;
  const std::string cmd = std::string(COD3S_CLI) + " decode --source-file " + fixtures +
                          "/decode_sources.txt --scorer fixture --endpoint " + fixtures +
                          "/decode.jsonl --threshold 2 --k 3 --lambda-s 1000 --lambda-y 0.3";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  c.require(pipe != nullptr, "cannot start cod3s");
  if (!pipe) return;
  std::string output;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  c.require(status == 0, "cod3s decode exited with status " + std::to_string(status));

  std::vector<nlohmann::json> got, expected;
  std::istringstream gs(output);
  for (std::string line; std::getline(gs, line);) {
    if (!line.empty()) got.push_back(nlohmann::json::parse(line));
  }
  std::ifstream es(fixtures + "/decode_expected.jsonl");
  for (std::string line; std::getline(es, line);) {
    if (!line.empty()) expected.push_back(nlohmann::json::parse(line));
  }
  c.require(!expected.empty() && got.size() == expected.size(),
            "expected " + std::to_string(expected.size()) + " sources, got " +
                std::to_string(got.size()));
  std::size_t picks = 0;
  for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
    c.require(got[i]["source"] == expected[i]["source"], "source order differs");
    const auto& gp = got[i]["picks"];
    const auto& ep = expected[i]["picks"];
    c.require(gp.size() == ep.size(), "pick count differs for " + expected[i]["source"].get<std::string>());
    for (std::size_t j = 0; j < std::min(gp.size(), ep.size()); ++j) {
      c.require(gp[j]["signature"] == ep[j]["signature"] && gp[j]["sentence"] == ep[j]["sentence"],
                "pick " + std::to_string(j) + " differs for " + expected[i]["source"].get<std::string>());
    }
    for (std::size_t a = 0; a < gp.size(); ++a) {
      for (std::size_t b = a + 1; b < gp.size(); ++b) {
        const auto d = hamming_distance(Signature::parse(gp[a]["signature"].get<std::string>()),
                                        Signature::parse(gp[b]["signature"].get<std::string>()));
        c.require(d >= 3, "pick signatures within distance 2");
      }
    }
    picks += gp.size();
  }
  if (o.pass) o.detail = std::to_string(got.size()) + " sources, " + std::to_string(picks) + " picks";
}

// ---- Diversity -----------------------------------------------------------

void diversity_metrics(Outcome& o) {
  Check c(o);
  EmbeddingMatrix same(3, {0.2f, 1.0f, -0.5f, 0.4f, 2.0f, -1.0f}, {"x", "x"});
  const std::vector<std::string> twins{"the cat sat", "the cat sat"};
  c.require(pairwise_diversity(twins, DiversityMetric::inv_bleu1) == 0.0, "identical inv-bleu1");
  c.require(pairwise_diversity(twins, DiversityMetric::inv_bleu2) == 0.0, "identical inv-bleu2");
  c.require(std::abs(pairwise_diversity(twins, DiversityMetric::cosine, &same)) <= 1e-12,
            "identical cosine");
  c.require(pairwise_diversity({"a b", "c d"}, DiversityMetric::inv_bleu1) == 100.0,
            "disjoint vocabulary inv-bleu1");

  std::mt19937_64 rng(5);
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g", "."};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ys;
    for (int i = 0; i < 5; ++i) {
      std::string s;
      for (std::size_t j = 0, n = 1 + rng() % 6; j < n; ++j) s += words[rng() % words.size()] + " ";
      ys.push_back(s);
    }
    const auto emb = cod3s::testing::random_matrix(5, 9, rng);
    double b1 = 0, b2 = 0, cs = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) continue;
        b1 += 100.0 - sentence_bleu(ys[i], ys[j], 1);
        b2 += 100.0 - sentence_bleu(ys[i], ys[j], 2);
        double dot = 0, ni = 0, nj = 0;
        for (std::size_t d = 0; d < 9; ++d) {
          dot += double(emb.row(i)[d]) * emb.row(j)[d];
          ni += double(emb.row(i)[d]) * emb.row(i)[d];
          nj += double(emb.row(j)[d]) * emb.row(j)[d];
        }
        cs += 1.0 - dot / std::sqrt(ni * nj);
      }
    }
    c.require(std::abs(pairwise_diversity(ys, DiversityMetric::inv_bleu1) - b1 / 20) <= kOracleTolerance,
              "inv-bleu1 vs double loop");
    c.require(std::abs(pairwise_diversity(ys, DiversityMetric::inv_bleu2) - b2 / 20) <= kOracleTolerance,
              "inv-bleu2 vs double loop");
    c.require(std::abs(pairwise_diversity(ys, DiversityMetric::cosine, &emb) - cs / 20) <= kOracleTolerance,
              "cosine vs double loop");
  }

  const std::vector<double> thresholds{0.0, 0.1, 0.25, 0.5, 0.75};
  int rising = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto emb = cod3s::testing::random_matrix(10, 4, rng);
    std::size_t previous = 10;
    bool rose = false;
    for (double t : thresholds) {
      const auto n = count_distinct(emb.sentences(), emb, t).distinct_count;
      rose = rose || n > previous;
      previous = n;
    }
    rising += rose;
  }
  c.require(rising == 0, "count_distinct rose with the threshold in " +
                             std::to_string(rising) + " of 50 sets");
}

// ---- Bins ----------------------------------------------------------------

std::size_t oracle_medoid(const EmbeddingMatrix& m, const std::vector<std::size_t>& members) {
  std::size_t best = members.front();
  double best_sum = std::numeric_limits<double>::infinity();
  for (auto i : members) {
    double sum = 0;
    for (auto j : members) {
      if (i != j) sum += 1.0 - cosine_similarity(m.row(i), m.row(j));
    }
    if (sum < best_sum) best_sum = sum, best = i;
  }
  return best;
}

void bin_machinery(Outcome& o) {
  Check c(o);
  std::mt19937_64 rng(6);
  std::size_t medoids_checked = 0;
  for (std::size_t width : {4, 8, 16}) {
    const std::size_t dim = 32;
    const auto m = cod3s::testing::random_matrix(1000, dim, rng);
    const auto sigs = hash_corpus(generate_hyperplanes(dim, width, 77 + width), m);
    const auto index = build_index(sigs, m);

    std::vector<int> seen(1000, 0);
    for (const auto& [sig, members] : index.bins()) {
      for (auto i : members) {
        ++seen[i];
        c.require(sigs[i] == sig, "member stored under a foreign signature");
      }
      c.require(std::is_sorted(members.begin(), members.end()), "members out of corpus order");
      if (members.size() <= 20) {
        c.require(bin_medoid(index, m, sig) == oracle_medoid(m, members),
                  "medoid differs from oracle in bin " + sig.to_string());
        ++medoids_checked;
      }
    }
    c.require(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }),
              "bins do not partition the corpus at width " + std::to_string(width));

    std::set<std::string> prefixes;
    for (const auto& s : sigs) {
      const auto text = s.to_string();
      for (std::size_t len = 1; len < width; ++len) prefixes.insert(text.substr(0, len));
    }
    for (const auto& p : prefixes) {
      auto merged = query_prefix(index, p + "0");
      const auto one = query_prefix(index, p + "1");
      std::vector<std::size_t> overlap;
      std::set_intersection(merged.begin(), merged.end(), one.begin(), one.end(),
                            std::back_inserter(overlap));
      merged.insert(merged.end(), one.begin(), one.end());
      std::sort(merged.begin(), merged.end());
      c.require(overlap.empty() && query_prefix(index, p) == merged,
                "refinement fails at prefix " + p);
    }
  }

  EmbeddingMatrix tiny(2, {1, 0, 0, 1, 1, 1}, {"a", "b", "c"});
  const std::vector<Signature> tiny_sigs{Signature::parse("00"), Signature::parse("01"),
                                         Signature::parse("01")};
  const auto stats = bin_stats(build_index(tiny_sigs, tiny), 2);
  c.require(stats.populated_bins == 2 && stats.percent_populated == 50.0 &&
                stats.mean_sentences_per_bin == 1.5,
            "worked example gave populated=" + std::to_string(stats.populated_bins) +
                " percent=" + fmt(stats.percent_populated) +
                " mean=" + fmt(stats.mean_sentences_per_bin));
  if (o.pass) o.detail = std::to_string(medoids_checked) + " medoids checked";
}

// ---- Spearman ------------------------------------------------------------

void spearman(Outcome& o) {
  Check c(o);
  const std::vector<double> a{1, 2, 3};
  c.require(spearman_rho(a, std::vector<double>{10, 20, 30}) == 1.0, "monotone != 1.0");
  c.require(spearman_rho(a, std::vector<double>{30, 20, 10}) == -1.0, "anti-monotone != -1.0");

  // Average ranks by hand: (1, 2.5, 2.5, 4) and (1, 3, 2, 4).
  const std::vector<double> rx{1, 2.5, 2.5, 4}, ry{1, 3, 2, 4};
  double mx = 2.5, my = 2.5, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  const double oracle = sxy / std::sqrt(sxx * syy);
  const double got = spearman_rho(std::vector<double>{1, 2, 2, 4}, std::vector<double>{1, 3, 2, 4});
  c.require(std::abs(got - oracle) <= kOracleTolerance,
            "tied example " + fmt(got) + " vs oracle " + fmt(oracle));
  if (o.pass) o.detail = "tied rho=" + fmt(got);
}

}  // namespace

int main() {
  criterion("LSH fidelity: 256-bit Spearman >= 0.95, error(256) < error(16) < error(8)",
            kLshBudgetSeconds, lsh_fidelity);
  criterion("approx_cosine endpoints exact within 1e-12", 0, approx_cosine_endpoints);
  criterion("greedy filter matches reference scan, widths <= 6, lists <= 12, t in {0..3}",
            kFilterBudgetSeconds, greedy_filter_oracle);
  criterion("MMI rerank: lambda=0 order, arithmetic flip, (c, 1/c) invariance", 0,
            mmi_reranking);
  criterion("end-to-end cod3s decode matches fixture oracle, pairwise distance >= 3",
            kDecodeBudgetSeconds, end_to_end_decode);
  criterion("diversity metrics: identity, disjoint, double-loop oracle, monotone counts", 0,
            diversity_metrics);
  criterion("bin machinery: partition, refinement, medoid oracle, worked stats", 0,
            bin_machinery);
  criterion("Spearman: +1, -1 exact, tied example vs average-rank oracle", 0, spearman);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
