#include "cod3s/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cod3s/errors.hpp"
#include "cod3s/scorer.hpp"
#include "cod3s/text.hpp"

namespace cod3s {

ConditionalBigramModel::ConditionalBigramModel(Weights weights)
    : weights_(weights) {
  const double total = weights.bigram + weights.lexical + weights.unigram;
  if (weights.bigram < 0 || weights.lexical < 0 || weights.unigram < 0 ||
      std::abs(total - 1.0) > 1e-12) {
    throw DomainError("interpolation weights must be non-negative and sum to 1");
  }
  if (!(weights.add_k > 0.0)) throw DomainError("add-k constant must be positive");
}

void ConditionalBigramModel::observe(std::span<const std::string> source,
                                     std::span<const std::string> target) {
  std::vector<std::string> seq;
  seq.reserve(target.size() + 1);
  for (const auto& t : target) {
    if (t != kEnd && t != kUnknown && seen_.emplace(t, order_.size()).second) {
      order_.push_back(t);
    }
    seq.push_back(t);
  }
  seq.emplace_back(kEnd);

  std::string prev(kBegin);
  for (const auto& w : seq) {
    auto& ctx = bigram_[prev];
    ctx.next[w] += 1.0;
    ctx.total += 1.0;
    unigram_.next[w] += 1.0;
    unigram_.total += 1.0;
    prev = w;
  }
  for (const auto& u : source) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto& ctx = lexical_[lexical_key(u, i)];
      ctx.next[seq[i]] += 1.0;
      ctx.total += 1.0;
    }
  }
}

std::string ConditionalBigramModel::lexical_key(const std::string& feature,
                                                std::size_t position) const {
  if (!weights_.positional_lexical) return feature;
  return feature + '\x1f' + std::to_string(position);
}

std::vector<std::string> ConditionalBigramModel::vocabulary() const {
  std::vector<std::string> v = order_;
  v.emplace_back(kEnd);
  v.emplace_back(kUnknown);
  return v;
}

std::string_view ConditionalBigramModel::canonical(std::string_view token) const {
  if (token == kEnd) return kEnd;
  if (seen_.find(std::string(token)) != seen_.end()) return token;
  return kUnknown;
}

double ConditionalBigramModel::smoothed(const Context* ctx,
                                        std::string_view token) const {
  double count = 0.0;
  double total = 0.0;
  if (ctx != nullptr) {
    total = ctx->total;
    if (const auto it = ctx->next.find(std::string(token)); it != ctx->next.end()) {
      count = it->second;
    }
  }
  const double k = weights_.add_k;
  return (count + k) / (total + k * static_cast<double>(vocab_size()));
}

double ConditionalBigramModel::token_prob(
    std::string_view prev, std::string_view token,
    std::span<const std::string> source, std::size_t position) const {
  const std::string_view w = canonical(token);
  const std::string prev_key(prev == kBegin ? kBegin : canonical(prev));

  const auto b = bigram_.find(prev_key);
  const double p_bigram = smoothed(b == bigram_.end() ? nullptr : &b->second, w);
  const double p_unigram = smoothed(&unigram_, w);

  double p_lexical = p_unigram;
  if (!source.empty()) {
    double sum = 0.0;
    for (const auto& u : source) {
      const auto it = lexical_.find(lexical_key(u, position));
      sum += smoothed(it == lexical_.end() ? nullptr : &it->second, w);
    }
    p_lexical = sum / static_cast<double>(source.size());
  }
  return weights_.bigram * p_bigram + weights_.lexical * p_lexical +
         weights_.unigram * p_unigram;
}

double ConditionalBigramModel::sequence_logprob(
    std::span<const std::string> source,
    std::span<const std::string> target) const {
  double total = 0.0;
  std::string_view prev = kBegin;
  for (std::size_t i = 0; i < target.size(); ++i) {
    total += std::log(token_prob(prev, target[i], source, i));
    prev = target[i];
  }
  total += std::log(token_prob(prev, kEnd, source, target.size()));
  return total / static_cast<double>(target.size() + 1);
}

std::vector<std::string> signature_features(const Signature& signature) {
  std::vector<std::string> out;
  out.reserve(signature.bits());
  for (std::size_t i = 0; i < signature.bits(); ++i) {
    out.push_back("@" + std::to_string(i) + "=" + (signature.test(i) ? "1" : "0"));
  }
  return out;
}

std::vector<std::string> signature_tokens(const Signature& signature) {
  std::vector<std::string> out;
  out.reserve(signature.bits());
  for (std::size_t i = 0; i < signature.bits(); ++i) {
    out.emplace_back(signature.test(i) ? "1" : "0");
  }
  return out;
}

std::vector<TrainingTriple> load_training_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training file " + path.string());
  std::vector<TrainingTriple> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 3 tab-separated fields");
    }
    TrainingTriple t;
    t.source = line.substr(0, t1);
    try {
      t.signature = Signature::parse(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    t.target = line.substr(t2 + 1);
    if (!out.empty() && out.front().signature.bits() != t.signature.bits()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": signature width differs from earlier lines");
    }
    out.push_back(std::move(t));
  }
  return out;
}

NgramScorerModels::NgramScorerModels(const std::vector<TrainingTriple>& triples) {
  if (triples.empty()) throw DomainError("n-gram scorer needs training triples");
  bits_ = triples.front().signature.bits();
  std::unordered_map<std::string, bool> seen_targets;
  for (const auto& t : triples) {
    if (t.signature.bits() != bits_) {
      throw DomainError("training signatures differ in width");
    }
    const auto x = tokenize(t.source);
    const auto y = tokenize(t.target);
    const auto s_tokens = signature_tokens(t.signature);
    const auto s_feats = signature_features(t.signature);
    std::vector<std::string> xs = x;
    xs.insert(xs.end(), s_feats.begin(), s_feats.end());

    sig_fwd_.observe(x, s_tokens);
    sent_fwd_.observe(xs, y);
    sig_bwd_.observe(s_feats, x);
    sent_bwd_.observe(y, x);

    if (seen_targets.emplace(t.target, true).second) targets_.push_back(t.target);
  }
}

double NgramScorerModels::forward_signature(std::string_view source,
                                            const Signature& s) const {
  return sig_fwd_.sequence_logprob(tokenize(source), signature_tokens(s));
}

double NgramScorerModels::forward_sentence(std::string_view source,
                                           const Signature& s,
                                           std::string_view sentence) const {
  auto xs = tokenize(source);
  const auto feats = signature_features(s);
  xs.insert(xs.end(), feats.begin(), feats.end());
  return sent_fwd_.sequence_logprob(xs, tokenize(sentence));
}

double NgramScorerModels::backward_signature(std::string_view source,
                                             const Signature& s) const {
  return sig_bwd_.sequence_logprob(signature_features(s), tokenize(source));
}

double NgramScorerModels::backward_sentence(std::string_view source,
                                            std::string_view sentence) const {
  return sent_bwd_.sequence_logprob(tokenize(sentence), tokenize(source));
}

std::vector<std::pair<Signature, double>> NgramScorerModels::beam_signatures(
    std::string_view source, std::size_t beam) const {
  if (beam == 0) return {};
  const auto x = tokenize(source);
  struct Hyp {
    Signature bits;
    double score;
  };
  std::vector<Hyp> hyps{{Signature(bits_), 0.0}};
  for (std::size_t i = 0; i < bits_; ++i) {
    std::vector<Hyp> next;
    next.reserve(hyps.size() * 2);
    for (const auto& h : hyps) {
      const std::string_view prev =
          i == 0 ? ConditionalBigramModel::kBegin
                 : std::string_view(h.bits.test(i - 1) ? "1" : "0");
      for (const bool bit : {false, true}) {
        Hyp e = h;
        e.bits.set(i, bit);
        e.score += std::log(sig_fwd_.token_prob(prev, bit ? "1" : "0", x, i));
        next.push_back(std::move(e));
      }
    }
    // Prefixes so far are distinct, so ordering by (score, bits) is total.
    std::sort(next.begin(), next.end(), [](const Hyp& a, const Hyp& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.bits < b.bits;
    });
    if (next.size() > beam) next.resize(beam);
    hyps = std::move(next);
  }
  std::vector<std::pair<Signature, double>> out;
  out.reserve(hyps.size());
  for (auto& h : hyps) {
    const double lp = forward_signature(source, h.bits);
    out.emplace_back(std::move(h.bits), lp);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

namespace {

class NgramScorer final : public ScorerBackend {
 public:
  explicit NgramScorer(const std::filesystem::path& tsv)
      : models_(load_training_tsv(tsv)) {}

  std::vector<ScoredCandidate> forward_signatures(const std::string& source,
                                                  std::size_t beam) override {
    std::vector<ScoredCandidate> out;
    for (auto& [sig, lp] : models_.beam_signatures(source, beam)) {
      ScoredCandidate c;
      c.payload = std::move(sig);
      c.forward_logprob = lp;
      c.combined = lp;
      out.push_back(std::move(c));
    }
    return out;
  }

  std::vector<ScoredCandidate> forward_sentences(const std::string& source,
                                                 const Signature& signature,
                                                 std::size_t) override {
    check_width(signature);
    std::vector<ScoredCandidate> out;
    out.reserve(models_.targets().size());
    for (const auto& y : models_.targets()) {
      ScoredCandidate c;
      c.payload = y;
      c.forward_logprob = models_.forward_sentence(source, signature, y);
      c.combined = c.forward_logprob;
      out.push_back(std::move(c));
    }
    return out;
  }

  double backward_score(const std::string& source,
                        const Payload& payload) override {
    if (const auto* sig = std::get_if<Signature>(&payload)) {
      check_width(*sig);
      return models_.backward_signature(source, *sig);
    }
    return models_.backward_sentence(source, std::get<std::string>(payload));
  }

  bool concurrent_safe() const noexcept override { return true; }

 private:
  void check_width(const Signature& s) const {
    if (s.bits() != models_.signature_bits()) {
      throw DomainError("signature width " + std::to_string(s.bits()) +
                        " != trained width " +
                        std::to_string(models_.signature_bits()));
    }
  }

  NgramScorerModels models_;
};

}  // namespace

std::shared_ptr<ScorerBackend> make_ngram_backend(
    const std::filesystem::path& training_tsv) {
  return std::make_shared<NgramScorer>(training_tsv);
}

}  // namespace cod3s
