// Scorer backed by a JSON-lines fixture file. Record shapes:
//
//   {"op":"fwd_sig","source":S,"candidates":[{"payload":"0110...","logprob":L}, ...]}
//   {"op":"fwd_sent","source":S,"signature":"0110...","candidates":[{"payload":Y,"logprob":L}, ...]}
//   {"op":"bwd","source":S,"signature":"0110...","logprob":L}
//   {"op":"bwd","source":S,"sentence":Y,"logprob":L}
//
// A forward candidate may also carry "backward": L as shorthand for the
// matching bwd record.

#include <fstream>
#include <map>
#include <utility>

#include <json.hpp>

#include "cod3s/errors.hpp"
#include "cod3s/scorer.hpp"

namespace cod3s {
namespace {

using json = nlohmann::json;

std::string backward_key(const Payload& payload) {
  if (const auto* sig = std::get_if<Signature>(&payload)) {
    return "sig\x1f" + sig->to_string();
  }
  return "sent\x1f" + std::get<std::string>(payload);
}

class FixtureScorer final : public ScorerBackend {
 public:
  explicit FixtureScorer(const std::filesystem::path& path) { load(path); }

  std::vector<ScoredCandidate> forward_signatures(const std::string& source,
                                                  std::size_t) override {
    const auto it = signatures_.find(source);
    if (it == signatures_.end()) {
      throw NotFoundError("fixture has no signature list for source \"" +
                          source + "\"");
    }
    return it->second;
  }

  std::vector<ScoredCandidate> forward_sentences(const std::string& source,
                                                 const Signature& signature,
                                                 std::size_t) override {
    const auto it = sentences_.find({source, signature.to_string()});
    if (it == sentences_.end()) {
      throw NotFoundError("fixture has no sentence list for source \"" +
                          source + "\" and signature " +
                          signature.to_string());
    }
    return it->second;
  }

  double backward_score(const std::string& source,
                        const Payload& payload) override {
    const auto it = backward_.find({source, backward_key(payload)});
    if (it == backward_.end()) {
      throw NotFoundError("fixture has no backward score for source \"" +
                          source + "\" and payload \"" +
                          payload_text(payload) + "\"");
    }
    return it->second;
  }

  bool concurrent_safe() const noexcept override { return true; }

 private:
  using Key = std::pair<std::string, std::string>;

  void add_backward(const std::string& source, const Payload& payload,
                    double lp, std::size_t line) {
    const auto [it, inserted] =
        backward_.emplace(Key{source, backward_key(payload)}, lp);
    if (!inserted && it->second != lp) {
      throw FormatError("fixture line " + std::to_string(line) +
                        ": conflicting backward score for \"" +
                        payload_text(payload) + "\"");
    }
  }

  std::vector<ScoredCandidate> read_candidates(const json& rec,
                                               const std::string& source,
                                               bool signatures,
                                               std::size_t line) {
    std::vector<ScoredCandidate> out;
    for (const auto& c : rec.at("candidates")) {
      ScoredCandidate cand;
      const auto text = c.at("payload").get<std::string>();
      if (signatures) {
        cand.payload = Signature::parse(text);
      } else {
        cand.payload = text;
      }
      cand.forward_logprob = c.at("logprob").get<double>();
      cand.combined = cand.forward_logprob;
      if (c.contains("backward")) {
        add_backward(source, cand.payload, c["backward"].get<double>(), line);
      }
      out.push_back(std::move(cand));
    }
    return out;
  }

  void load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fixture " + path.string());
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const json rec = json::parse(line);
        const auto op = rec.at("op").get<std::string>();
        const auto source = rec.at("source").get<std::string>();
        if (op == "fwd_sig") {
          auto list = read_candidates(rec, source, true, line_no);
          if (!signatures_.emplace(source, std::move(list)).second) {
            throw FormatError("duplicate fwd_sig record");
          }
        } else if (op == "fwd_sent") {
          const auto sig = Signature::parse(rec.at("signature").get<std::string>());
          auto list = read_candidates(rec, source, false, line_no);
          if (!sentences_.emplace(Key{source, sig.to_string()}, std::move(list))
                   .second) {
            throw FormatError("duplicate fwd_sent record");
          }
        } else if (op == "bwd") {
          const double lp = rec.at("logprob").get<double>();
          if (rec.contains("signature")) {
            add_backward(source,
                         Signature::parse(rec["signature"].get<std::string>()),
                         lp, line_no);
          } else {
            add_backward(source, rec.at("sentence").get<std::string>(), lp,
                         line_no);
          }
        } else {
          throw FormatError("unknown op \"" + op + "\"");
        }
      } catch (const json::exception& e) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
      } catch (const Error& e) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
      }
    }
  }

  std::map<std::string, std::vector<ScoredCandidate>> signatures_;
  std::map<Key, std::vector<ScoredCandidate>> sentences_;
  std::map<Key, double> backward_;
};

}  // namespace

std::shared_ptr<ScorerBackend> make_fixture_backend(
    const std::filesystem::path& path) {
  return std::make_shared<FixtureScorer>(path);
}

}  // namespace cod3s
