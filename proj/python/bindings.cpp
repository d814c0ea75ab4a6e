#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cod3s/diversity.hpp"
#include "cod3s/embedding_store.hpp"
#include "cod3s/errors.hpp"
#include "cod3s/lsh.hpp"
#include "cod3s/pipeline.hpp"
#include "cod3s/scorer.hpp"
#include "cod3s/semantic_bins.hpp"
#include "cod3s/signature.hpp"
#include "cod3s/version.hpp"

namespace py = pybind11;
using namespace cod3s;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& values, std::vector<std::string> sentences) {
  if (values.ndim() != 2) throw DomainError("embeddings must be a 2-d array");
  const auto rows = static_cast<std::size_t>(values.shape(0));
  const auto dim = static_cast<std::size_t>(values.shape(1));
  if (sentences.empty() && rows > 0) {
    for (std::size_t i = 0; i < rows; ++i) sentences.push_back(std::to_string(i));
  }
  std::vector<float> flat(values.data(), values.data() + rows * dim);
  return EmbeddingMatrix(dim, std::move(flat), std::move(sentences));
}

FloatArray to_array(const EmbeddingMatrix& m) {
  FloatArray out({m.count(), m.dim()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

std::vector<Signature> parse_all(const std::vector<std::string>& texts) {
  std::vector<Signature> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Signature::parse(t));
  return out;
}

// Candidates cross the boundary as (payload, forward, backward-or-None).
using CandidateTuple = std::tuple<std::string, double, std::optional<double>>;

std::vector<ScoredCandidate> to_candidates(const std::vector<CandidateTuple>& in,
                                           bool signatures) {
  std::vector<ScoredCandidate> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto& [payload, fwd, bwd] = in[i];
    ScoredCandidate c;
    c.payload = signatures ? Payload{Signature::parse(payload)} : Payload{payload};
    c.forward_logprob = c.combined = fwd;
    c.backward_logprob = bwd;
    c.forward_rank = i;
    out.push_back(std::move(c));
  }
  return out;
}

py::list from_candidates(const std::vector<ScoredCandidate>& in) {
  py::list out;
  for (const auto& c : in) {
    py::dict d;
    d["payload"] = payload_text(c.payload);
    d["forward_logprob"] = c.forward_logprob;
    d["backward_logprob"] = c.backward_logprob;
    d["combined"] = c.combined;
    d["forward_rank"] = c.forward_rank;
    out.append(d);
  }
  return out;
}

py::dict outputs_to_dict(const DiverseOutputs& o) {
  py::list picks, gaps;
  for (const auto& p : o.picks) {
    py::dict d;
    d["signature"] = p.signature.to_string();
    d["sentence"] = p.sentence;
    d["signature_score"] = p.signature_score;
    d["sentence_score"] = p.sentence_score;
    d["signature_forward_rank"] = p.signature_forward_rank;
    d["signature_mmi_rank"] = p.signature_mmi_rank;
    picks.append(d);
  }
  for (const auto& g : o.gaps) {
    py::dict d;
    d["signature"] = g.signature.to_string();
    d["error"] = g.error;
    gaps.append(d);
  }
  py::dict out;
  out["source"] = o.source;
  out["picks"] = picks;
  out["gaps"] = gaps;
  return out;
}

}  // namespace

PYBIND11_MODULE(_cod3s, m) {
  m.doc() = "Native core of the cod3s toolkit.";
  m.attr("__version__") = kVersion;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<AlignmentError>(m, "AlignmentError", error);
  py::register_exception<InvariantError>(m, "InvariantError", error);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<ContractError>(m, "ContractError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<NotFoundError>(m, "NotFoundError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<GatewayError>(m, "GatewayError", error);

  // Embeddings
  m.def("save_embeddings",
        [](const std::filesystem::path& path, const FloatArray& values,
           std::vector<std::string> sentences) {
          save_embeddings(to_matrix(values, std::move(sentences)), path);
        },
        py::arg("path"), py::arg("embeddings"), py::arg("sentences"),
        "Write a CODEMB1 file plus its .txt sidecar.");
  m.def("load_embeddings",
        [](const std::filesystem::path& path) {
          const auto mat = load_embeddings(path);
          return py::make_tuple(to_array(mat), mat.sentences());
        },
        py::arg("path"), "Returns (float32 array of shape (n, dim), sentences).");

  // Signatures and hashing
  m.def("hamming_distance",
        [](const std::string& a, const std::string& b) {
          return hamming_distance(Signature::parse(a), Signature::parse(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("approx_cosine", &approx_cosine, py::arg("hamming"), py::arg("bits"));

  py::class_<HyperplaneSet>(m, "HyperplaneSet")
      .def_property_readonly("bits", &HyperplaneSet::bits)
      .def_property_readonly("dim", &HyperplaneSet::dim)
      .def_property_readonly("seed", &HyperplaneSet::seed)
      .def_property_readonly("generator_id", &HyperplaneSet::generator_id)
      .def("normals", [](const HyperplaneSet& p) {
        FloatArray out({p.bits(), p.dim()});
        std::copy(p.values().begin(), p.values().end(), out.mutable_data());
        return out;
      })
      .def("save", [](const HyperplaneSet& p, const std::filesystem::path& path) {
        save_hyperplanes(p, path);
      })
      .def("__eq__", [](const HyperplaneSet& a, const HyperplaneSet& b) { return a == b; });
  m.def("generate_hyperplanes", &generate_hyperplanes, py::arg("dim"), py::arg("bits"),
        py::arg("seed"));
  m.def("load_hyperplanes", &load_hyperplanes, py::arg("path"));
  m.def("hash",
        [](const HyperplaneSet& planes, const FloatArray& values, std::size_t jobs) {
          std::vector<std::string> out;
          if (values.ndim() == 1) {
            std::span<const float> v(values.data(), static_cast<std::size_t>(values.shape(0)));
            out.push_back(hash_vector(planes, v).to_string());
            return out;
          }
          for (const auto& s : hash_corpus(planes, to_matrix(values, {}), jobs)) {
            out.push_back(s.to_string());
          }
          return out;
        },
        py::arg("planes"), py::arg("embeddings"), py::arg("jobs") = 1,
        "Signatures as bit strings, one per row (or one for a 1-d vector).");

  // Bins
  py::class_<BinIndex>(m, "BinIndex")
      .def_property_readonly("bits", &BinIndex::bits)
      .def("__len__", &BinIndex::size)
      .def("bins", [](const BinIndex& index) {
        py::dict out;
        for (const auto& [sig, members] : index.bins()) out[py::str(sig.to_string())] = members;
        return out;
      })
      .def("query_prefix", [](const BinIndex& index, const std::string& prefix) {
        return query_prefix(index, prefix);
      }, py::arg("prefix"))
      .def("stats", [](const BinIndex& index, std::size_t prefix_bits) {
        const auto s = bin_stats(index, prefix_bits);
        py::dict d;
        d["bits_evaluated"] = s.bits_evaluated;
        d["populated_bins"] = s.populated_bins;
        d["percent_populated"] = s.percent_populated;
        d["mean_sentences_per_bin"] = s.mean_sentences_per_bin;
        d["std_sentences_per_bin"] = s.std_sentences_per_bin;
        d["mean_unigrams_per_bin"] = s.mean_unigrams_per_bin;
        d["std_unigrams_per_bin"] = s.std_unigrams_per_bin;
        return d;
      }, py::arg("prefix_bits"));
  m.def("build_index",
        [](const std::vector<std::string>& signatures, const FloatArray& values,
           std::vector<std::string> sentences) {
          return build_index(parse_all(signatures), to_matrix(values, std::move(sentences)));
        },
        py::arg("signatures"), py::arg("embeddings"), py::arg("sentences"));
  m.def("bin_medoid",
        [](const BinIndex& index, const FloatArray& values, const std::string& signature) {
          return bin_medoid(index, to_matrix(values, index.sentences()),
                            Signature::parse(signature));
        },
        py::arg("index"), py::arg("embeddings"), py::arg("signature"));

  // Decoding
  m.def("mmi_rerank",
        [](const std::vector<CandidateTuple>& candidates, double lambda) {
          return from_candidates(mmi_rerank(to_candidates(candidates, false), lambda));
        },
        py::arg("candidates"), py::arg("lam"),
        "candidates: (payload, forward, backward) in forward order.");
  m.def("greedy_hamming_filter",
        [](const std::vector<CandidateTuple>& ranked, std::size_t t, std::size_t k) {
          return from_candidates(greedy_hamming_filter(to_candidates(ranked, true), t, k));
        },
        py::arg("ranked"), py::arg("t"), py::arg("k"));
  m.def("decode",
        [](const std::vector<std::string>& sources, const std::string& scorer,
           const std::string& endpoint, std::size_t k, double lambda_s, double lambda_y,
           std::size_t threshold, std::size_t signature_beam, std::size_t sentence_beam,
           bool mmi_signatures, bool mmi_sentences) {
          ScorerConfig sc;
          sc.mode = parse_scorer_mode(scorer);
          sc.endpoint = endpoint;
          sc.signature_beam = signature_beam;
          sc.sentence_beam = sentence_beam;
          PipelineConfig pc;
          pc.k = k;
          pc.lambda_s = lambda_s;
          pc.lambda_y = lambda_y;
          pc.hamming_threshold = threshold;
          pc.mmi_signatures = mmi_signatures;
          pc.mmi_sentences = mmi_sentences;
          std::vector<DiverseOutputs> results;
          {
            py::gil_scoped_release release;
            ScorerGateway gateway(sc);
            for (const auto& s : sources) results.push_back(run_pipeline(s, pc, gateway));
          }
          py::list out;
          for (const auto& r : results) out.append(outputs_to_dict(r));
          return out;
        },
        py::arg("sources"), py::arg("scorer"), py::arg("endpoint"), py::arg("k") = 3,
        py::arg("lambda_s") = 1000.0, py::arg("lambda_y") = 0.3, py::arg("threshold") = 2,
        py::arg("signature_beam") = 100, py::arg("sentence_beam") = 40,
        py::arg("mmi_signatures") = true, py::arg("mmi_sentences") = true);

  // Evaluation
  m.def("sentence_bleu", &sentence_bleu, py::arg("hypothesis"), py::arg("reference"),
        py::arg("max_n"));
  m.def("pairwise_diversity",
        [](const std::vector<std::string>& sentences, const std::string& metric,
           std::optional<FloatArray> values) {
          if (!values) {
            return pairwise_diversity(sentences, parse_diversity_metric(metric));
          }
          const auto mat = to_matrix(*values, sentences);
          return pairwise_diversity(sentences, parse_diversity_metric(metric), &mat);
        },
        py::arg("sentences"), py::arg("metric"), py::arg("embeddings") = py::none());
  m.def("count_distinct",
        [](const std::vector<std::string>& sentences, const FloatArray& values,
           double threshold) {
          const auto r = count_distinct(sentences, to_matrix(values, sentences), threshold);
          std::vector<std::tuple<std::size_t, std::size_t, double>> dups;
          for (const auto& d : r.duplicates) dups.emplace_back(d.index, d.representative, d.distance);
          return py::make_tuple(r.distinct_count, dups);
        },
        py::arg("sentences"), py::arg("embeddings"), py::arg("threshold"),
        "Returns (distinct_count, [(index, representative, distance), ...]).");
  m.def("spearman_rho",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return spearman_rho(a, b);
        },
        py::arg("a"), py::arg("b"));
  m.def("sts_eval",
        [](const std::vector<std::tuple<std::size_t, std::size_t, double>>& pairs,
           const FloatArray& values, const std::vector<std::size_t>& widths,
           std::uint64_t seed) {
          std::vector<StsPair> ps;
          for (const auto& [a, b, s] : pairs) ps.push_back({a, b, s});
          std::vector<std::pair<std::string, double>> out;
          for (const auto& row : sts_eval(ps, to_matrix(values, {}), widths, seed)) {
            out.emplace_back(row.label, row.spearman);
          }
          return out;
        },
        py::arg("pairs"), py::arg("embeddings"), py::arg("widths"), py::arg("seed"));
}
