#include "cod3s/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cod3s/diversity.hpp"
#include "cod3s/embedding_store.hpp"
#include "cod3s/errors.hpp"
#include "cod3s/lsh.hpp"
#include "cod3s/pipeline.hpp"
#include "cod3s/scorer.hpp"
#include "cod3s/semantic_bins.hpp"
#include "cod3s/version.hpp"

namespace cod3s::cli {
namespace {

using json = nlohmann::json;

json manifest(const std::string& subcommand, json inputs, json config,
              std::optional<std::uint64_t> seed = std::nullopt) {
  json m = {{"tool", "cod3s"},
            {"version", kVersion},
            {"subcommand", subcommand},
            {"inputs", std::move(inputs)},
            {"config", std::move(config)}};
  m["seed"] = seed ? json(*seed) : json(nullptr);
  return m;
}

/// Sends output to `path`, or to `fallback` when no path was given.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    fallback.flush();
    return;
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot write " + path);
  write(file);
  if (!file.flush()) throw IoError("write failed for " + path);
}

std::vector<std::string> read_lines(const std::string& path, bool skip_blank) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_blank && line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << x;
  return s.str();
}

struct Options {
  std::string output;
  std::size_t jobs = 1;

  // gen-hyperplanes
  std::size_t dim = 0;
  std::size_t bits = 0;
  std::uint64_t seed = 0;

  // shared inputs
  std::string embeddings;
  std::string planes;
  std::string signatures;

  // bins / medoid
  std::vector<std::size_t> widths;
  std::string signature;

  // decode
  std::string source_file;
  std::size_t k = 3;
  double lambda_s = 1000.0;
  double lambda_y = 0.3;
  std::size_t threshold = 2;
  std::string scorer = "fixture";
  std::string endpoint;
  std::string signature_endpoint;
  std::string sentence_endpoint;
  std::string backward_endpoint;
  std::size_t signature_beam = 100;
  std::size_t sentence_beam = 40;
  bool no_mmi_signatures = false;
  bool no_mmi_sentences = false;

  // eval-diversity
  std::string candidates;
  std::string phrase_embeddings;
  double duplicate_threshold = 0.1;

  // eval-sts
  std::string pairs;
};

int run_gen_hyperplanes(const Options& o, std::ostream&) {
  const auto planes = generate_hyperplanes(o.dim, o.bits, o.seed);
  save_hyperplanes(planes, o.output);
  return kExitOk;
}

int run_hash(const Options& o, std::ostream& out) {
  const auto matrix = load_embeddings(o.embeddings);
  const auto planes = load_hyperplanes(o.planes);
  const auto sigs = hash_corpus(planes, matrix, o.jobs);
  emit(o.output, out, [&](std::ostream& s) {
    for (const auto& sig : sigs) s << sig.to_string() << '\n';
  });
  return kExitOk;
}

struct Corpus {
  EmbeddingMatrix matrix;
  BinIndex index;
};

Corpus load_corpus(const Options& o) {
  auto matrix = load_embeddings(o.embeddings);
  const auto sigs = load_signatures(o.signatures);
  auto index = build_index(sigs, matrix);
  return {std::move(matrix), std::move(index)};
}

int run_bins(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o);
  std::vector<std::size_t> widths = o.widths;
  if (widths.empty()) {
    for (std::size_t b = 1; b <= corpus.index.bits(); ++b) widths.push_back(b);
  }
  std::vector<BinStats> rows;
  rows.reserve(widths.size());
  for (std::size_t b : widths) rows.push_back(bin_stats(corpus.index, b));

  const auto m = manifest("bins",
                          {{"embeddings", o.embeddings}, {"signatures", o.signatures}},
                          {{"widths", widths}});
  emit(o.output, out, [&](std::ostream& s) {
    s << "# manifest\t" << m.dump() << '\n';
    s << "bits_evaluated\tpopulated_bins\tpercent_populated\t"
         "mean_sentences_per_bin\tstd_sentences_per_bin\t"
         "mean_unigrams_per_bin\tstd_unigrams_per_bin\n";
    for (const auto& r : rows) {
      s << r.bits_evaluated << '\t' << r.populated_bins << '\t'
        << fmt(r.percent_populated) << '\t' << fmt(r.mean_sentences_per_bin)
        << '\t' << fmt(r.std_sentences_per_bin) << '\t'
        << fmt(r.mean_unigrams_per_bin) << '\t' << fmt(r.std_unigrams_per_bin)
        << '\n';
    }
  });
  return kExitOk;
}

int run_medoid(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o);
  std::vector<Signature> targets;
  if (!o.signature.empty()) {
    targets.push_back(Signature::parse(o.signature));
  } else {
    for (const auto& [sig, members] : corpus.index.bins()) targets.push_back(sig);
  }
  std::vector<std::pair<Signature, std::size_t>> medoids;
  for (const auto& sig : targets) {
    medoids.emplace_back(sig, bin_medoid(corpus.index, corpus.matrix, sig));
  }
  const auto m = manifest("medoid",
                          {{"embeddings", o.embeddings}, {"signatures", o.signatures}},
                          {{"signature", o.signature.empty() ? json(nullptr)
                                                             : json(o.signature)}});
  emit(o.output, out, [&](std::ostream& s) {
    s << "# manifest\t" << m.dump() << '\n';
    s << "signature\tbin_size\tmedoid_index\tmedoid_sentence\n";
    for (const auto& [sig, idx] : medoids) {
      s << sig.to_string() << '\t' << corpus.index.find(sig)->size() << '\t' << idx
        << '\t' << corpus.matrix.sentence(idx) << '\n';
    }
  });
  return kExitOk;
}

int run_decode(const Options& o, std::ostream& out) {
  ScorerConfig sc;
  sc.mode = parse_scorer_mode(o.scorer);
  sc.signature_beam = o.signature_beam;
  sc.sentence_beam = o.sentence_beam;
  sc.endpoint = o.endpoint;
  if (sc.endpoint.empty() && sc.mode == ScorerMode::process) {
    if (const char* env = std::getenv("COD3S_SCORER_CMD")) sc.endpoint = env;
  }
  if (sc.endpoint.empty()) {
    throw ContractError("scorer mode " + o.scorer +
                        " needs --endpoint (or COD3S_SCORER_CMD in process mode)");
  }
  sc.signature_endpoint = o.signature_endpoint;
  sc.sentence_endpoint = o.sentence_endpoint;
  sc.backward_endpoint = o.backward_endpoint;

  PipelineConfig pc;
  pc.k = o.k;
  pc.lambda_s = o.lambda_s;
  pc.lambda_y = o.lambda_y;
  pc.hamming_threshold = o.threshold;
  pc.mmi_signatures = !o.no_mmi_signatures;
  pc.mmi_sentences = !o.no_mmi_sentences;
  pc.jobs = o.jobs;

  const auto sources = read_lines(o.source_file, true);
  ScorerGateway gateway(sc);

  const auto m = manifest(
      "decode", {{"source_file", o.source_file}},
      {{"k", pc.k},
       {"lambda_s", pc.lambda_s},
       {"lambda_y", pc.lambda_y},
       {"threshold", pc.hamming_threshold},
       {"mmi_signatures", pc.mmi_signatures},
       {"mmi_sentences", pc.mmi_sentences},
       {"scorer", {{"mode", o.scorer},
                   {"endpoint", sc.endpoint},
                   {"signature_endpoint", sc.signature_endpoint},
                   {"sentence_endpoint", sc.sentence_endpoint},
                   {"backward_endpoint", sc.backward_endpoint},
                   {"signature_beam", sc.signature_beam},
                   {"sentence_beam", sc.sentence_beam}}}});

  std::vector<json> results;
  results.reserve(sources.size());
  for (const auto& source : sources) {
    const auto result = run_pipeline(source, pc, gateway);
    json picks = json::array();
    for (const auto& p : result.picks) {
      picks.push_back({{"signature", p.signature.to_string()},
                       {"sentence", p.sentence},
                       {"signature_score", p.signature_score},
                       {"sentence_score", p.sentence_score},
                       {"signature_forward_rank", p.signature_forward_rank},
                       {"signature_mmi_rank", p.signature_mmi_rank}});
    }
    json gaps = json::array();
    for (const auto& g : result.gaps) {
      gaps.push_back({{"signature", g.signature.to_string()}, {"error", g.error}});
    }
    results.push_back(
        {{"source", result.source}, {"picks", picks}, {"gaps", gaps}, {"manifest", m}});
  }
  emit(o.output, out, [&](std::ostream& s) {
    for (const auto& r : results) s << r.dump() << '\n';
  });
  return kExitOk;
}

int run_eval_diversity(const Options& o, std::ostream& out) {
  const auto sentences = read_lines(o.candidates, false);
  const auto embeddings = load_embeddings(o.embeddings);
  std::optional<EmbeddingMatrix> phrases;
  if (!o.phrase_embeddings.empty()) phrases = load_embeddings(o.phrase_embeddings);
  const auto report = diversity_report(sentences, embeddings, o.duplicate_threshold,
                                       phrases ? &*phrases : nullptr);
  json dups = json::array();
  for (const auto& d : report.duplicate_map) {
    dups.push_back({{"index", d.index},
                    {"representative", d.representative},
                    {"distance", d.distance}});
  }
  json j = {{"set_size", report.set_size},
            {"bleu1_diversity", report.bleu1_diversity},
            {"bleu2_diversity", report.bleu2_diversity},
            {"cosine_diversity", report.cosine_diversity},
            {"distinct_count", report.distinct_count},
            {"duplicate_map", dups},
            {"manifest",
             manifest("eval-diversity",
                      {{"candidates", o.candidates},
                       {"embeddings", o.embeddings},
                       {"phrase_embeddings", o.phrase_embeddings}},
                      {{"threshold", o.duplicate_threshold}})}};
  emit(o.output, out, [&](std::ostream& s) { s << j.dump() << '\n'; });
  return kExitOk;
}

int run_eval_sts(const Options& o, std::ostream& out) {
  const auto pairs = load_sts_pairs(o.pairs);
  const auto matrix = load_embeddings(o.embeddings);
  const auto table = sts_eval(pairs, matrix, o.widths, o.seed);
  const auto m = manifest("eval-sts",
                          {{"pairs", o.pairs}, {"embeddings", o.embeddings}},
                          {{"widths", o.widths}}, o.seed);
  emit(o.output, out, [&](std::ostream& s) {
    s << "# manifest\t" << m.dump() << '\n';
    s << "label\tspearman_rho\n";
    for (const auto& row : table) s << row.label << '\t' << fmt(row.spearman) << '\n';
  });
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Semantic sentence codes: LSH signatures, semantic bins, "
               "diverse two-stage decoding, and diversity evaluation",
               "cod3s"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-hyperplanes", "Sample a seeded hyperplane set");
  gen->add_option("--dim", o.dim, "Embedding dimensionality")->required();
  gen->add_option("--bits", o.bits, "Signature width")->required();
  gen->add_option("--seed", o.seed, "Generator seed")->required();
  gen->add_option("-o,--output", o.output, "Hyperplane file to write")->required();

  auto* hash = app.add_subcommand("hash", "Hash an embedding file into signatures");
  hash->add_option("--embeddings", o.embeddings, "CODEMB1 file")->required();
  hash->add_option("--planes", o.planes, "CODLSH1 file")->required();
  hash->add_option("-o,--output", o.output, "Signature file (default stdout)");
  hash->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* bins = app.add_subcommand("bins", "Bin population statistics per prefix width");
  bins->add_option("--embeddings", o.embeddings, "CODEMB1 file")->required();
  bins->add_option("--signatures", o.signatures, "Signature file")->required();
  bins->add_option("--widths", o.widths, "Prefix widths (default 1..b)")
      ->delimiter(',');
  bins->add_option("-o,--output", o.output, "TSV output (default stdout)");

  auto* medoid = app.add_subcommand("medoid", "Medoid sentence of one or every bin");
  medoid->add_option("--embeddings", o.embeddings, "CODEMB1 file")->required();
  medoid->add_option("--signatures", o.signatures, "Signature file")->required();
  medoid->add_option("--signature", o.signature, "Bin to query (default all)");
  medoid->add_option("-o,--output", o.output, "TSV output (default stdout)");

  auto* decode = app.add_subcommand("decode", "Two-stage diverse decoding");
  decode->add_option("--source-file", o.source_file, "One source per line")->required();
  decode->add_option("--k", o.k, "Outputs per source")->check(CLI::PositiveNumber);
  decode->add_option("--lambda-s", o.lambda_s, "Signature MMI weight")
      ->check(CLI::NonNegativeNumber);
  decode->add_option("--lambda-y", o.lambda_y, "Sentence MMI weight")
      ->check(CLI::NonNegativeNumber);
  decode->add_option("--threshold", o.threshold, "Hamming threshold t");
  decode->add_option("--scorer", o.scorer, "Scorer backend")
      ->check(CLI::IsMember({"fixture", "process", "ngram"}));
  decode->add_option("--endpoint", o.endpoint,
                     "Fixture JSONL, scorer command, or training TSV");
  decode->add_option("--signature-endpoint", o.signature_endpoint,
                     "Override endpoint for forward signature scoring");
  decode->add_option("--sentence-endpoint", o.sentence_endpoint,
                     "Override endpoint for forward sentence scoring");
  decode->add_option("--backward-endpoint", o.backward_endpoint,
                     "Override endpoint for backward scoring");
  decode->add_option("--signature-beam", o.signature_beam)->check(CLI::PositiveNumber);
  decode->add_option("--sentence-beam", o.sentence_beam)->check(CLI::PositiveNumber);
  decode->add_flag("--no-mmi-signatures", o.no_mmi_signatures);
  decode->add_flag("--no-mmi-sentences", o.no_mmi_sentences);
  decode->add_option("--jobs", o.jobs, "Parallel stage-two decodes")
      ->check(CLI::PositiveNumber);
  decode->add_option("-o,--output", o.output, "JSONL output (default stdout)");

  auto* div = app.add_subcommand("eval-diversity", "Diversity report for a candidate set");
  div->add_option("--candidates", o.candidates, "Ranked candidates, one per line")
      ->required();
  div->add_option("--embeddings", o.embeddings, "Row-aligned CODEMB1 file")->required();
  div->add_option("--phrase-embeddings", o.phrase_embeddings,
                  "Completed-phrase embeddings for duplicate counting");
  div->add_option("--threshold", o.duplicate_threshold, "Duplicate cosine distance")
      ->check(CLI::NonNegativeNumber);
  div->add_option("-o,--output", o.output, "JSON output (default stdout)");

  auto* sts = app.add_subcommand("eval-sts", "STS correlation table across widths");
  sts->add_option("--pairs", o.pairs, "index-a, index-b, score TSV")->required();
  sts->add_option("--embeddings", o.embeddings, "CODEMB1 file")->required();
  sts->add_option("--widths", o.widths, "Signature widths")
      ->delimiter(',')
      ->required();
  sts->add_option("--seed", o.seed, "Hyperplane seed")->required();
  sts->add_option("-o,--output", o.output, "TSV output (default stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e, out, err);
    }
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen_hyperplanes(o, out);
    if (hash->parsed()) return run_hash(o, out);
    if (bins->parsed()) return run_bins(o, out);
    if (medoid->parsed()) return run_medoid(o, out);
    if (decode->parsed()) return run_decode(o, out);
    if (div->parsed()) return run_eval_diversity(o, out);
    if (sts->parsed()) return run_eval_sts(o, out);
  } catch (const GatewayError& e) {
    err << "cod3s: error: " << e.what() << " (raw reply: " << e.raw_reply() << ")\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "cod3s: error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace cod3s::cli
