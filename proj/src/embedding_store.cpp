#include "cod3s/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "cod3s/errors.hpp"

namespace cod3s {
namespace {

bool all_zero(std::span<const float> row) {
  for (float x : row) {
    if (x != 0.0f) return false;
  }
  return true;
}

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw DomainError("cosine_similarity: length mismatch (" +
                      std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) {
    throw DomainError("cosine_similarity: zero vector");
  }
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  // Rounding can push |c| just past 1.
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DomainError("embedding dim must be positive");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> values,
                                 std::vector<std::string> sentences)
    : dim_(dim), values_(std::move(values)), sentences_(std::move(sentences)) {
  if (dim == 0) throw DomainError("embedding dim must be positive");
  if (values_.size() != sentences_.size() * dim_) {
    throw DomainError("embedding values (" + std::to_string(values_.size()) +
                      ") do not match " + std::to_string(sentences_.size()) +
                      " rows of dim " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < count(); ++i) {
    if (all_zero(row(i))) {
      throw InvariantError("embedding row " + std::to_string(i) +
                           " is the zero vector");
    }
  }
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  if (i >= count()) {
    throw DomainError("row " + std::to_string(i) + " out of range (count " +
                      std::to_string(count()) + ")");
  }
  return std::span<const float>(values_).subspan(i * dim_, dim_);
}

const std::string& EmbeddingMatrix::sentence(std::size_t i) const {
  if (i >= count()) {
    throw DomainError("sentence " + std::to_string(i) + " out of range");
  }
  return sentences_[i];
}

void EmbeddingMatrix::append(std::span<const float> vector,
                             std::string sentence) {
  if (vector.size() != dim_) {
    throw DomainError("append: vector has dim " +
                      std::to_string(vector.size()) + ", expected " +
                      std::to_string(dim_));
  }
  if (all_zero(vector)) {
    throw InvariantError("embedding row " + std::to_string(count()) +
                         " is the zero vector");
  }
  values_.insert(values_.end(), vector.begin(), vector.end());
  sentences_.push_back(std::move(sentence));
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path side = path;
  side.replace_extension(".txt");
  return side;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, kEmbeddingMagic, path.string());
  const auto count = detail::read_le<std::uint32_t>(in, "embedding count");
  const auto dim = detail::read_le<std::uint32_t>(in, "embedding dim");
  if (dim == 0) throw FormatError("embedding dim 0 in " + path.string());

  std::vector<float> values(static_cast<std::size_t>(count) * dim);
  for (auto& v : values) v = detail::read_f32(in, "embedding payload");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after embedding payload in " +
                      path.string());
  }

  const auto side = sidecar_path(path);
  std::ifstream text(side, std::ios::binary);
  if (!text) throw IoError("cannot open sentence sidecar " + side.string());
  std::vector<std::string> sentences;
  sentences.reserve(count);
  for (std::string line; std::getline(text, line, '\n');) {
    sentences.push_back(std::move(line));
  }
  if (sentences.size() != count) {
    throw AlignmentError(path.string() + " holds " + std::to_string(count) +
                         " rows but " + side.string() + " has " +
                         std::to_string(sentences.size()) + " lines");
  }
  return EmbeddingMatrix(dim, std::move(values), std::move(sentences));
}

void save_embeddings(const EmbeddingMatrix& matrix,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
  detail::write_le(out, static_cast<std::uint32_t>(matrix.count()));
  detail::write_le(out, static_cast<std::uint32_t>(matrix.dim()));
  for (float v : matrix.values()) detail::write_f32(out, v);
  if (!out.flush()) throw IoError("write failed for " + path.string());

  const auto side = sidecar_path(path);
  std::ofstream text(side, std::ios::binary | std::ios::trunc);
  if (!text) throw IoError("cannot write " + side.string());
  for (const auto& s : matrix.sentences()) {
    if (s.find('\n') != std::string::npos) {
      throw DomainError("sentence contains a newline; sidecar is line-based");
    }
    text << s << '\n';
  }
  if (!text.flush()) throw IoError("write failed for " + side.string());
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  return cosine_impl(u, v);
}

double cosine_similarity(std::span<const double> u,
                         std::span<const double> v) {
  return cosine_impl(u, v);
}

}  // namespace cod3s
