#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cod3s {

/// Row-aligned sentence embeddings together with the sentences they encode.
///
/// Values are held at the 32-bit storage precision so that a load/save cycle
/// is bit-exact; every reduction over them accumulates in double.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim);

  /// Takes ownership of row-major values. Throws DomainError when the shape
  /// does not match and InvariantError naming the first all-zero row.
  EmbeddingMatrix(std::size_t dim, std::vector<float> values,
                  std::vector<std::string> sentences);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }

  std::span<const float> row(std::size_t i) const;
  const std::string& sentence(std::size_t i) const;

  std::span<const float> values() const noexcept { return values_; }
  const std::vector<std::string>& sentences() const noexcept {
    return sentences_;
  }

  /// Appends one row; same checks as the bulk constructor.
  void append(std::span<const float> vector, std::string sentence);

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_;
  std::vector<float> values_;
  std::vector<std::string> sentences_;
};

inline constexpr char kEmbeddingMagic[8] = {'C', 'O', 'D', 'E',
                                            'M', 'B', '1', '\0'};
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

/// Path of the sentence sidecar: same path with its extension replaced by
/// ".txt".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingMatrix& matrix,
                     const std::filesystem::path& path);

/// dot(u, v) / (|u| |v|) with double accumulation. Cosine distance anywhere
/// in the toolkit is 1 minus this value.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

inline double cosine_distance(std::span<const float> u,
                              std::span<const float> v) {
  return 1.0 - cosine_similarity(u, v);
}

}  // namespace cod3s
