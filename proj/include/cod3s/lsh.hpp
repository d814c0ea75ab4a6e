#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cod3s/embedding_store.hpp"
#include "cod3s/signature.hpp"

namespace cod3s {

/// Identifier written into hyperplane files for the Gaussian generator below.
/// Bump it whenever the sample stream for a given seed changes.
inline constexpr std::uint32_t kGeneratorSplitMixBoxMullerV1 = 1;

/// Counter-based standard-normal stream.
///
/// Uniform draw n is splitmix64(seed + (n + 1) * golden_gamma), reduced to
/// 53 bits. Normals come in Box-Muller pairs from uniforms (2m, 2m+1): the
/// cosine branch is normal 2m and the sine branch normal 2m+1. The stream is
/// a pure function of (seed, index), so any slice can be recomputed.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : seed_(seed) {}

  double next();
  double uniform(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t uniform_index_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// b random normal vectors defining the cosine-sign hash family. Normals are
/// held in 32-bit floats, matching the on-disk precision, so hashing with a
/// freshly generated set and with its reloaded copy agree bit for bit.
class HyperplaneSet {
 public:
  HyperplaneSet(std::size_t bits, std::size_t dim, std::vector<float> normals,
                std::uint64_t seed,
                std::uint32_t generator_id = kGeneratorSplitMixBoxMullerV1);

  std::size_t bits() const noexcept { return bits_; }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t generator_id() const noexcept { return generator_id_; }

  std::span<const float> normal(std::size_t i) const;
  std::span<const float> values() const noexcept { return normals_; }

  friend bool operator==(const HyperplaneSet&, const HyperplaneSet&) = default;

 private:
  std::size_t bits_;
  std::size_t dim_;
  std::vector<float> normals_;
  std::uint64_t seed_;
  std::uint32_t generator_id_;
};

inline constexpr char kHyperplaneMagic[8] = {'C', 'O', 'D', 'L',
                                             'S', 'H', '1', '\0'};

/// Row-major bits x dim standard normals drawn from GaussianStream(seed).
HyperplaneSet generate_hyperplanes(std::size_t dim, std::size_t bits,
                                   std::uint64_t seed);

HyperplaneSet load_hyperplanes(const std::filesystem::path& path);
void save_hyperplanes(const HyperplaneSet& planes,
                      const std::filesystem::path& path);

/// Bit i is 1 iff normal(i) . v >= 0; an exact zero dot product maps to 1.
Signature hash_vector(const HyperplaneSet& planes, std::span<const float> v);
Signature hash_vector(const HyperplaneSet& planes, std::span<const double> v);

/// cos(pi * d / bits), the angle estimate implied by a Hamming distance.
double approx_cosine(std::size_t hamming, std::size_t bits);

/// hash_vector over every row, in row order. jobs > 1 splits the rows into
/// contiguous blocks hashed on worker threads.
std::vector<Signature> hash_corpus(const HyperplaneSet& planes,
                                   const EmbeddingMatrix& matrix,
                                   std::size_t jobs = 1);

/// Signature text files: one '0'/'1' string per line, row-aligned with the
/// embedding sidecar. Loading rejects mixed widths.
std::vector<Signature> load_signatures(const std::filesystem::path& path);
void save_signatures(std::span<const Signature> signatures,
                     const std::filesystem::path& path);

}  // namespace cod3s
