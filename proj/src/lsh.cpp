#include "cod3s/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include "binary_io.hpp"
#include "cod3s/errors.hpp"

namespace cod3s {
namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <typename T>
Signature hash_impl(const HyperplaneSet& planes, std::span<const T> v) {
  if (v.size() != planes.dim()) {
    throw DomainError("hash_vector: vector dim " + std::to_string(v.size()) +
                      " != hyperplane dim " + std::to_string(planes.dim()));
  }
  Signature sig(planes.bits());
  for (std::size_t i = 0; i < planes.bits(); ++i) {
    const auto r = planes.normal(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      dot += static_cast<double>(r[j]) * static_cast<double>(v[j]);
    }
    sig.set(i, dot >= 0.0);
  }
  return sig;
}

}  // namespace

double GaussianStream::uniform(std::uint64_t index) const {
  const std::uint64_t x = splitmix64(seed_ + (index + 1) * kGoldenGamma);
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform(uniform_index_);
  const double u2 = uniform(uniform_index_ + 1);
  uniform_index_ += 2;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(theta);
  have_spare_ = true;
  return radius * std::cos(theta);
}

HyperplaneSet::HyperplaneSet(std::size_t bits, std::size_t dim,
                             std::vector<float> normals, std::uint64_t seed,
                             std::uint32_t generator_id)
    : bits_(bits),
      dim_(dim),
      normals_(std::move(normals)),
      seed_(seed),
      generator_id_(generator_id) {
  if (bits == 0 || dim == 0) {
    throw DomainError("hyperplane set needs bits >= 1 and dim >= 1");
  }
  if (normals_.size() != bits * dim) {
    throw DomainError("hyperplane values do not form a " +
                      std::to_string(bits) + "x" + std::to_string(dim) +
                      " matrix");
  }
  for (std::size_t i = 0; i < bits; ++i) {
    const auto r = normal(i);
    if (std::all_of(r.begin(), r.end(), [](float x) { return x == 0.0f; })) {
      throw InvariantError("hyperplane normal " + std::to_string(i) +
                           " is the zero vector");
    }
  }
}

std::span<const float> HyperplaneSet::normal(std::size_t i) const {
  if (i >= bits_) throw DomainError("hyperplane index out of range");
  return std::span<const float>(normals_).subspan(i * dim_, dim_);
}

HyperplaneSet generate_hyperplanes(std::size_t dim, std::size_t bits,
                                   std::uint64_t seed) {
  if (dim == 0 || bits == 0) {
    throw DomainError("generate_hyperplanes: dim and bits must be positive");
  }
  GaussianStream stream(seed);
  std::vector<float> normals(bits * dim);
  for (auto& x : normals) x = static_cast<float>(stream.next());
  return HyperplaneSet(bits, dim, std::move(normals), seed);
}

HyperplaneSet load_hyperplanes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, kHyperplaneMagic, path.string());
  const auto bits = detail::read_le<std::uint32_t>(in, "hyperplane bits");
  const auto dim = detail::read_le<std::uint32_t>(in, "hyperplane dim");
  const auto seed = detail::read_le<std::uint64_t>(in, "hyperplane seed");
  const auto gen = detail::read_le<std::uint32_t>(in, "generator id");
  if (bits == 0 || dim == 0) {
    throw FormatError("zero bits or dim in " + path.string());
  }
  std::vector<float> normals(static_cast<std::size_t>(bits) * dim);
  for (auto& x : normals) x = detail::read_f32(in, "hyperplane payload");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after hyperplane payload in " +
                      path.string());
  }
  return HyperplaneSet(bits, dim, std::move(normals), seed, gen);
}

void save_hyperplanes(const HyperplaneSet& planes,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kHyperplaneMagic, sizeof kHyperplaneMagic);
  detail::write_le(out, static_cast<std::uint32_t>(planes.bits()));
  detail::write_le(out, static_cast<std::uint32_t>(planes.dim()));
  detail::write_le(out, planes.seed());
  detail::write_le(out, planes.generator_id());
  for (float x : planes.values()) detail::write_f32(out, x);
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

Signature hash_vector(const HyperplaneSet& planes, std::span<const float> v) {
  return hash_impl(planes, v);
}

Signature hash_vector(const HyperplaneSet& planes, std::span<const double> v) {
  return hash_impl(planes, v);
}

double approx_cosine(std::size_t hamming, std::size_t bits) {
  if (bits == 0) throw DomainError("approx_cosine: bits must be positive");
  if (hamming > bits) {
    throw DomainError("approx_cosine: distance " + std::to_string(hamming) +
                      " exceeds width " + std::to_string(bits));
  }
  // Exact at the endpoints and the midpoint, where cos() of a rounded pi
  // multiple would otherwise leave ~1e-16 residue.
  if (hamming == 0) return 1.0;
  if (hamming == bits) return -1.0;
  if (2 * hamming == bits) return 0.0;
  return std::cos(std::numbers::pi * static_cast<double>(hamming) /
                  static_cast<double>(bits));
}

std::vector<Signature> hash_corpus(const HyperplaneSet& planes,
                                   const EmbeddingMatrix& matrix,
                                   std::size_t jobs) {
  if (planes.dim() != matrix.dim()) {
    throw DomainError("hash_corpus: hyperplane dim " +
                      std::to_string(planes.dim()) + " != embedding dim " +
                      std::to_string(matrix.dim()));
  }
  const std::size_t n = matrix.count();
  std::vector<Signature> out(n);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = hash_vector(planes, matrix.row(i));
    return out;
  }
  const std::size_t block = (n + jobs - 1) / jobs;
  {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t start = 0; start < n; start += block) {
      const std::size_t stop = std::min(n, start + block);
      workers.emplace_back([&, start, stop] {
        for (std::size_t i = start; i < stop; ++i) {
          out[i] = hash_vector(planes, matrix.row(i));
        }
      });
    }
  }
  return out;
}

std::vector<Signature> load_signatures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Signature> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      out.push_back(Signature::parse(line));
    } catch (const Error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    if (out.back().bits() != out.front().bits()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": signature width differs from line 1");
    }
  }
  return out;
}

void save_signatures(std::span<const Signature> signatures,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : signatures) out << s.to_string() << '\n';
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

}  // namespace cod3s
