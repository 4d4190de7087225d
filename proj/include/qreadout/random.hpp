#ifndef QREADOUT_RANDOM_HPP
#define QREADOUT_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include "qreadout/qlinalg.hpp"

namespace qreadout {

//! SplitMix64 finaliser; mixes a 64-bit word into a well-distributed one.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Seed of child stream `index` of `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

//! Seedable, splittable pseudorandom stream.
//!
//! Named streams (`Rng(seed, "dynamics")`, `Rng(seed, "srd")`) never share
//! state, so drawing from one cannot shift the sequence of another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::string_view stream) : Rng(derive_seed(seed, hash_name(stream))) {}

  std::uint64_t seed() const { return seed_; }

  Rng split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }

  //! Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

//! Index i drawn with probability p[i]; zero-probability entries are never chosen.
inline std::size_t sample_index(const std::vector<double>& p, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  if (last_positive == p.size()) throw NumericalDegeneracy("no outcome has positive probability");
  return last_positive;
}

inline Matrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = Complex(rng.normal(), rng.normal());
  return g;
}

//! Haar-random unitary (QR of a Ginibre matrix with the phase of R fixed).
inline Matrix random_unitary(std::size_t dim, Rng& rng) {
  const Matrix g = random_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

inline Vector random_pure_vector(std::size_t dim, Rng& rng) {
  Vector v = random_ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

//! Random mixed state of the given rank (0 = full rank), G G^dag / Tr.
inline DensityMatrix random_density_matrix(const HilbertSpace& space, Rng& rng, std::size_t rank = 0) {
  const std::size_t d = space.dimension();
  if (rank == 0 || rank > d) rank = d;
  const Matrix g = random_ginibre(d, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::unchecked(space, hermitian_part(rho));
}

//! Random channel with `count` Kraus operators from a Haar isometry.
inline KrausChannel random_channel(std::size_t dim, std::size_t count, Rng& rng) {
  const Matrix u = random_unitary(dim * count, rng);
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<Matrix> ops;
  for (std::size_t k = 0; k < count; ++k)
    ops.push_back(u.block(static_cast<Eigen::Index>(k) * d, 0, d, d));
  return KrausChannel(std::move(ops));
}

}  // namespace qreadout

#endif  // QREADOUT_RANDOM_HPP
