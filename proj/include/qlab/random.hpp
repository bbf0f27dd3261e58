#pragma once

// Seeded sampling: splittable seeds, Haar-random contexts and states.

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>

#include "qlab/state.hpp"

namespace qlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`; independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Portable generator: boost distributions have fixed algorithms, unlike
/// the <random> ones, so a seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::uint64_t next() { return engine_(); }
  Complex complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

inline CMatrix complex_gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.complex_gaussian();
  }
  return g;
}

/// Haar-distributed unitary columns: QR of a complex Ginibre matrix with the
/// phases of diag(R) moved into Q.
inline CMatrix haar_unitary(Rng& rng, std::size_t dim) {
  if (dim < 1) throw DimensionError("haar_basis: dim must be >= 1");
  const auto n = detail::to_index(dim);
  const CMatrix g = complex_gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

inline OrthonormalBasis haar_basis(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return OrthonormalBasis(haar_unitary(rng, dim));
}

/// Unitarily invariant random pure state (normalized complex Gaussian).
inline StateVector haar_state(std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionError("haar_state: dim must be >= 1");
  Rng rng(seed);
  return StateVector::normalized(complex_gaussian_matrix(rng, detail::to_index(dim), 1).col(0));
}

/// A second context sharing b_k with `basis`: column 0 is b_k, the remaining
/// columns are a Haar-random rotation of the orthogonal complement of b_k.
inline OrthonormalBasis random_sharing_basis(const OrthonormalBasis& basis, std::size_t k,
                                             std::uint64_t seed) {
  const std::size_t dim = basis.dim();
  if (k >= dim) throw DimensionError("random_sharing_basis: index out of range");
  const auto n = detail::to_index(dim);
  CMatrix complement(n, n - 1);
  for (Eigen::Index j = 0, c = 0; j < n; ++j) {
    if (j != detail::to_index(k)) complement.col(c++) = basis.matrix().col(j);
  }
  CMatrix out(n, n);
  out.col(0) = basis.matrix().col(detail::to_index(k));
  if (n > 1) {
    Rng rng(seed);
    out.rightCols(n - 1) = complement * haar_unitary(rng, dim - 1);
  }
  return OrthonormalBasis(std::move(out));
}

}  // namespace qlab
