#pragma once

// Random fixtures shared by the unit suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcast/hermitian.hpp"

namespace mcast::test {

inline HermitianMatrix random_hermitian(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<Complex> a(n * n);
  for (Complex& z : a) z = Complex(g(rng), g(rng));
  return HermitianMatrix::from_dense(n, a);
}

inline ComplexVec random_vec(std::size_t n, std::mt19937_64& rng) { return sample_gaussian(n, rng); }

/// Unitary from the Gram-Schmidt orthonormalization of a Gaussian matrix.
inline std::vector<ComplexVec> random_unitary(std::size_t n, std::mt19937_64& rng) {
  std::vector<ComplexVec> cols;
  while (cols.size() < n) {
    ComplexVec v = sample_gaussian(n, rng);
    for (const ComplexVec& c : cols) {
      const Complex p = dot(c, v);
      for (std::size_t i = 0; i < n; ++i) v[i] -= p * c[i];
    }
    if (v.norm() > 1e-6) cols.push_back(v.normalized());
  }
  return cols;
}

/// U diag(values) U^H for a random unitary U.
inline HermitianMatrix with_spectrum(const std::vector<double>& values, std::mt19937_64& rng,
                                     std::vector<ComplexVec>* vectors = nullptr) {
  const std::size_t n = values.size();
  const std::vector<ComplexVec> u = random_unitary(n, rng);
  HermitianMatrix x = HermitianMatrix::zero(n);
  for (std::size_t i = 0; i < n; ++i) x.add_outer(u[i], values[i]);
  if (vectors != nullptr) *vectors = u;
  return x;
}

/// Random PSD matrix G G^H with G of size n x r.
inline HermitianMatrix random_psd(std::size_t n, std::size_t rank, std::mt19937_64& rng) {
  HermitianMatrix x = HermitianMatrix::zero(n);
  for (std::size_t r = 0; r < rank; ++r) x.add_outer(sample_gaussian(n, rng), 1.0);
  return x;
}

inline double max_abs_diff(const HermitianMatrix& a, const HermitianMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace mcast::test
