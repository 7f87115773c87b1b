#pragma once

#include <span>
#include <vector>

#include "mcast/hermitian.hpp"

namespace mcast {

inline constexpr int kPowerMethodIters = 50;
inline constexpr double kPowerMethodEps = 1e-8;
/// Largest dimension accepted by eig_oracle.
inline constexpr std::size_t kOracleMaxDim = 64;

struct EigenPair {
  double value = 0.0;
  ComplexVec vector;
};

/// Dominant eigenpair by power iteration u <- Au / |Au|.
///
/// Starts from `start` when given (warm start), otherwise from the normalized
/// all-ones vector. Stops when |u - u'|_inf < eps or after max_iters steps and
/// returns the Rayleigh quotient with the phase-normalized vector. If Au
/// vanishes (|Au| < 1e-300) the iteration restarts once from (e1 + i e2)/sqrt(2)
/// for nonzero A; failing that it returns (0, start), which makes any
/// downstream perturbation a no-op.
EigenPair power_method(const HermitianMatrix& a, int max_iters = kPowerMethodIters,
                       double eps = kPowerMethodEps, std::span<const Complex> start = {});

/// X - lambda_max u u^H
HermitianMatrix residual_component(const HermitianMatrix& x, const EigenPair& pair);

/// Rotates u so its first entry of largest modulus is real and nonnegative.
void normalize_phase(ComplexVec& u);

struct EigenDecomposition {
  std::vector<double> values;        // descending
  std::vector<ComplexVec> vectors;   // orthonormal, phase-normalized
};

/// Full spectral decomposition by cyclic complex Jacobi rotations.
/// Throws std::invalid_argument for dim > kOracleMaxDim.
EigenDecomposition eig_oracle(const HermitianMatrix& a);
/// Dense overload; throws std::invalid_argument unless the input is
/// Hermitian to 1e-12 relative.
EigenDecomposition eig_oracle(std::size_t n, std::span<const Complex> dense);

/// V diag(values) V^H
HermitianMatrix reconstruct(const EigenDecomposition& d);

}  // namespace mcast
