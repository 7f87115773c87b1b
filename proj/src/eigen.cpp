#include "mcast/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcast {

namespace {

constexpr double kStallNorm = 1e-300;

ComplexVec default_start(std::size_t n) {
  ComplexVec u(n);
  const double v = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) u[i] = v;
  return u;
}

ComplexVec alternate_start(std::size_t n) {
  ComplexVec u(n);
  if (n == 1) {
    u[0] = 1.0;
  } else {
    u[0] = 1.0 / std::sqrt(2.0);
    u[1] = Complex(0.0, 1.0 / std::sqrt(2.0));
  }
  return u;
}

double max_abs_diff(const ComplexVec& a, const ComplexVec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

void normalize_phase(ComplexVec& u) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = std::abs(u[i]);
    // Strictly larger by a relative margin so near-ties resolve to the
    // lowest index independent of rounding.
    if (m > best_abs * (1.0 + 1e-12)) {
      best_abs = m;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  const Complex rot = std::conj(u[best]) / best_abs;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= rot;
  u[best] = best_abs;
}

EigenPair power_method(const HermitianMatrix& a, int max_iters, double eps,
                       std::span<const Complex> start) {
  if (max_iters < 1) throw std::invalid_argument("power_method: max_iters must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("power_method: eps must be positive");
  const std::size_t n = a.dim();
  if (n == 0) throw std::invalid_argument("power_method: empty matrix");

  ComplexVec initial;
  if (start.empty()) {
    initial = default_start(n);
  } else {
    if (start.size() != n) throw std::invalid_argument("power_method: start length mismatch");
    initial = ComplexVec(std::vector<Complex>(start.begin(), start.end()));
    if (initial.is_zero()) initial = default_start(n);
    initial = initial.normalized();
  }

  ComplexVec u = initial;
  bool restarted = false;
  for (int it = 0; it < max_iters; ++it) {
    ComplexVec au = a.apply(u);
    const double norm = au.norm();
    if (norm < kStallNorm) {
      if (!restarted && !a.is_zero()) {
        restarted = true;
        u = alternate_start(n);
        continue;
      }
      return EigenPair{0.0, initial};
    }
    const ComplexVec previous = std::move(u);
    u = au.scaled(1.0 / norm);
    if (max_abs_diff(u, previous) < eps) break;
  }

  const double value = a.quadratic_form(u) / u.squared_norm();
  normalize_phase(u);
  return EigenPair{value, std::move(u)};
}

HermitianMatrix residual_component(const HermitianMatrix& x, const EigenPair& pair) {
  HermitianMatrix r = x;
  r.add_outer(pair.vector, -pair.value);
  return r;
}

EigenDecomposition eig_oracle(const HermitianMatrix& a) {
  const std::size_t n = a.dim();
  if (n == 0) throw std::invalid_argument("eig_oracle: empty matrix");
  if (n > kOracleMaxDim) throw std::invalid_argument("eig_oracle: dimension exceeds oracle bound");

  std::vector<Complex> m(a.data().begin(), a.data().end());
  std::vector<Complex> v(n * n);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [&](std::size_t i, std::size_t j) -> Complex& { return m[i * n + j]; };

  const double scale = std::max(fro_norm(a), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(at(p, q));
    }
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = at(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();
        // Rotation U = diag(1, conj(phase)) * [[c, s], [-s, c]] zeroes (p, q)
        // of U^H A U.
        const Complex phase = apq / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex upp = c;
        const Complex upq = s;
        const Complex uqp = -s * std::conj(phase);
        const Complex uqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = at(k, p);
          const Complex akq = at(k, q);
          at(k, p) = akp * upp + akq * uqp;
          at(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = at(p, k);
          const Complex aqk = at(q, k);
          at(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          at(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        at(p, q) = at(q, p) = 0.0;
        at(p, p) = at(p, p).real();
        at(q, q) = at(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v[k * n + p];
          const Complex vkq = v[k * n + q];
          v[k * n + p] = vkp * upp + vkq * uqp;
          v[k * n + q] = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return at(i, i).real() > at(j, j).real(); });

  EigenDecomposition d;
  d.values.reserve(n);
  d.vectors.reserve(n);
  for (std::size_t idx : order) {
    d.values.push_back(at(idx, idx).real());
    ComplexVec col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + idx];
    normalize_phase(col);
    d.vectors.push_back(std::move(col));
  }
  return d;
}

EigenDecomposition eig_oracle(std::size_t n, std::span<const Complex> dense) {
  if (dense.size() != n * n) throw std::invalid_argument("eig_oracle: size mismatch");
  double scale = 0.0;
  for (const Complex& z : dense) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (std::abs(dense[i * n + j] - std::conj(dense[j * n + i])) > 1e-12 * std::max(scale, 1.0)) {
        throw std::invalid_argument("eig_oracle: input is not Hermitian");
      }
    }
  }
  return eig_oracle(HermitianMatrix::from_dense(n, dense));
}

HermitianMatrix reconstruct(const EigenDecomposition& d) {
  const std::size_t n = d.vectors.empty() ? 0 : d.vectors.front().size();
  HermitianMatrix out = HermitianMatrix::zero(n);
  for (std::size_t i = 0; i < d.values.size(); ++i) out.add_outer(d.vectors[i], d.values[i]);
  return out;
}

}  // namespace mcast
