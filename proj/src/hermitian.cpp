#include "mcast/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcast {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_same_dim(const HermitianMatrix& x, const HermitianMatrix& y, const char* what) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(x.dim()) + " vs " + std::to_string(y.dim()) + ")");
  }
}

}  // namespace

ComplexVec::ComplexVec(std::vector<Complex> entries) : data_(std::move(entries)) {
  if (!std::all_of(data_.begin(), data_.end(), finite)) {
    throw std::invalid_argument("ComplexVec: non-finite entry");
  }
}

ComplexVec::ComplexVec(std::initializer_list<Complex> entries)
    : ComplexVec(std::vector<Complex>(entries)) {}

ComplexVec ComplexVec::basis(std::size_t n, std::size_t i) {
  if (i >= n) throw std::invalid_argument("ComplexVec::basis: index out of range");
  ComplexVec e(n);
  e[i] = 1.0;
  return e;
}

double ComplexVec::squared_norm() const {
  double s = 0.0;
  for (const Complex& z : data_) s += std::norm(z);
  return s;
}

double ComplexVec::norm() const { return std::sqrt(squared_norm()); }

double ComplexVec::max_abs() const {
  double m = 0.0;
  for (const Complex& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexVec::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](Complex z) { return z == Complex{}; });
}

ComplexVec ComplexVec::scaled(Complex c) const {
  ComplexVec out(*this);
  for (Complex& z : out.data_) z *= c;
  return out;
}

ComplexVec ComplexVec::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::invalid_argument("ComplexVec::normalized: zero vector");
  return scaled(1.0 / n);
}

Complex dot(const ComplexVec& a, const ComplexVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

HermitianMatrix HermitianMatrix::zero(std::size_t n) { return HermitianMatrix(n); }

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
  HermitianMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1.0;
  return m;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
  HermitianMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) throw std::invalid_argument("HermitianMatrix: non-finite entry");
    m.a_[i * d.size() + i] = d[i];
  }
  return m;
}

HermitianMatrix HermitianMatrix::diagonal(std::initializer_list<double> d) {
  return diagonal(std::span<const double>(d.begin(), d.size()));
}

HermitianMatrix HermitianMatrix::from_dense(std::size_t n, std::span<const Complex> a) {
  if (a.size() != n * n) throw std::invalid_argument("HermitianMatrix::from_dense: size mismatch");
  if (!std::all_of(a.begin(), a.end(), finite)) {
    throw std::invalid_argument("HermitianMatrix::from_dense: non-finite entry");
  }
  HermitianMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.a_[i * n + i] = a[i * n + i].real();
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set(i, j, 0.5 * (a[i * n + j] + std::conj(a[j * n + i])));
    }
  }
  return m;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, Complex v) {
  a_[i * n_ + j] = v;
  a_[j * n_ + i] = std::conj(v);
}

double HermitianMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i].real();
  return t;
}

bool HermitianMatrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](Complex z) { return z == Complex{}; });
}

bool HermitianMatrix::all_finite() const { return std::all_of(a_.begin(), a_.end(), finite); }

ComplexVec HermitianMatrix::apply(const ComplexVec& v) const {
  if (v.size() != n_) throw std::invalid_argument("HermitianMatrix::apply: length mismatch");
  ComplexVec out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    Complex s{};
    const Complex* row = &a_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

double HermitianMatrix::quadratic_form(const ComplexVec& h) const {
  if (h.size() != n_) throw std::invalid_argument("quadratic_form: length mismatch");
  double diag = 0.0;
  Complex off{};
  for (std::size_t i = 0; i < n_; ++i) {
    diag += a_[i * n_ + i].real() * std::norm(h[i]);
    Complex row{};
    for (std::size_t j = i + 1; j < n_; ++j) row += a_[i * n_ + j] * h[j];
    off += std::conj(h[i]) * row;
  }
  return diag + 2.0 * off.real();
}

HermitianMatrix& HermitianMatrix::scale(double c) {
  for (Complex& z : a_) z *= c;
  return *this;
}

HermitianMatrix& HermitianMatrix::add_scaled(const HermitianMatrix& other, double c) {
  check_same_dim(*this, other, "add_scaled");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += c * other.a_[i];
  return *this;
}

HermitianMatrix& HermitianMatrix::add_outer(const ComplexVec& u, double c) {
  if (u.size() != n_) throw std::invalid_argument("add_outer: length mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    a_[i * n_ + i] += c * std::norm(u[i]);
    const Complex ci = c * u[i];
    for (std::size_t j = i + 1; j < n_; ++j) set(i, j, a_[i * n_ + j] + ci * std::conj(u[j]));
  }
  return *this;
}

HermitianMatrix& HermitianMatrix::add_identity(double c) {
  for (std::size_t i = 0; i < n_; ++i) a_[i * n_ + i] += c;
  return *this;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator*(double c, HermitianMatrix a) { return a.scale(c); }

double inner(const HermitianMatrix& x, const HermitianMatrix& y) {
  check_same_dim(x, y, "inner");
  const std::size_t n = x.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s += (x(i, j) * y(j, i)).real();
  }
  return s;
}

double fro_norm(const HermitianMatrix& x) { return std::sqrt(std::max(0.0, inner(x, x))); }

HermitianMatrix outer(const ComplexVec& h) {
  if (h.empty() || h.is_zero()) throw std::invalid_argument("outer: zero vector");
  HermitianMatrix q = HermitianMatrix::zero(h.size());
  q.add_outer(h, 1.0);
  return q;
}

void SystemConfig::validate() const {
  if (n_antennas < 1) throw std::invalid_argument("SystemConfig: n_antennas must be >= 1");
  if (n_users < 1) throw std::invalid_argument("SystemConfig: n_users must be >= 1");
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("SystemConfig: noise_std must be positive");
  }
  if (!(snr_target > 0.0) || !std::isfinite(snr_target)) {
    throw std::invalid_argument("SystemConfig: snr_target must be positive");
  }
}

ChannelSet::ChannelSet(SystemConfig config, std::vector<ComplexVec> channels)
    : config_(config), channels_(std::move(channels)) {
  config_.validate();
  if (channels_.size() != config_.n_users) {
    throw std::invalid_argument("ChannelSet: expected " + std::to_string(config_.n_users) +
                                " channels, got " + std::to_string(channels_.size()));
  }
  for (const ComplexVec& h : channels_) {
    if (h.size() != config_.n_antennas) throw std::invalid_argument("ChannelSet: channel length != N");
    if (h.is_zero()) throw std::invalid_argument("ChannelSet: zero channel");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, StreamDomain domain, std::uint64_t index) {
  return splitmix64(splitmix64(base ^ static_cast<std::uint64_t>(domain)) + index);
}

ComplexVec sample_gaussian(std::size_t n, std::mt19937_64& engine) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<Complex> v(n);
  for (Complex& z : v) {
    const double re = gauss(engine);
    const double im = gauss(engine);
    z = {re, im};
  }
  return ComplexVec(std::move(v));
}

ComplexVec sample_unit_sphere(std::size_t n, std::mt19937_64& engine) {
  for (;;) {
    ComplexVec v = sample_gaussian(n, engine);
    if (!v.is_zero()) return v.normalized();
  }
}

ChannelSet sample_channels(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 engine(seed);
  std::vector<ComplexVec> channels;
  channels.reserve(config.n_users);
  while (channels.size() < config.n_users) {
    ComplexVec h = sample_gaussian(config.n_antennas, engine);
    if (!h.is_zero()) channels.push_back(std::move(h));
  }
  return ChannelSet(config, std::move(channels));
}

}  // namespace mcast
