#pragma once

// Complex vectors, Hermitian matrices on the real Hilbert space of N x N
// Hermitian matrices, and the multicast channel model.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace mcast {

using Complex = std::complex<double>;

class ComplexVec {
 public:
  ComplexVec() = default;
  explicit ComplexVec(std::size_t n) : data_(n) {}
  /// Throws std::invalid_argument on non-finite entries.
  explicit ComplexVec(std::vector<Complex> entries);
  ComplexVec(std::initializer_list<Complex> entries);

  static ComplexVec basis(std::size_t n, std::size_t i);

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Complex operator[](std::size_t i) const { return data_[i]; }
  Complex& operator[](std::size_t i) { return data_[i]; }

  std::span<const Complex> entries() const { return data_; }
  std::span<Complex> entries() { return data_; }

  double squared_norm() const;
  double norm() const;
  double max_abs() const;
  bool is_zero() const;

  ComplexVec scaled(Complex c) const;
  ComplexVec normalized() const;

  friend bool operator==(const ComplexVec&, const ComplexVec&) = default;

 private:
  std::vector<Complex> data_;
};

/// a^H b
Complex dot(const ComplexVec& a, const ComplexVec& b);

/// Element of the real Hilbert space of N x N complex Hermitian matrices.
///
/// Storage is a full row-major N x N array. Every mutation goes through an
/// operation that keeps X(i, j) == conj(X(j, i)) bit-for-bit: the upper
/// triangle is computed and the lower triangle mirrored from it.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  static HermitianMatrix zero(std::size_t n);
  static HermitianMatrix identity(std::size_t n);
  static HermitianMatrix diagonal(std::span<const double> d);
  static HermitianMatrix diagonal(std::initializer_list<double> d);
  /// Symmetrizes (A + A^H) / 2 from a row-major dense matrix. Throws on
  /// size mismatch or non-finite entries.
  static HermitianMatrix from_dense(std::size_t n, std::span<const Complex> a);

  std::size_t dim() const { return n_; }
  Complex operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const Complex> data() const { return a_; }

  double trace() const;
  bool is_zero() const;
  bool all_finite() const;

  /// A v
  ComplexVec apply(const ComplexVec& v) const;
  /// Re(h^H X h); equals <X, h h^H>.
  double quadratic_form(const ComplexVec& h) const;

  // In-place updates; real scalars keep the matrix Hermitian exactly.
  HermitianMatrix& scale(double c);
  HermitianMatrix& add_scaled(const HermitianMatrix& other, double c);
  HermitianMatrix& add_outer(const ComplexVec& u, double c);
  HermitianMatrix& add_identity(double c);

  HermitianMatrix& operator+=(const HermitianMatrix& o) { return add_scaled(o, 1.0); }
  HermitianMatrix& operator-=(const HermitianMatrix& o) { return add_scaled(o, -1.0); }

  friend bool operator==(const HermitianMatrix&, const HermitianMatrix&) = default;

 private:
  explicit HermitianMatrix(std::size_t n) : n_(n), a_(n * n) {}
  void set(std::size_t i, std::size_t j, Complex v);

  std::size_t n_ = 0;
  std::vector<Complex> a_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator*(double c, HermitianMatrix a);

/// <X, Y> = Re tr(X Y). Throws std::invalid_argument on dimension mismatch.
double inner(const HermitianMatrix& x, const HermitianMatrix& y);
/// sqrt(<X, X>)
double fro_norm(const HermitianMatrix& x);
/// h h^H. Throws std::invalid_argument for the zero vector.
HermitianMatrix outer(const ComplexVec& h);

struct SystemConfig {
  std::size_t n_antennas = 1;
  std::size_t n_users = 1;
  double noise_std = 1.0;
  double snr_target = 1.0;

  /// Throws std::invalid_argument when N < 1, K < 1, sigma <= 0 or gamma <= 0.
  void validate() const;
  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

class ChannelSet {
 public:
  /// Throws std::invalid_argument unless there are exactly K nonzero channels
  /// of length N.
  ChannelSet(SystemConfig config, std::vector<ComplexVec> channels);

  const SystemConfig& config() const { return config_; }
  const std::vector<ComplexVec>& channels() const { return channels_; }
  std::size_t n_antennas() const { return config_.n_antennas; }
  std::size_t n_users() const { return config_.n_users; }
  const ComplexVec& operator[](std::size_t k) const { return channels_[k]; }

  friend bool operator==(const ChannelSet&, const ChannelSet&) = default;

 private:
  SystemConfig config_;
  std::vector<ComplexVec> channels_;
};

// Random streams. Every random quantity in the library is drawn from a
// std::mt19937_64 seeded with a value derived through splitmix64, so a
// sample is reproducible from (base seed, domain, index) alone.
enum class StreamDomain : std::uint64_t {
  kTraining = 0x7472'6169'6e00'0001ULL,
  kEvaluation = 0x6576'616c'0000'0002ULL,
  kRandomization = 0x7261'6e64'0000'0003ULL,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, StreamDomain domain, std::uint64_t index);

/// K i.i.d. channels with i.i.d. CN(0, 1) entries; deterministic in seed.
ChannelSet sample_channels(const SystemConfig& config, std::uint64_t seed);

/// n i.i.d. CN(0, 1) entries.
ComplexVec sample_gaussian(std::size_t n, std::mt19937_64& engine);
/// Uniform on the complex unit sphere (CN(0, 1) draw, then normalized).
ComplexVec sample_unit_sphere(std::size_t n, std::mt19937_64& engine);

}  // namespace mcast
