#pragma once

// Metric projections onto the QoS and power half-spaces of the Hermitian
// matrix space, and the relaxed operator X + lambda (P(X) - X).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mcast/hermitian.hpp"

namespace mcast {

/// Relative slack in membership tests. An exact projection lands on the
/// boundary only up to rounding, so <X, Q> = gamma (1 - 1e-16) still counts
/// as satisfied.
inline constexpr double kFeasibilityTol = 1e-12;

/// C = {X : <X, Q> >= gamma}
class QoSHalfSpace {
 public:
  /// Throws std::invalid_argument if Q is zero or gamma is not positive.
  QoSHalfSpace(HermitianMatrix q, double gamma);
  static QoSHalfSpace for_channel(const ComplexVec& h, double gamma);

  const HermitianMatrix& q() const { return q_; }
  double gamma() const { return gamma_; }
  double q_squared_norm() const { return q_sq_norm_; }

  double value(const HermitianMatrix& x) const { return inner(x, q_); }
  bool contains(const HermitianMatrix& x) const { return gamma_ - value(x) <= kFeasibilityTol * gamma_; }

 private:
  HermitianMatrix q_;
  double gamma_;
  double q_sq_norm_;
};

/// B = {X : tr(X) <= P}
struct PowerHalfSpace {
  double power_bound;
  std::size_t dim;

  bool contains(const HermitianMatrix& x) const { return x.trace() - power_bound <= slack(); }
  double slack() const { return kFeasibilityTol * std::max(1.0, std::abs(power_bound)); }
};

struct FeasibilitySpec {
  std::vector<QoSHalfSpace> qos;
  std::optional<PowerHalfSpace> power;

  std::size_t dim() const { return qos.front().q().dim(); }
  bool contains(const HermitianMatrix& x) const;
};

/// One QoS half-space per user channel, all at the system SNR target, plus an
/// optional power half-space.
FeasibilitySpec make_spec(const ChannelSet& channels, std::optional<double> power_bound = {});

HermitianMatrix project_qos(const HermitianMatrix& x, const QoSHalfSpace& c);
HermitianMatrix project_power(const HermitianMatrix& x, const PowerHalfSpace& b);
/// X + lambda (PX - X)
HermitianMatrix relax(const HermitianMatrix& x, const HermitianMatrix& px, double lambda);

// In-place relaxed projections used by the iteration engines; equal to
// relax(x, project_*(x, c), lambda).
void relaxed_project_qos(HermitianMatrix& x, const QoSHalfSpace& c, double lambda);
void relaxed_project_power(HermitianMatrix& x, const PowerHalfSpace& b, double lambda);

}  // namespace mcast
