#include "mcast/projections.hpp"

#include <cmath>
#include <stdexcept>

namespace mcast {

QoSHalfSpace::QoSHalfSpace(HermitianMatrix q, double gamma)
    : q_(std::move(q)), gamma_(gamma), q_sq_norm_(inner(q_, q_)) {
  if (!(q_sq_norm_ > 0.0)) throw std::invalid_argument("QoSHalfSpace: zero Q");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw std::invalid_argument("QoSHalfSpace: gamma must be positive");
  }
}

QoSHalfSpace QoSHalfSpace::for_channel(const ComplexVec& h, double gamma) {
  return QoSHalfSpace(outer(h), gamma);
}

bool FeasibilitySpec::contains(const HermitianMatrix& x) const {
  for (const QoSHalfSpace& c : qos) {
    if (!c.contains(x)) return false;
  }
  return !power || power->contains(x);
}

FeasibilitySpec make_spec(const ChannelSet& channels, std::optional<double> power_bound) {
  FeasibilitySpec spec;
  spec.qos.reserve(channels.n_users());
  for (const ComplexVec& h : channels.channels()) {
    spec.qos.push_back(QoSHalfSpace::for_channel(h, channels.config().snr_target));
  }
  if (power_bound) {
    if (!(*power_bound > 0.0)) throw std::invalid_argument("make_spec: power bound must be positive");
    spec.power = PowerHalfSpace{*power_bound, channels.n_antennas()};
  }
  return spec;
}

void relaxed_project_qos(HermitianMatrix& x, const QoSHalfSpace& c, double lambda) {
  const double gap = c.gamma() - c.value(x);
  if (gap <= 0.0) return;
  x.add_scaled(c.q(), lambda * gap / c.q_squared_norm());
}

void relaxed_project_power(HermitianMatrix& x, const PowerHalfSpace& b, double lambda) {
  const double excess = x.trace() - b.power_bound;
  if (excess <= 0.0) return;
  x.add_identity(-lambda * excess / static_cast<double>(b.dim));
}

HermitianMatrix project_qos(const HermitianMatrix& x, const QoSHalfSpace& c) {
  HermitianMatrix out = x;
  relaxed_project_qos(out, c, 1.0);
  return out;
}

HermitianMatrix project_power(const HermitianMatrix& x, const PowerHalfSpace& b) {
  if (x.dim() != b.dim) throw std::invalid_argument("project_power: dimension mismatch");
  HermitianMatrix out = x;
  relaxed_project_power(out, b, 1.0);
  return out;
}

HermitianMatrix relax(const HermitianMatrix& x, const HermitianMatrix& px, double lambda) {
  HermitianMatrix out = px;
  out.scale(lambda);
  out.add_scaled(x, 1.0 - lambda);
  return out;
}

}  // namespace mcast
