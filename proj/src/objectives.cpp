#include "mcast/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcast {

double feasibility_loss(const HermitianMatrix& x, const FeasibilitySpec& spec) {
  double loss = 0.0;
  for (const QoSHalfSpace& c : spec.qos) {
    if (!c.contains(x)) loss += c.gamma() - c.value(x);
  }
  if (spec.power && !spec.power->contains(x)) loss += x.trace() - spec.power->power_bound;
  return loss;
}

double softmin(std::span<const double> s, double beta) {
  if (s.empty()) throw std::invalid_argument("softmin: empty list");
  if (beta == 0.0) {
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum / static_cast<double>(s.size());
  }
  // Shift the exponent so the largest term is e^0.
  double shift = -beta * s[0];
  for (double v : s) shift = std::max(shift, -beta * v);
  double num = 0.0;
  double den = 0.0;
  for (double v : s) {
    const double e = std::exp(-beta * v - shift);
    num += v * e;
    den += e;
  }
  // The quotient is a convex combination; clamp away rounding outside it.
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return std::clamp(num / den, *lo, *hi);
}

std::vector<double> user_snrs(const ComplexVec& w, const ChannelSet& channels) {
  if (w.size() != channels.n_antennas()) throw std::invalid_argument("user_snrs: length mismatch");
  const double wn = w.squared_norm();
  if (!(wn > 0.0)) throw std::invalid_argument("user_snrs: zero beamformer");
  const double sigma = channels.config().noise_std;
  const double denom = sigma * sigma * wn;
  std::vector<double> out;
  out.reserve(channels.n_users());
  for (const ComplexVec& h : channels.channels()) out.push_back(std::norm(dot(w, h)) / denom);
  return out;
}

double min_snr(const ComplexVec& w, const ChannelSet& channels) {
  const std::vector<double> s = user_snrs(w, channels);
  return *std::min_element(s.begin(), s.end());
}

double mmf_loss(const ComplexVec& w, const ChannelSet& channels, SoftminWeight weight) {
  return -softmin(user_snrs(w, channels), weight.beta);
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace mcast
