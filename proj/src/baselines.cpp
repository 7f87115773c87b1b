#include "mcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mcast/eigen.hpp"
#include "mcast/objectives.hpp"
#include "mcast/projections.hpp"

namespace mcast {

UnfoldedSchedule reference_schedule(std::size_t depth) {
  if (depth < 1) throw std::invalid_argument("reference_schedule: depth must be >= 1");
  UnfoldedSchedule s;
  s.lambda.assign(depth, 1.9);
  s.beta.resize(depth);
  for (std::size_t t = 1; t <= depth; ++t) {
    s.beta[t - 1] = std::sqrt(0.9 * std::exp(-static_cast<double>(t) / 500.0));
  }
  return s;
}

HermitianMatrix project_psd(const HermitianMatrix& x) {
  const EigenDecomposition d = eig_oracle(x);
  HermitianMatrix out = HermitianMatrix::zero(x.dim());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.values[i] > 0.0) out.add_outer(d.vectors[i], d.values[i]);
  }
  return out;
}

ComplexVec rand_a(const HermitianMatrix& x, const ChannelSet& channels, std::size_t n_samples,
                  std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("rand_a: need at least one sample");
  if (x.dim() != channels.n_antennas()) throw std::invalid_argument("rand_a: dimension mismatch");
  if (x.is_zero()) throw std::invalid_argument("rand_a: zero matrix");
  const EigenDecomposition d = eig_oracle(x);
  const double floor = -1e-8 * std::max(1.0, d.values.front());
  // Eigenvalues at rounding level would enter through their square root and
  // tilt every candidate by ~1e-8; they are treated as exact zeros.
  const double negligible = 1e-12 * d.values.front();
  std::vector<double> root(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.values[i] < floor) throw std::invalid_argument("rand_a: matrix is not positive semidefinite");
    root[i] = d.values[i] > negligible ? std::sqrt(d.values[i]) : 0.0;
  }
  if (root.front() == 0.0) throw std::invalid_argument("rand_a: zero matrix");

  const std::size_t n = x.dim();
  std::mt19937_64 engine(derive_seed(seed, StreamDomain::kRandomization, 0));
  ComplexVec best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_samples; ++s) {
    const ComplexVec e = sample_unit_sphere(n, engine);
    ComplexVec w(n);
    for (std::size_t i = 0; i < root.size(); ++i) {
      const Complex c = root[i] * e[i];
      for (std::size_t k = 0; k < n; ++k) w[k] += c * d.vectors[i][k];
    }
    if (w.is_zero()) continue;
    const double score = min_snr(w, channels);
    if (score > best_score) {
      best_score = score;
      best = std::move(w);
    }
  }
  if (best.empty()) throw std::invalid_argument("rand_a: every candidate vanished");
  return best;
}

PowerTrial power_feasibility_trial(const ChannelSet& channels, double power, int iter_cap) {
  const FeasibilitySpec spec = make_spec(channels, power);
  PowerTrial trial{false, 0, HermitianMatrix::zero(channels.n_antennas())};
  for (int it = 1; it <= iter_cap; ++it) {
    pocs_sweep_inplace(trial.x, spec, kSdpRelaxation);
    trial.x = project_psd(trial.x);
    trial.iterations = it;
    if (feasibility_loss(trial.x, spec) == 0.0) {
      trial.feasible = true;
      break;
    }
  }
  return trial;
}

SdpBoundEstimate sdp_bound_estimate(const ChannelSet& channels, double tol, int iter_cap) {
  if (!(tol > 0.0)) throw std::invalid_argument("sdp_bound_estimate: tol must be positive");
  if (iter_cap < 1) throw std::invalid_argument("sdp_bound_estimate: iter_cap must be >= 1");
  const SystemConfig& cfg = channels.config();

  double min_gain = std::numeric_limits<double>::infinity();
  for (const ComplexVec& h : channels.channels()) min_gain = std::min(min_gain, h.squared_norm());
  double hi = 2.0 * static_cast<double>(cfg.n_antennas) * cfg.snr_target / min_gain;

  SdpBoundEstimate est;
  est.iter_cap = iter_cap;
  PowerTrial upper = power_feasibility_trial(channels, hi, iter_cap);
  ++est.trials;
  for (int doubling = 0; !upper.feasible; ++doubling) {
    if (doubling == 30) throw std::runtime_error("sdp_bound_estimate: no feasible power bracket");
    hi *= 2.0;
    upper = power_feasibility_trial(channels, hi, iter_cap);
    ++est.trials;
  }

  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    PowerTrial trial = power_feasibility_trial(channels, mid, iter_cap);
    ++est.trials;
    if (trial.feasible) {
      hi = mid;
      upper = std::move(trial);
    } else {
      lo = mid;
    }
  }

  est.x = std::move(upper.x);
  est.power = hi;
  est.tol = hi - lo;
  double worst = std::numeric_limits<double>::infinity();
  for (const ComplexVec& h : channels.channels()) worst = std::min(worst, est.x.quadratic_form(h));
  est.bound = worst / (est.x.trace() * cfg.noise_std * cfg.noise_std);
  return est;
}

}  // namespace mcast
