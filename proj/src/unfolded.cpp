#include "mcast/unfolded.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcast/objectives.hpp"

namespace mcast {

void UnfoldedSchedule::validate() const {
  if (lambda.empty()) throw std::invalid_argument("UnfoldedSchedule: depth must be >= 1");
  if (lambda.size() != beta.size()) {
    throw std::invalid_argument("UnfoldedSchedule: lambda and beta lengths differ");
  }
  for (std::size_t t = 0; t < lambda.size(); ++t) {
    if (!std::isfinite(lambda[t]) || !std::isfinite(beta[t])) {
      throw std::invalid_argument("UnfoldedSchedule: non-finite parameter at t=" + std::to_string(t + 1));
    }
  }
}

UnfoldedSchedule UnfoldedSchedule::constant(std::size_t depth, double lambda, double beta) {
  return UnfoldedSchedule{std::vector<double>(depth, lambda), std::vector<double>(depth, beta)};
}

UnfoldedSchedule UnfoldedSchedule::prefix(std::size_t d) const {
  if (d > depth()) throw std::invalid_argument("UnfoldedSchedule::prefix: beyond depth");
  return UnfoldedSchedule{{lambda.begin(), lambda.begin() + static_cast<std::ptrdiff_t>(d)},
                          {beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d)}};
}

void pocs_sweep_inplace(HermitianMatrix& x, const FeasibilitySpec& spec, double lambda) {
  for (const QoSHalfSpace& c : spec.qos) relaxed_project_qos(x, c, lambda);
  if (spec.power) relaxed_project_power(x, *spec.power, lambda);
}

HermitianMatrix pocs_sweep(const HermitianMatrix& x, const FeasibilitySpec& spec, double lambda) {
  HermitianMatrix out = x;
  pocs_sweep_inplace(out, spec, lambda);
  return out;
}

PocsResult run_pocs(const HermitianMatrix& x0, const FeasibilitySpec& spec,
                    std::span<const double> lambdas, const PocsOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("run_pocs: need at least one iteration");
  PocsResult result{x0, {}, std::nullopt};
  result.trace.records.reserve(lambdas.size());
  EigenPair pair;
  for (std::size_t t = 0; t < lambdas.size(); ++t) {
    pocs_sweep_inplace(result.x, spec, lambdas[t]);
    IterateRecord rec;
    rec.iteration = static_cast<int>(t + 1);
    rec.feasibility_loss = feasibility_loss(result.x, spec);
    rec.min_snr = std::numeric_limits<double>::quiet_NaN();
    if (options.track_snr != nullptr) {
      pair = power_method(result.x, kPowerMethodIters, kPowerMethodEps, pair.vector.entries());
      rec.min_snr = min_snr(pair.vector, *options.track_snr);
    }
    rec.min_snr_db = to_db(rec.min_snr);
    result.trace.records.push_back(rec);
    if (options.keep_snapshots) result.trace.snapshots.push_back(result.x);
    if (rec.feasibility_loss == 0.0 && !result.feasible_at) {
      result.feasible_at = rec.iteration;
      if (options.stop_on_feasible) break;
    }
  }
  return result;
}

BpState bp_initial_state(const HermitianMatrix& x0, const PocsBpOptions& options) {
  return BpState{x0, power_method(x0, options.power_iters, options.power_eps)};
}

void bp_step(BpState& state, const FeasibilitySpec& qos_spec, double lambda, double beta,
             const PocsBpOptions& options) {
  const double b2 = beta * beta;
  const EigenPair& p = state.pair;
  switch (options.mode) {
    case PerturbationMode::kResidual:
      // X - b2 (X - l u u^H) = (1 - b2) X + b2 l u u^H
      state.x.scale(1.0 - b2);
      state.x.add_outer(p.vector, b2 * p.value);
      break;
    case PerturbationMode::kDominantComponent:
      state.x.add_outer(p.vector, -b2 * p.value);
      break;
  }
  for (const QoSHalfSpace& c : qos_spec.qos) relaxed_project_qos(state.x, c, lambda);
  state.pair = power_method(state.x, options.power_iters, options.power_eps, p.vector.entries());
}

PocsBpResult run_pocs_bp(const HermitianMatrix& x0, const ChannelSet& channels,
                         const UnfoldedSchedule& schedule, const PocsBpOptions& options) {
  schedule.validate();
  if (x0.dim() != channels.n_antennas()) throw std::invalid_argument("run_pocs_bp: dimension mismatch");
  const FeasibilitySpec qos = make_spec(channels);
  BpState state = bp_initial_state(x0, options);
  IterateTrace trace;
  trace.records.reserve(schedule.depth());
  for (std::size_t t = 0; t < schedule.depth(); ++t) {
    bp_step(state, qos, schedule.lambda[t], schedule.beta[t], options);
    IterateRecord rec;
    rec.iteration = static_cast<int>(t + 1);
    rec.feasibility_loss = feasibility_loss(state.x, qos);
    rec.min_snr = min_snr(state.pair.vector, channels);
    rec.min_snr_db = to_db(rec.min_snr);
    trace.records.push_back(rec);
    if (options.keep_snapshots) trace.snapshots.push_back(state.x);
  }
  return PocsBpResult{std::move(state.pair.vector), std::move(state.x), std::move(trace)};
}

PocsBpResult run_pocs_bp(const ChannelSet& channels, const UnfoldedSchedule& schedule,
                         const PocsBpOptions& options) {
  return run_pocs_bp(HermitianMatrix::zero(channels.n_antennas()), channels, schedule, options);
}

ComplexVec extract_beamformer(const HermitianMatrix& x) {
  if (x.is_zero()) throw std::invalid_argument("extract_beamformer: zero matrix");
  return power_method(x).vector;
}

int iterations_to_convergence(std::span<const double> values_db, double tol_db) {
  if (values_db.empty()) return 0;
  const double last = values_db.back();
  std::size_t t = values_db.size();
  while (t > 0 && std::abs(values_db[t - 1] - last) <= tol_db) --t;
  return static_cast<int>(t + 1);
}

}  // namespace mcast
