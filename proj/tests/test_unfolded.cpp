#include <doctest.h>

#include <cmath>
#include <random>

#include "mcast/baselines.hpp"
#include "mcast/objectives.hpp"
#include "mcast/unfolded.hpp"
#include "support.hpp"

using namespace mcast;
using doctest::Approx;

TEST_CASE("schedule helpers") {
  const UnfoldedSchedule s = UnfoldedSchedule::constant(4, 1.5, 0.2);
  CHECK(s.depth() == 4);
  CHECK(s.prefix(2) == UnfoldedSchedule::constant(2, 1.5, 0.2));
  CHECK_THROWS_AS(s.prefix(5), std::invalid_argument);
  CHECK_THROWS_AS(UnfoldedSchedule{}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((UnfoldedSchedule{{1.0, 1.0}, {0.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((UnfoldedSchedule{{1.0}, {NAN}}.validate()), std::invalid_argument);
}

TEST_CASE("POCS leaves feasible points unchanged for any relaxation") {
  const ChannelSet ch(SystemConfig{2, 2, 1.0, 1.0}, {ComplexVec::basis(2, 0), ComplexVec::basis(2, 1)});
  const FeasibilitySpec spec = make_spec(ch, 3.0);
  const HermitianMatrix x = HermitianMatrix::diagonal({1.2, 1.5});
  for (double lambda : {0.0, 0.5, 1.0, 1.9}) CHECK(pocs_sweep(x, spec, lambda) == x);
}

TEST_CASE("POCS with zero relaxation is the identity") {
  std::mt19937_64 rng(1);
  const ChannelSet ch = sample_channels(SystemConfig{3, 4, 1.0, 1.0}, 2);
  const HermitianMatrix x = test::random_hermitian(3, rng);
  CHECK(pocs_sweep(x, make_spec(ch, 1.0), 0.0) == x);
}

TEST_CASE("single-user POCS reaches feasibility in one sweep") {
  const ChannelSet ch = sample_channels(SystemConfig{4, 1, 1.0, 1.0}, 77);
  const FeasibilitySpec spec = make_spec(ch);
  const std::vector<double> lambdas(5, 1.0);
  const PocsResult r = run_pocs(HermitianMatrix::zero(4), spec, lambdas, {.stop_on_feasible = true});
  REQUIRE(r.feasible_at.has_value());
  CHECK(*r.feasible_at == 1);
  CHECK(r.trace.records.size() == 1);
  CHECK(r.x == project_qos(HermitianMatrix::zero(4), spec.qos[0]));
}

TEST_CASE("POCS trace records loss per iteration and optional SNR") {
  const ChannelSet ch = sample_channels(SystemConfig{5, 15, 1.0, 1.0}, 3);
  const FeasibilitySpec spec = make_spec(ch, 0.5);
  const std::vector<double> lambdas(10, 1.9);
  const PocsResult plain = run_pocs(HermitianMatrix::zero(5), spec, lambdas, {.keep_snapshots = true});
  REQUIRE(plain.trace.records.size() == 10);
  REQUIRE(plain.trace.snapshots.size() == 10);
  for (std::size_t t = 0; t < 10; ++t) {
    CHECK(plain.trace.records[t].iteration == static_cast<int>(t + 1));
    CHECK(plain.trace.records[t].feasibility_loss == feasibility_loss(plain.trace.snapshots[t], spec));
    CHECK(std::isnan(plain.trace.records[t].min_snr));
  }
  const PocsResult tracked = run_pocs(HermitianMatrix::zero(5), spec, lambdas, {.track_snr = &ch});
  CHECK(tracked.x == plain.x);
  for (const IterateRecord& rec : tracked.trace.records) CHECK(std::isfinite(rec.min_snr_db));
}

TEST_CASE("bounded perturbation with beta = 0 is plain QoS POCS") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ChannelSet ch = sample_channels(SystemConfig{6, 9, 1.0, 1.0}, seed);
    const UnfoldedSchedule s = UnfoldedSchedule::constant(25, 1.3 + 0.05 * static_cast<double>(seed), 0.0);
    const PocsBpResult bp = run_pocs_bp(ch, s);
    const PocsResult pocs = run_pocs(HermitianMatrix::zero(6), make_spec(ch), s.lambda);
    CHECK(test::max_abs_diff(bp.x, pocs.x) <= 1e-12);
  }
}

TEST_CASE("first bounded-perturbation step from zero is one relaxed QoS sweep") {
  const ChannelSet ch = sample_channels(SystemConfig{4, 6, 1.0, 1.0}, 8);
  const UnfoldedSchedule s{{1.7}, {0.8}};
  const PocsBpResult r = run_pocs_bp(ch, s, {.keep_snapshots = true});
  CHECK(r.trace.snapshots.front() == pocs_sweep(HermitianMatrix::zero(4), make_spec(ch), 1.7));
}

TEST_CASE("perturbation of a rank-one iterate is a no-op") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexVec u = test::random_vec(5, rng);
    const HermitianMatrix x = 3.0 * outer(u);
    BpState state = bp_initial_state(x);
    const FeasibilitySpec none{};  // no QoS sets: only the perturbation runs
    bp_step(state, none, 1.0, 0.7 + 0.01 * rep);
    CHECK(test::max_abs_diff(state.x, x) < 1e-10);
  }
}

TEST_CASE("perturbation shrinks every component except the dominant one") {
  std::mt19937_64 rng(13);
  std::vector<ComplexVec> u;
  const HermitianMatrix x = test::with_spectrum({4.0, 2.0, 1.0, -0.5}, rng, &u);
  BpState state = bp_initial_state(x, {.power_iters = 2000, .power_eps = 1e-14});
  bp_step(state, FeasibilitySpec{}, 1.0, std::sqrt(0.5), {.power_iters = 2000, .power_eps = 1e-14});
  const EigenDecomposition d = eig_oracle(state.x);
  CHECK(d.values[0] == Approx(4.0).epsilon(1e-9));
  CHECK(d.values[1] == Approx(1.0).epsilon(1e-9));
  CHECK(d.values[2] == Approx(0.5).epsilon(1e-9));
  CHECK(d.values[3] == Approx(-0.25).epsilon(1e-9));
  CHECK(std::abs(dot(d.vectors[0], u[0])) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dominant-component mode subtracts the leading term") {
  const HermitianMatrix x = HermitianMatrix::diagonal({3.0, 1.0});
  BpState state = bp_initial_state(x);
  const PocsBpOptions opts{.mode = PerturbationMode::kDominantComponent};
  bp_step(state, FeasibilitySpec{}, 1.0, std::sqrt(0.5), opts);
  CHECK(test::max_abs_diff(state.x, HermitianMatrix::diagonal({1.5, 1.0})) < 1e-8);
}

TEST_CASE("bounded perturbation is invariant to the eigenvector phase") {
  std::mt19937_64 rng(21);
  const ChannelSet ch = sample_channels(SystemConfig{4, 6, 1.0, 1.0}, 4);
  const FeasibilitySpec spec = make_spec(ch);
  const HermitianMatrix x = test::random_psd(4, 3, rng);
  BpState a = bp_initial_state(x);
  BpState b = a;
  b.pair.vector = b.pair.vector.scaled(std::polar(1.0, 2.1));
  bp_step(a, spec, 1.5, 0.9);
  bp_step(b, spec, 1.5, 0.9);
  CHECK(test::max_abs_diff(a.x, b.x) < 1e-12);
  CHECK(min_snr(a.pair.vector, ch) == Approx(min_snr(b.pair.vector, ch)).epsilon(1e-10));
}

TEST_CASE("bounded perturbation drives iterates toward rank one") {
  const ChannelSet ch = sample_channels(SystemConfig{6, 8, 1.0, 1.0}, 99);
  const PocsBpResult r = run_pocs_bp(ch, reference_schedule(200));
  const EigenDecomposition d = eig_oracle(r.x);
  CHECK(d.values[1] / d.values[0] < 0.05);
  const PocsBpResult plain = run_pocs_bp(ch, UnfoldedSchedule::constant(200, 1.9, 0.0));
  const EigenDecomposition dp = eig_oracle(plain.x);
  CHECK(dp.values[1] / dp.values[0] > d.values[1] / d.values[0]);
}

TEST_CASE("returned beamformer and trace are consistent") {
  const ChannelSet ch = sample_channels(SystemConfig{5, 7, 1.0, 1.0}, 5);
  const PocsBpResult r = run_pocs_bp(ch, reference_schedule(30));
  REQUIRE(r.trace.records.size() == 30);
  CHECK(r.w.norm() == Approx(1.0).epsilon(1e-9));
  CHECK(r.trace.records.back().min_snr == min_snr(r.w, ch));
  CHECK(r.trace.records.back().min_snr_db == Approx(10.0 * std::log10(min_snr(r.w, ch))));
  CHECK_THROWS_AS(run_pocs_bp(HermitianMatrix::zero(3), ch, reference_schedule(2)), std::invalid_argument);
}

TEST_CASE("beamformer extraction examples") {
  const ComplexVec u = ComplexVec{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  const ComplexVec w = extract_beamformer(4.0 * outer(u));
  CHECK(std::abs(dot(w, u)) == Approx(1.0).epsilon(1e-12));
  CHECK(w[1].real() == Approx(0.8).epsilon(1e-12));
  CHECK(w[1].imag() == 0.0);
  CHECK(w[0].imag() == Approx(-0.6).epsilon(1e-12));

  const ComplexVec e = extract_beamformer(HermitianMatrix::diagonal({2.0, 1.0}));
  CHECK(std::abs(e[0]) == Approx(1.0).epsilon(1e-6));

  const ComplexVec h{Complex(1.0, -1.0), 2.0, Complex(0.0, 0.5)};
  CHECK(std::abs(dot(extract_beamformer(outer(h)), h.normalized())) == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(extract_beamformer(HermitianMatrix::zero(2)), std::invalid_argument);
}

TEST_CASE("iterations to convergence") {
  CHECK(iterations_to_convergence(std::vector<double>{}) == 0);
  CHECK(iterations_to_convergence(std::vector<double>{3.0}) == 1);
  CHECK(iterations_to_convergence(std::vector<double>{1.0, 2.0, 2.995, 3.0}) == 3);
  CHECK(iterations_to_convergence(std::vector<double>{3.0, 1.0, 3.0, 3.0}) == 3);
  CHECK(iterations_to_convergence(std::vector<double>{0.0, 0.5, 0.9}, 1.0) == 1);
}
