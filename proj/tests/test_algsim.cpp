#include <doctest.h>

#include "openslt/algsim.hpp"
#include "testutil.hpp"

using namespace openslt;
using namespace openslt::testutil;

namespace {

Mat ground_state(int dim) {
  Mat rho = Mat::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return rho;
}

}  // namespace

TEST_CASE("circuit enumeration") {
  // Divisible model: a single circuit with parity 0 and no instrument slots.
  const KLocalLiouvillian damp = damping_model(1.0);
  const SliceGrid grid = slice_grid(damp, 1.0, 3);
  const DivisibilityProfile prof = divisibility_profile(grid);
  const CircuitEnsemble ens = enumerate_circuits(prof, grid);
  REQUIRE(ens.circuits.size() == 1);
  CHECK(ens.circuits[0].parity == 0);
  CHECK(ens.slots.n_tot == 0);

  // Three-slot scenario with pattern (non-channel, channel, non-channel):
  // four circuits with signs (+, -, -, +).
  const KLocalLiouvillian scenario = three_slot_scenario();
  const SliceGrid sgrid = slice_grid(scenario, 0.5, 1);
  const DivisibilityProfile sprof = divisibility_profile(sgrid);
  REQUIRE(sprof.n_tot == 2);
  CHECK(sprof.mask[0][0]);
  CHECK_FALSE(sprof.mask[1][0]);
  CHECK(sprof.mask[2][0]);
  const CircuitEnsemble sens = enumerate_circuits(sprof, sgrid);
  REQUIRE(sens.circuits.size() == 4);
  CHECK(sens.circuits[0].parity == 0);
  CHECK(sens.circuits[1].parity == 1);
  CHECK(sens.circuits[2].parity == 1);
  CHECK(sens.circuits[3].parity == 0);
  // Slot ordinals follow execution order; bit n of r picks the part.
  CHECK(sens.circuits[2].part(0) == 0);
  CHECK(sens.circuits[2].part(1) == 1);

  // Cap enforcement names the count.
  Caps tight;
  tight.max_nontrivial = 1;
  CHECK_THROWS_AS(enumerate_circuits(sprof, sgrid, tight), CapExceeded);
}

TEST_CASE("exact circuit runs") {
  Rng rng(101);

  // All-channel circuit: plain channel composition with unit ledger.
  const KLocalLiouvillian model = two_qubit_divisible();
  const SliceGrid grid = slice_grid(model, 1.0, 2);
  const CircuitEnsemble ens = enumerate_circuits(divisibility_profile(grid), grid);
  const Mat rho0 = random_density(4, rng);
  const CircuitResult res = run_circuit_exact(ens, 0, rho0);
  CHECK(res.weight == 1.0);
  CHECK(res.p_circuit == 1.0);
  CHECK(res.ledger.empty());
  CHECK(max_abs(res.terminal_state - slt_product(grid).apply(rho0)) < 1e-10);

  // Reconstructed contribution equals the signed part-map composition.
  const KLocalLiouvillian scenario = three_slot_scenario();
  const SliceGrid sgrid = slice_grid(scenario, 0.5, 1);
  const DivisibilityProfile sprof = divisibility_profile(sgrid);
  const CircuitEnsemble sens = enumerate_circuits(sprof, sgrid);
  const Mat rho = random_density(8, rng);
  for (std::size_t idx = 0; idx < sens.circuits.size(); ++idx) {
    const CircuitResult r = run_circuit_exact(sens, idx, rho);
    // Oracle: compose the embedded part transfer matrices directly.
    SuperOperator oracle = SuperOperator::identity_map(8);
    for (std::size_t pos = 0; pos < sens.slots.order.size(); ++pos) {
      const Slot& slot = sens.slots.order[pos];
      if (slot.is_channel) {
        oracle = compose(sens.slots.channel_full[pos], oracle);
      } else {
        const auto& part = sens.slots.parts[slot.ordinal];
        const int b = sens.circuits[idx].part(slot.ordinal);
        const CpntpMap emb = (b == 0 ? part.split.positive_part : part.split.negative_part)
                                 .embedded(sgrid.supports[slot.term], sgrid.lattice);
        oracle = compose(emb.to_superop(), oracle);
      }
    }
    CHECK(max_abs(r.signed_state - oracle.apply(rho)) < 1e-10);
  }
}

TEST_CASE("signed reconstruction recovers the decomposition product") {
  Rng rng(103);
  for (const NamedModel& entry : corpus()) {
    CAPTURE(entry.name);
    const double t = entry.horizon;
    const SliceGrid grid = slice_grid(entry.model, t, 2, false, 1e-9);
    const DivisibilityProfile prof = divisibility_profile(grid);
    if (prof.n_tot > 6) continue;  // keep the runtime sane
    const CircuitEnsemble ens = enumerate_circuits(prof, grid);
    const long d = entry.model.lattice.dim();
    const Mat rho0 = random_density(static_cast<int>(d), rng);
    std::vector<CircuitResult> results;
    for (std::size_t idx = 0; idx < ens.circuits.size(); ++idx)
      results.push_back(run_circuit_exact(ens, idx, rho0));
    const Reconstruction rec = reconstruct(results, Mat(identity(static_cast<int>(d))));
    CHECK(max_abs(rec.state - slt_product(grid).apply(rho0)) < 1e-9);

    // Success probabilities sit inside the min/max bracket.
    for (const CircuitResult& res : results) {
      if (res.ledger.empty() || res.unreachable) continue;
      double lo = 1.0, hi = 0.0;
      for (const LedgerEntry& e : res.ledger) {
        lo = std::min(lo, e.n_exact);
        hi = std::max(hi, e.n_exact);
      }
      const double n_tot = static_cast<double>(res.ledger.size());
      CHECK(res.p_circuit <= std::pow(hi, n_tot) * (1 + 1e-12) + 1e-15);
      CHECK(res.p_circuit >= std::pow(lo, n_tot) * (1 - 1e-12) - 1e-15);
    }
  }
}

TEST_CASE("three-slot reconstruction matches the product map") {
  Rng rng(107);
  const KLocalLiouvillian scenario = three_slot_scenario();
  const SliceGrid grid = slice_grid(scenario, 0.5, 1);
  const CircuitEnsemble ens = enumerate_circuits(divisibility_profile(grid), grid);
  const Mat rho0 = random_density(8, rng);
  std::vector<CircuitResult> results;
  for (std::size_t idx = 0; idx < ens.circuits.size(); ++idx)
    results.push_back(run_circuit_exact(ens, idx, rho0));
  Mat obs = kron(pauli_z(), kron(identity(2), identity(2)));
  const Reconstruction rec = reconstruct(results, obs);
  const Mat expected = slt_product(grid).apply(rho0);
  CHECK(max_abs(rec.state - expected) < 1e-10);
  CHECK(rec.expectation == doctest::Approx((obs * expected).trace().real()).epsilon(1e-9));
}

TEST_CASE("plans") {
  NormEffort light;
  light.restarts = 8;

  // Divisible model: one circuit, no trials, feasible.
  const SimulationPlan plan = make_plan(two_qubit_divisible(), 1.0, 0.2, 4.42, {}, 0, 0.5, light);
  CHECK(plan.feasible);
  CHECK(plan.n_tot == 0);
  CHECK(plan.circuit_count == 1);
  CHECK(plan.trials_per_estimator == 0);
  CHECK(plan.trotter_certified);
  CHECK(plan.m == plan.m_required);

  // Halving eps doubles the required m (divisible: the growth factor is 1).
  const SimulationPlan tighter =
      make_plan(two_qubit_divisible(), 1.0, 0.1, 4.42, {}, 0, 0.5, light);
  CHECK(tighter.m_required == doctest::Approx(2.0 * plan.m_required).epsilon(0.01));

  // Indivisible model at horizon pi: the required m carries the
  // e^{(K + K^2) t_id beta} growth factor.
  const double pi = 3.14159265358979324;
  const KLocalLiouvillian cosine = dephasing_model(TimeFunction::sinusoid(1.0, 1.0, pi / 2));
  const SimulationPlan iplan = make_plan(cosine, pi, 0.1, 4.42, {}, 4, 0.5, light);
  const double expected_m =
      2.0 * iplan.beta_value * iplan.beta_value * pi * pi *
      std::exp(2.0 * iplan.t_id * iplan.beta_value) / 0.05;
  CHECK(static_cast<double>(iplan.m_required) == doctest::Approx(expected_m).epsilon(0.01));
  // Forced to m = 4 the algorithmic side stays feasible.
  CHECK(iplan.m == 4);
  CHECK(iplan.m_overridden);
  CHECK(iplan.feasible);
  CHECK(iplan.n_tot == 2);
  CHECK(iplan.per_estimator_tol ==
        doctest::Approx(0.05 / (iplan.g_max * 2.0 * 2.0)).epsilon(1e-12));

  // Automatic planning on the same model reports exponential infeasibility.
  Caps caps;
  const SimulationPlan auto_plan = make_plan(cosine, pi, 0.1, 4.42, caps, 0, 0.5, light);
  CHECK_FALSE(auto_plan.feasible);
  CHECK_FALSE(auto_plan.limiting_factor.empty());
}

TEST_CASE("gauge estimation") {
  Rng rng(109);

  // CPTP map: exactly 1 for every sample.
  const HptpSplit split = hptp_split(random_cptp(2, 2, rng));
  CHECK(classical_gauge_estimate(split.positive_part, 50, rng) == doctest::Approx(1.0).epsilon(1e-10));

  // Kraus {|0><0|} under random pure qubit states: mean 1/2.
  Mat proj = Mat::Zero(2, 2);
  proj(0, 0) = 1.0;
  CpntpMap m;
  m.dim = 2;
  m.kraus = {proj};
  Rng rng2(7);
  CHECK(std::abs(classical_gauge_estimate(m, 10000, rng2) - 0.5) < 0.02);

  // Scaling the map by 1/2 halves the estimate.
  Rng rng3(7);
  CHECK(classical_gauge_estimate(m.scaled(0.5), 10000, rng3) ==
        doctest::Approx(0.5 * classical_gauge_estimate(m, 10000, rng2)).epsilon(0.05));
}

TEST_CASE("sampled runs estimate the normalizations") {
  // One instrument slot with N = 1/2 at modest tolerance: the estimate lands
  // within tolerance of 1/2 and the trial count matches the planned scale.
  const double pi = 3.14159265358979324;
  NormEffort light;
  light.restarts = 8;

  // Artificial single-slot ensemble via a negative-rate dephasing slice.
  const KLocalLiouvillian neg = dephasing_model(TimeFunction::constant(-0.5));
  const SliceGrid grid = slice_grid(neg, 0.6, 1);
  const DivisibilityProfile prof = divisibility_profile(grid);
  REQUIRE(prof.n_tot == 1);
  const CircuitEnsemble ens = enumerate_circuits(prof, grid);

  SimulationPlan plan = make_plan(neg, 0.6, 0.2, 4.42, {}, 1, 0.5, light);
  REQUIRE(plan.feasible);

  Rng rng(111);
  const Mat rho0 = ground_state(2);
  for (std::size_t idx = 0; idx < ens.circuits.size(); ++idx) {
    Rng stream = rng.derive(idx);
    const CircuitResult sampled = run_circuit_sampled(ens, idx, rho0, plan, stream);
    const CircuitResult exact = run_circuit_exact(ens, idx, rho0);
    REQUIRE(sampled.ledger.size() == 1);
    CHECK(sampled.ledger[0].sampled);
    CHECK(std::abs(sampled.ledger[0].n_sampled.point - exact.ledger[0].n_exact) <=
          plan.per_estimator_tol);
    CHECK(sampled.trials_used > 0);
  }

  // Fixed seed reproduces the ledgers bit for bit.
  Rng s1(1234), s2(1234);
  const CircuitResult a = run_circuit_sampled(ens, 1, rho0, plan, s1);
  const CircuitResult b = run_circuit_sampled(ens, 1, rho0, plan, s2);
  CHECK(a.ledger[0].n_sampled.n_trials == b.ledger[0].n_sampled.n_trials);
  CHECK(a.ledger[0].n_sampled.n_success == b.ledger[0].n_sampled.n_success);
  CHECK(a.weight == b.weight);

  (void)pi;
}

TEST_CASE("zero model verifies at integrator scale") {
  const KLocalLiouvillian zero = dephasing_model(TimeFunction::constant(0.0));
  Mat rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  const SimulationOutcome outcome = run_simulation(zero, 1.0, rho0, Mat(pauli_x()), 0.1, 4.42,
                                                   RunMode::Exact, 1, {}, 2, 1e-10, NormEffort{6});
  REQUIRE(outcome.plan.feasible);
  const VerifyReport rep =
      verify_against_reference(zero, rho0, Mat(pauli_x()), 1.0, outcome, RunMode::Exact);
  CHECK(rep.deviation <= 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("trial cap aborts carry the success-probability bracket") {
  const KLocalLiouvillian neg = dephasing_model(TimeFunction::constant(-0.5));
  const SliceGrid grid = slice_grid(neg, 0.6, 1);
  const CircuitEnsemble ens = enumerate_circuits(divisibility_profile(grid), grid);
  NormEffort light;
  light.restarts = 6;
  SimulationPlan plan = make_plan(neg, 0.6, 0.2, 4.42, {}, 1, 0.5, light);
  plan.per_estimator_tol = 1e-9;  // unreachable at this cap
  plan.caps.max_shots = 2048;
  Mat rho0 = Mat::Zero(2, 2);
  rho0(0, 0) = 1.0;
  Rng rng(321);
  CHECK_THROWS_AS(run_circuit_sampled(ens, 1, rho0, plan, rng), CapExceeded);
  try {
    Rng rng2(321);
    run_circuit_sampled(ens, 1, rho0, plan, rng2);
  } catch (const CapExceeded& e) {
    CHECK(std::string(e.what()).find("success probability") != std::string::npos);
  }
}

TEST_CASE("sampled reconstruction obeys the ledger bound") {
  const double pi = 3.14159265358979324;
  const KLocalLiouvillian cosine = dephasing_model(TimeFunction::sinusoid(1.0, 1.0, pi / 2));
  Mat rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  const Mat obs = pauli_x();
  NormEffort light;
  light.restarts = 8;
  const SimulationPlan plan = make_plan(cosine, pi, 0.1, 4.42, {}, 4, 0.5, light);
  REQUIRE(plan.feasible);
  const SliceGrid grid = slice_grid(cosine, pi, 4, false, 1e-10);
  const CircuitEnsemble ens = enumerate_circuits(divisibility_profile(grid), grid);

  std::vector<CircuitResult> exact_results;
  for (std::size_t idx = 0; idx < ens.circuits.size(); ++idx)
    exact_results.push_back(run_circuit_exact(ens, idx, rho0));
  const Reconstruction exact_rec = reconstruct(exact_results, obs);

  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    Rng master(seed);
    std::vector<CircuitResult> results;
    for (std::size_t idx = 0; idx < ens.circuits.size(); ++idx) {
      Rng stream = master.derive(ens.circuits[idx].r);
      results.push_back(run_circuit_sampled(ens, idx, rho0, plan, stream));
    }
    const Reconstruction rec = reconstruct(results, obs);
    // State error and expectation error both sit under the ledger bound.
    CHECK(0.5 * trace_norm(rec.state - exact_rec.state) <= rec.ledger_bound + 1e-12);
    CHECK(std::abs(rec.expectation - exact_rec.expectation) <=
          spectral_norm(obs) * 2.0 * rec.ledger_bound + 1e-12);
    // And the a-priori Wilson version stays within the planned tolerance.
    CHECK(rec.max_estimator_error <= plan.per_estimator_tol * 3.0);
  }
}

TEST_CASE("end-to-end pipeline with sampled estimates") {
  // Cosine dephasing at forced m = 4, sampled: total deviation from the
  // closed form stays within the budget.
  const double pi = 3.14159265358979324;
  const KLocalLiouvillian cosine = dephasing_model(TimeFunction::sinusoid(1.0, 1.0, pi / 2));
  const Mat rho0 = [] {
    Mat plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    return plus;
  }();
  const Mat obs = pauli_x();

  const SimulationOutcome outcome = run_simulation(
      cosine, pi, rho0, obs, 0.1, 4.42, RunMode::Sampled, 2024, {}, 4, 1e-10, NormEffort{8});
  REQUIRE(outcome.plan.feasible);

  // Closed form: coherence picks up exp(-2 integral of gamma) = exp(-2 sin t),
  // and sin(pi) = 0 brings it back to the initial state.
  const VerifyReport rep =
      verify_against_reference(cosine, rho0, obs, pi, outcome, RunMode::Sampled);
  CHECK(rep.pass);
  CHECK(rep.deviation <= 0.1);
  CHECK(rep.expectation_ref == doctest::Approx(1.0).epsilon(1e-8));

  // Exact mode nails the product map.
  const SimulationOutcome exact = run_simulation(
      cosine, pi, rho0, obs, 0.1, 4.42, RunMode::Exact, 2024, {}, 4, 1e-10, NormEffort{8});
  const VerifyReport exact_rep =
      verify_against_reference(cosine, rho0, obs, pi, exact, RunMode::Exact);
  CHECK(exact_rep.deviation <= exact.plan.eps_trotter + 1e-8);
}
