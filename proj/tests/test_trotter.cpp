#include <doctest.h>

#include "openslt/trotter.hpp"
#include "testutil.hpp"

using namespace openslt;
using namespace openslt::testutil;

TEST_CASE("slt product exactness cases") {
  // K = 1: the decomposition is exact (single-generator cocycle).
  const KLocalLiouvillian model = dephasing_model(TimeFunction::sinusoid(0.8, 1.7, 0.2));
  const double tol = 1e-11;
  const SuperOperator ref = evolve(global_source(model), 0.0, 1.0, tol);
  for (int m : {1, 3, 7}) {
    const SliceGrid grid = slice_grid(model, 1.0, m, false, tol);
    CHECK((slt_product(grid).transfer - ref.transfer).norm() < 1e-8);
  }

  // Zero model: the identity.
  const KLocalLiouvillian zero = dephasing_model(TimeFunction::constant(0.0));
  const SliceGrid zero_grid = slice_grid(zero, 1.0, 3);
  CHECK(max_abs(slt_product(zero_grid).transfer - SuperOperator::identity_map(2).transfer) <
        1e-11);

  // Disjoint supports, time independent: embeddings commute, product exact.
  KLocalLiouvillian disjoint;
  disjoint.lattice = {2, 2};
  disjoint.k = 1;
  {
    GkslTerm t;
    t.hamiltonian = TimeMatrix(0.9 * pauli_x());
    t.lindblad_ops.emplace_back(sigma_minus());
    t.rates.push_back(TimeFunction::constant(0.4));
    disjoint.terms.push_back({{0}, std::move(t)});
  }
  {
    GkslTerm t;
    t.lindblad_ops.emplace_back(pauli_z());
    t.rates.push_back(TimeFunction::constant(0.7));
    disjoint.terms.push_back({{1}, std::move(t)});
  }
  const SuperOperator ref2 = evolve(global_source(disjoint), 0.0, 1.0, 1e-11);
  const SliceGrid grid2 = slice_grid(disjoint, 1.0, 2, false, 1e-11);
  CHECK((slt_product(grid2).transfer - ref2.transfer).norm() < 1e-8);
}

TEST_CASE("error bound closed forms") {
  BoundInputs in;
  in.term_count = 2;
  in.beta = 1.0;
  in.t = 1.0;
  in.m = 10;
  in.n_tilde = 0;
  in.n_hat = 0;

  // K=2, beta=1, t=1, m=10, divisible: (4/10) e^{0.7}.
  CHECK(slt_error_bound(in, BoundForm::Measured) ==
        doctest::Approx(0.4 * std::exp(0.7)).epsilon(1e-12));

  BoundInputs zero_beta = in;
  zero_beta.beta = 0.0;
  CHECK(slt_error_bound(zero_beta, BoundForm::Measured) == 0.0);
  CHECK(slt_error_bound(zero_beta, BoundForm::TidLimit) == 0.0);

  // Divisible inputs: measured exponent (3+2K) vs tid exponent (3+3K);
  // measured <= tid.
  for (int k : {1, 2, 3}) {
    BoundInputs div;
    div.term_count = k;
    div.beta = 0.9;
    div.t = 1.3;
    div.m = 12;
    const double measured = slt_error_bound(div, BoundForm::Measured);
    const double tid = slt_error_bound(div, BoundForm::TidLimit);
    const double k2 = static_cast<double>(k) * k;
    const double pre = k2 * 0.9 * 0.9 * 1.3 * 1.3 / 12;
    CHECK(measured == doctest::Approx(pre * std::exp((3 + 2.0 * k) * 0.9 * 1.3 / 12)).epsilon(1e-12));
    CHECK(tid == doctest::Approx(pre * std::exp((3 + 3.0 * k) * 0.9 * 1.3 / 12)).epsilon(1e-12));
    CHECK(measured <= tid);
  }
}

TEST_CASE("bound monotonicity in the slice count") {
  // Once m clears the exponent scale the bound decreases monotonically.
  BoundInputs in;
  in.term_count = 3;
  in.beta = 1.2;
  in.t = 1.5;
  in.n_tilde = 4;
  in.n_hat = 2;
  in.t_id = 0.4;
  in.c_tilde = 2.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 40; m <= 4096; m *= 2) {
    in.m = m;
    in.n_tilde = std::min(in.n_tilde, m);
    const double measured = slt_error_bound(in, BoundForm::Measured);
    const double tid = slt_error_bound(in, BoundForm::TidLimit);
    CHECK(measured < prev);
    CHECK(measured <= tid * (1 + 1e-12));
    prev = measured;
  }
}

TEST_CASE("required slice count") {
  // K=1, t_id=0, beta=1, t=1, eps=0.1: validated rule gives 20.
  const StepCount sc = required_slice_count(0.1, 1, 1.0, 1.0, 0.0, 0.0, StepRule::Validated);
  CHECK(sc.m == 20);

  // beta = 0: the bound vanishes, floor at m = 1.
  CHECK(required_slice_count(0.1, 2, 0.0, 1.0, 0.0, 0.0).m == 1);

  // Substituting the validated count back into the tid-form bound stays
  // below eps whenever eps is admissible.
  Rng rng(67);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 1 + static_cast<int>(rng.uniform() * 3);
    const double beta_v = 0.3 + rng.uniform();
    const double t = 0.5 + rng.uniform();
    const double t_id = rng.uniform() * 0.3;
    const double c_tilde = 2.0 * static_cast<int>(rng.uniform() * 2);
    const double eps = 0.02 + rng.uniform() * 0.2;
    const StepCount step =
        required_slice_count(eps, k, beta_v, t, t_id, c_tilde, StepRule::Validated);
    if (!step.eps_admissible || step.m > 100000000LL) continue;
    BoundInputs in;
    in.term_count = k;
    in.beta = beta_v;
    in.t = t;
    in.m = static_cast<int>(step.m);
    in.t_id = t_id;
    in.c_tilde = c_tilde;
    CHECK(slt_error_bound(in, BoundForm::TidLimit) <= eps * (1 + 1e-12));
  }

  // The published coefficient is K times smaller.
  const StepCount validated = required_slice_count(0.1, 3, 1.0, 1.0, 0.1, 2.0, StepRule::Validated);
  const StepCount published = required_slice_count(0.1, 3, 1.0, 1.0, 0.1, 2.0, StepRule::Published);
  CHECK(validated.m_real == doctest::Approx(3.0 * published.m_real).epsilon(1e-12));

  CHECK_THROWS(required_slice_count(0.0, 1, 1.0, 1.0, 0.0, 0.0));
}

TEST_CASE("empirical error: first-order convergence and exactness") {
  // K = 1 stays at integrator-tolerance scale for any m.
  const KLocalLiouvillian single = dephasing_model(TimeFunction::sinusoid(0.8, 1.7, 0.2));
  const NormEstimate exact_err = empirical_slt_error(single, 1.0, 5, 1e-10);
  CHECK(exact_err.lower < 1e-8);

  // Non-commuting divisible model: doubling m roughly halves the error.
  const KLocalLiouvillian model = two_qubit_divisible();
  const double tol = 1e-10;
  const SuperOperator ref = evolve(global_source(model), 0.0, 1.0, tol);
  std::vector<double> errors;
  for (int m : {4, 8, 16, 32}) {
    const SliceGrid grid = slice_grid(model, 1.0, m, false, tol);
    errors.push_back(empirical_slt_error_against(ref, grid).lower);
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}

TEST_CASE("empirical error never exceeds the measured bound") {
  for (const NamedModel& entry : corpus()) {
    CAPTURE(entry.name);
    const double t = entry.horizon;
    const double beta_v = beta(entry.model, t, BetaMode::FullSpace, 21, NormEffort{8});
    const SuperOperator ref = evolve(global_source(entry.model), 0.0, t, 1e-8);
    for (int m : {2, 8}) {
      const SliceGrid grid = slice_grid(entry.model, t, m, false, 1e-8);
      const DivisibilityProfile prof = divisibility_profile(grid);
      BoundInputs in;
      in.term_count = entry.model.term_count();
      in.beta = beta_v;
      in.t = t;
      in.m = m;
      in.n_tilde = prof.n_tilde;
      in.n_hat = prof.n_hat;
      const double bound = slt_error_bound(in, BoundForm::Measured);
      const double err = empirical_slt_error_against(ref, grid, NormEffort{8}).lower;
      CHECK(err <= bound * (1 + 1e-9) + 1e-7);
    }
  }
}

TEST_CASE("decomposition diagnostics") {
  NormEffort light;
  light.restarts = 4;

  // Commuting terms: commutator supremum ~ 0 and the splitting defect is at
  // integrator scale.
  KLocalLiouvillian commuting;
  commuting.lattice = {2, 2};
  commuting.k = 1;
  for (int site : {0, 1}) {
    GkslTerm t;
    t.lindblad_ops.emplace_back(pauli_z());
    t.rates.push_back(TimeFunction::constant(site == 0 ? 0.6 : 0.8));
    commuting.terms.push_back({{site}, std::move(t)});
  }
  const double beta_comm = beta(commuting, 1.0, BetaMode::FullSpace, 11, light);
  const SliceGrid grid_comm = slice_grid(commuting, 1.0, 2, false, 1e-10);
  const DecompositionDiagnostics diag_comm =
      decomposition_diagnostics(grid_comm, commuting, beta_comm, 2, light);
  for (const auto& row : diag_comm.commutator_sup)
    for (double v : row) CHECK(v < 1e-9);
  for (const auto& check : diag_comm.pair_checks) CHECK(check.lhs < 1e-6);

  // Divisible grid: partial products are channels, norms stay at 1.
  const KLocalLiouvillian div = two_qubit_divisible();
  const double beta_div = beta(div, 1.0, BetaMode::FullSpace, 11, light);
  const SliceGrid grid_div = slice_grid(div, 1.0, 3, false, 1e-10);
  const DecompositionDiagnostics diag_div =
      decomposition_diagnostics(grid_div, div, beta_div, 2, light);
  for (double p : diag_div.partial_product_norms) CHECK(p <= 1.0 + 1e-6);
  for (double p : diag_div.slice_propagator_norms) CHECK(p <= 1.0 + 1e-6);

  // The splitting inequality holds on every sampled pair, and the envelope
  // dominates the product defect.
  const KLocalLiouvillian mixed = two_qubit_mixed_sign();
  const double beta_mixed = beta(mixed, 1.0, BetaMode::FullSpace, 11, light);
  const SliceGrid grid_mixed = slice_grid(mixed, 1.0, 2, false, 1e-10);
  const DecompositionDiagnostics diag =
      decomposition_diagnostics(grid_mixed, mixed, beta_mixed, 4, light);
  CHECK(diag.pair_checks.size() >= 20);
  for (const auto& check : diag.pair_checks) {
    CAPTURE(check.term_a);
    CAPTURE(check.term_b);
    CHECK(check.lhs <= check.rhs * (1 + 1e-9) + 1e-6);
  }
  const SuperOperator ref = evolve(global_source(mixed), 0.0, 1.0, 1e-10);
  const double defect = empirical_slt_error_against(ref, grid_mixed, light).lower;
  CHECK(defect <= diag.envelope_bound * (1 + 1e-9) + 1e-6);
}
