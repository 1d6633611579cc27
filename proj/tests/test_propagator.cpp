#include <doctest.h>

#include "openslt/divisibility.hpp"
#include "openslt/propagator.hpp"
#include "testutil.hpp"

using namespace openslt;
using namespace openslt::testutil;

namespace {

// Classic fixed-step RK4 on the transfer-matrix initial value problem,
// independent of the exponential-midpoint integrator it checks.
Mat rk4_oracle(const GeneratorSource& src, double s, double t, double h) {
  const Eigen::Index side = static_cast<Eigen::Index>(src.dim) * src.dim;
  Mat u = Mat::Identity(side, side);
  const long n = std::max<long>(1, static_cast<long>(std::ceil((t - s) / h)));
  const double step = (t - s) / n;
  for (long k = 0; k < n; ++k) {
    const double a = s + k * step;
    const Mat k1 = src.at(a).transfer * u;
    const Mat k2 = src.at(a + step / 2).transfer * (u + step / 2 * k1);
    const Mat k3 = src.at(a + step / 2).transfer * (u + step / 2 * k2);
    const Mat k4 = src.at(a + step).transfer * (u + step * k3);
    u += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

KLocalLiouvillian driven_dephasing() {
  // Time-dependent, non-commuting: H = 0.8 X with gamma(s) = 0.6 sin(2s) Z-dephasing.
  KLocalLiouvillian model;
  model.lattice = {1, 2};
  model.k = 1;
  GkslTerm t;
  t.hamiltonian = TimeMatrix(0.8 * pauli_x());
  t.lindblad_ops.emplace_back(pauli_z());
  t.rates.push_back(TimeFunction::sinusoid(0.6, 2.0, 0.0));
  model.terms.push_back({{0}, std::move(t)});
  return model;
}

}  // namespace

TEST_CASE("evolve basics") {
  // Zero generator: identity propagator.
  KLocalLiouvillian zero = dephasing_model(TimeFunction::constant(0.0));
  const SuperOperator p = evolve(global_source(zero), 0.0, 2.0, 1e-12);
  CHECK(max_abs(p.transfer - SuperOperator::identity_map(2).transfer) < 1e-12);

  // Amplitude damping at rate 1 for t = 1: excited population decays by e^{-1}.
  const KLocalLiouvillian damp = damping_model(1.0);
  const SuperOperator pd = evolve(global_source(damp), 0.0, 1.0, 1e-12);
  Mat e11 = Mat::Zero(2, 2);
  e11(1, 1) = 1.0;
  const Mat out = pd.apply(e11);
  CHECK(out(1, 1).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(out(0, 0).real() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));

  CHECK_THROWS(evolve(global_source(damp), 1.0, 0.5, 1e-10));
  CHECK_THROWS(evolve(global_source(damp), 0.0, 1.0, 0.0));
}

TEST_CASE("evolve matches an independent RK4 oracle") {
  const KLocalLiouvillian model = driven_dephasing();
  const GeneratorSource src = global_source(model);
  const double tol = 1e-9;
  const SuperOperator mine = evolve(src, 0.0, 1.3, tol);
  const Mat ref = rk4_oracle(src, 0.0, 1.3, 1e-4);
  CHECK((mine.transfer - ref).norm() < 10 * tol + 1e-8);
}

TEST_CASE("refinement convergence order") {
  // Halving the substep cuts the defect against the oracle by at least ~3x.
  const KLocalLiouvillian model = driven_dephasing();
  const GeneratorSource src = global_source(model);
  const Mat ref = rk4_oracle(src, 0.0, 1.0, 5e-5);

  auto fixed_step_error = [&](long n) {
    const double h = 1.0 / n;
    const Eigen::Index side = 4;
    Mat acc = Mat::Identity(side, side);
    for (long k = 0; k < n; ++k) acc = expm(h * src.at((k + 0.5) * h).transfer) * acc;
    return (acc - ref).norm();
  };
  const double e8 = fixed_step_error(8);
  const double e16 = fixed_step_error(16);
  const double e32 = fixed_step_error(32);
  CHECK(e8 / e16 >= 3.0);
  CHECK(e16 / e32 >= 3.0);
}

TEST_CASE("slice grid construction") {
  const KLocalLiouvillian damp = damping_model(0.8);

  // Time-independent model: averaged and instantaneous grids agree.
  const SliceGrid inst = slice_grid(damp, 1.0, 4, false, 1e-12);
  const SliceGrid avg = slice_grid(damp, 1.0, 4, true, 1e-12);
  for (int j = 0; j < 4; ++j)
    CHECK(max_abs(inst.local[0][j].transfer - avg.local[0][j].transfer) < 1e-12);

  // m = 1, K = 1: the single entry is the whole propagator.
  const SliceGrid one = slice_grid(damp, 1.0, 1, false, 1e-12);
  const SuperOperator whole = evolve(global_source(damp), 0.0, 1.0, 1e-12);
  CHECK(max_abs(one.local[0][0].transfer - whole.transfer) < 1e-11);

  // Cocycle: composition over j recovers the full local propagator.
  const KLocalLiouvillian model = driven_dephasing();
  const SliceGrid grid = slice_grid(model, 1.2, 8, false, 1e-11);
  Mat prod = Mat::Identity(4, 4);
  for (int j = 0; j < 8; ++j) prod = grid.local[0][j].transfer * prod;
  const SuperOperator full = evolve(local_source(model.terms[0], model), 0.0, 1.2, 1e-11);
  CHECK((prod - full.transfer).norm() < 1e-8);

  // Slice propagators are trace preserving: Tr_out of the Choi matrix is 1.
  for (int j = 0; j < 8; ++j) {
    const ChoiMatrix choi = to_choi(grid.local[0][j]);
    CHECK(max_abs(partial_trace(choi.matrix, {2, 2}, {1}) - identity(2)) < 1e-9);
  }
}

TEST_CASE("integrator splits at declared discontinuities") {
  const TimeFunction rate = TimeFunction::piecewise(
      {0.5, 1.0}, {TimeFunction::constant(1.0), TimeFunction::constant(-1.0)});
  const KLocalLiouvillian model = dephasing_model(rate);
  // One slice straddling the jump: net dephasing weight is exactly zero.
  const SuperOperator p = evolve(global_source(model), 0.0, 1.0, 1e-12);
  CHECK(max_abs(p.apply(pauli_x()) - pauli_x()) < 1e-10);
}

TEST_CASE("reference state evolution") {
  const KLocalLiouvillian zero = dephasing_model(TimeFunction::constant(0.0));
  Rng rng(53);
  const Mat rho0 = random_density(2, rng);
  CHECK(max_abs(reference_state_evolution(zero, rho0, 3.0) - rho0) < 1e-11);

  const KLocalLiouvillian damp = damping_model(1.0);
  const Mat rho1 = reference_state_evolution(damp, rho0, 0.7);
  CHECK(rho1(1, 1).real() ==
        doctest::Approx(std::exp(-0.7) * rho0(1, 1).real()).epsilon(1e-9));

  const KLocalLiouvillian model2 = two_qubit_divisible();
  const Mat rho2 = reference_state_evolution(model2, random_density(4, rng), 0.9);
  CHECK(std::abs(rho2.trace() - Cplx(1, 0)) < 1e-9);
  CHECK(hermiticity_defect(rho2) < 1e-9);

  CHECK_THROWS(reference_state_evolution(damp, 2.0 * rho0, 1.0));
}

TEST_CASE("propagator norms respect the generator-integral envelope") {
  const KLocalLiouvillian model = driven_dephasing();
  const GeneratorSource src = global_source(model);
  const double t = 1.0;
  const SuperOperator prop = evolve(src, 0.0, t, 1e-10);

  // Trapezoid quadrature of the grid-sampled norm of the generator.
  const int grid = 101;
  double integral = 0.0;
  double prev = one_to_one_norm(src.at(0.0)).lower;
  for (int p = 1; p < grid; ++p) {
    const double cur = one_to_one_norm(src.at(t * p / (grid - 1))).lower;
    integral += 0.5 * (prev + cur) * (t / (grid - 1));
    prev = cur;
  }
  const double bound = std::exp(integral) + 1e-6;
  CHECK(one_to_one_norm(prop).lower <= bound);

  // Invertibility: transfer * transfer^{-1} = identity.
  const Mat inv = prop.transfer.inverse();
  CHECK(max_abs(prop.transfer * inv - Mat::Identity(4, 4)) < 1e-8);

  // CPTP propagators sit at norm 1.
  const KLocalLiouvillian damp = damping_model(1.0);
  const SuperOperator cp = evolve(global_source(damp), 0.0, 1.0, 1e-11);
  CHECK(one_to_one_norm(cp).lower == doctest::Approx(1.0).epsilon(1e-6));
}
