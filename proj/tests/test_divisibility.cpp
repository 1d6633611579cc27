#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "openslt/divisibility.hpp"
#include "testutil.hpp"

using namespace openslt;
using namespace openslt::testutil;

namespace {

SuperOperator transpose_map() {
  SuperOperator s(2, Mat::Zero(4, 4));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat e = Mat::Zero(2, 2);
      e(i, j) = 1.0;
      s.transfer.col(j * 2 + i) = vec(Mat(e.transpose()));
    }
  return s;
}

}  // namespace

TEST_CASE("check function") {
  CHECK(check_channel(SuperOperator::identity_map(2)));
  CHECK(check_channel(SuperOperator::identity_map(3)));
  CHECK_FALSE(check_channel(transpose_map()));

  Rng rng(59);
  for (int rep = 0; rep < 5; ++rep) CHECK(check_channel(random_cptp(2 + rep % 2, 3, rng)));

  // A slice propagator of dephasing with gamma = -1 amplifies coherences and
  // fails complete positivity.
  const KLocalLiouvillian neg = dephasing_model(TimeFunction::constant(-1.0));
  const SliceGrid grid = slice_grid(neg, 1.0, 4);
  CHECK_FALSE(check_channel(grid.local[0][0]));

  // CP but not TP: a single sub-normalized Kraus operator.
  Mat half = Mat::Zero(2, 2);
  half(0, 0) = 0.5;
  CHECK_FALSE(check_channel(sandwich(half, half.adjoint())));
}

TEST_CASE("check function agrees with an independent eigensolver") {
  // Minimum Choi eigenvalue from the self-adjoint solver vs the general
  // (Schur-based) solver.
  Rng rng(61);
  const KLocalLiouvillian model = dephasing_model(TimeFunction::sinusoid(1.0, 1.0, 0.0));
  const SliceGrid grid = slice_grid(model, 3.0, 6);
  for (int j = 0; j < 6; ++j) {
    const ChoiMatrix choi = to_choi(grid.local[0][j]);
    Eigen::SelfAdjointEigenSolver<Mat> sa((choi.matrix + choi.matrix.adjoint()) / 2.0);
    Eigen::ComplexEigenSolver<Mat> ge(choi.matrix);
    double min_sa = sa.eigenvalues().minCoeff();
    double min_ge = ge.eigenvalues().real().minCoeff();
    CHECK(std::abs(min_sa - min_ge) < 1e-10 * std::max(1.0, std::abs(min_sa)));
  }
}

TEST_CASE("divisibility profile counting") {
  // All-channel grid: all-zero profile.
  const KLocalLiouvillian damp = damping_model(1.0);
  const SliceGrid grid = slice_grid(damp, 1.0, 6);
  const DivisibilityProfile prof = divisibility_profile(grid);
  CHECK(prof.n_tilde == 0);
  CHECK(prof.n_hat == 0);
  CHECK(prof.n_tot == 0);
  CHECK(prof.c_i[0] == 0);

  // Mask (channel, non, non, channel): counts 2 and one disjoint interval.
  // Rate is positive on slices 1 and 4, negative on slices 2 and 3.
  const TimeFunction rate = TimeFunction::piecewise(
      {0.25, 0.75, 1.0},
      {TimeFunction::constant(1.0), TimeFunction::constant(-1.0), TimeFunction::constant(1.0)});
  const SliceGrid grid2 = slice_grid(dephasing_model(rate), 1.0, 4);
  const DivisibilityProfile prof2 = divisibility_profile(grid2);
  REQUIRE(prof2.mask.size() == 1);
  CHECK_FALSE(prof2.mask[0][0]);
  CHECK(prof2.mask[0][1]);
  CHECK(prof2.mask[0][2]);
  CHECK_FALSE(prof2.mask[0][3]);
  CHECK(prof2.n_tilde_i[0] == 2);
  CHECK(prof2.c_i[0] == 1);
  CHECK(prof2.leading_edge_terms.empty());

  // Mask (non, channel, non): literal Seq counts one interval; the leading
  // non-channel slice is reported separately, not counted.
  const TimeFunction rate3 = TimeFunction::piecewise(
      {1.0, 2.0, 3.0},
      {TimeFunction::constant(-1.0), TimeFunction::constant(1.0), TimeFunction::constant(-1.0)});
  const SliceGrid grid3 = slice_grid(dephasing_model(rate3), 3.0, 3);
  const DivisibilityProfile prof3 = divisibility_profile(grid3);
  CHECK(prof3.mask[0][0]);
  CHECK_FALSE(prof3.mask[0][1]);
  CHECK(prof3.mask[0][2]);
  CHECK(prof3.c_i[0] == 1);
  REQUIRE(prof3.leading_edge_terms.size() == 1);
  CHECK(prof3.leading_edge_terms[0] == 0);

  // Bounds that hold by construction.
  CHECK(prof3.n_tilde <= grid3.m);
  CHECK(prof3.n_hat <= grid3.term_count());
  CHECK(prof3.n_tot <= static_cast<long>(grid3.m) * grid3.term_count());
}

TEST_CASE("slice classification is stable under refinement inside constant-sign regions") {
  const TimeFunction rate = TimeFunction::piecewise(
      {0.5, 1.0}, {TimeFunction::constant(1.0), TimeFunction::constant(-1.0)});
  const KLocalLiouvillian model = dephasing_model(rate);
  for (int m : {2, 4, 8}) {
    const DivisibilityProfile prof = divisibility_profile(slice_grid(model, 1.0, m));
    // First half channels, second half not.
    for (int j = 0; j < m; ++j) CHECK(prof.mask[0][j] == (j >= m / 2));
  }
}

TEST_CASE("t_id estimation on cosine dephasing") {
  // gamma(s) = cos(s) on [0, pi]: negative on (pi/2, pi), so t_id ~ pi/2 and
  // a single channel -> non-channel transition.
  const double pi = 3.14159265358979324;
  const KLocalLiouvillian model = dephasing_model(TimeFunction::sinusoid(1.0, 1.0, pi / 2));
  const TidEstimate est = estimate_tid(model, pi);
  CHECK(est.converged);
  CHECK(est.tid == doctest::Approx(pi / 2).epsilon(0.05 / (pi / 2)));
  CHECK(est.c_i[0] == 1);
  CHECK(est.c_tilde == 2.0);

  // Oracle at m = 256: slice-wise checks.
  const DivisibilityProfile fine = divisibility_profile(slice_grid(model, pi, 256));
  CHECK(std::abs(fine.n_tilde_i[0] * (pi / 256) - est.tid) < 0.05);

  // The displayed inequality: n_tilde <= min(t_id/dt + c_tilde, m).
  const DivisibilityProfile& prof = est.final_profile;
  const double dt = pi / prof.m;
  CHECK(prof.n_tilde <= std::min(est.tid / dt + est.c_tilde, static_cast<double>(prof.m)) + 1.0);

  // Locally divisible model: zero estimate, converged.
  const TidEstimate div = estimate_tid(damping_model(1.0), 1.0);
  CHECK(div.converged);
  CHECK(div.tid == 0.0);
  CHECK(div.c_tilde == 0.0);

  CHECK_THROWS(estimate_tid(model, pi, {4, 8}));
  CHECK_THROWS(estimate_tid(model, pi, {8, 4, 2}));
}
