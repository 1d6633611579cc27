#include "openslt/divisibility.hpp"

#include <algorithm>
#include <cmath>

namespace openslt {

bool check_channel(const SuperOperator& s, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("check_channel: tolerance must be positive");
  const ChoiMatrix j = to_choi(s);
  const double tr = j.matrix.trace().real();
  if (hermiticity_defect(j.matrix) > tol * std::max(1.0, std::abs(tr))) return false;

  // Complete positivity: Choi spectrum above -tol * tr(J). The trace scaling
  // keeps the threshold dimension-independent; slice propagators differ from
  // the identity by O(dt), so raw machine-epsilon thresholds misclassify.
  Eigen::SelfAdjointEigenSolver<Mat> eig((j.matrix + j.matrix.adjoint()) / 2.0,
                                         Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol * std::abs(tr)) return false;

  // Trace preservation: Tr_out J = identity.
  const Mat marginal = partial_trace(j.matrix, {s.dim, s.dim}, {1});
  return max_abs(marginal - Mat::Identity(s.dim, s.dim)) <= tol * std::max(1.0, std::abs(tr) / s.dim);
}

DivisibilityProfile divisibility_profile(const SliceGrid& grid, double tol) {
  DivisibilityProfile p;
  p.m = grid.m;
  p.term_count = grid.term_count();
  p.mask.assign(p.term_count, std::vector<bool>(grid.m, false));
  p.n_tilde_i.assign(p.term_count, 0);
  p.n_hat_j.assign(grid.m, 0);
  p.c_i.assign(p.term_count, 0);

  for (int i = 0; i < p.term_count; ++i)
    for (int j = 0; j < grid.m; ++j) {
      const bool indivisible = !check_channel(grid.local[i][j], tol);
      p.mask[i][j] = indivisible;
      if (indivisible) {
        ++p.n_tilde_i[i];
        ++p.n_hat_j[j];
      }
    }

  for (int i = 0; i < p.term_count; ++i) {
    p.n_tilde = std::max(p.n_tilde, p.n_tilde_i[i]);
    p.n_tot += p.n_tilde_i[i];
    // Seq counts channel -> non-channel transitions; an indivisible run
    // starting at the very first slice has no preceding channel slice and is
    // deliberately not counted.
    for (int j = 0; j + 1 < grid.m; ++j)
      if (!p.mask[i][j] && p.mask[i][j + 1]) ++p.c_i[i];
    if (grid.m > 0 && p.mask[i][0]) p.leading_edge_terms.push_back(i);
  }
  for (int j = 0; j < grid.m; ++j) p.n_hat = std::max(p.n_hat, p.n_hat_j[j]);
  int c_max = 0;
  for (int c : p.c_i) c_max = std::max(c_max, c);
  p.c_tilde_m = 2.0 * c_max;
  return p;
}

TidEstimate estimate_tid(const KLocalLiouvillian& model, double t, std::vector<int> m_sequence,
                         double rel_tol, double grid_tol, double cp_tol) {
  if (m_sequence.empty()) m_sequence = {16, 32, 64, 128};
  if (m_sequence.size() < 3)
    throw std::invalid_argument("estimate_tid: m sequence must have at least 3 entries");
  for (size_t i = 1; i < m_sequence.size(); ++i)
    if (m_sequence[i] <= m_sequence[i - 1])
      throw std::invalid_argument("estimate_tid: m sequence must be strictly increasing");

  TidEstimate est;
  est.m_sequence = m_sequence;
  const int terms = model.term_count();

  // Coarser grids whose m divides the finest are assembled from the finest
  // grid by the cocycle identity T(b, a) = T(b, c) T(c, a); the composition
  // error stays at integrator scale.
  const int m_fine = m_sequence.back();
  const SliceGrid fine = slice_grid(model, t, m_fine, false, grid_tol);
  for (int m : m_sequence) {
    const DivisibilityProfile prof =
        m_fine % m == 0 ? divisibility_profile(coarsen_grid(fine, m), cp_tol)
                        : divisibility_profile(slice_grid(model, t, m, false, grid_tol), cp_tol);
    std::vector<double> tid_m(terms);
    for (int i = 0; i < terms; ++i) tid_m[i] = prof.n_tilde_i[i] * (t / m);
    est.tid_i_by_m.push_back(std::move(tid_m));
    est.c_i_by_m.push_back(prof.c_i);
    if (m == m_sequence.back()) est.final_profile = prof;
  }

  est.tid_i = est.tid_i_by_m.back();
  est.c_i = est.c_i_by_m.back();
  est.tid = est.tid_i.empty() ? 0.0 : *std::max_element(est.tid_i.begin(), est.tid_i.end());
  int c_max = 0;
  for (int c : est.c_i) c_max = std::max(c_max, c);
  est.c_tilde = 2.0 * c_max;

  est.converged = true;
  const auto& last = est.tid_i_by_m[est.tid_i_by_m.size() - 1];
  const auto& prev = est.tid_i_by_m[est.tid_i_by_m.size() - 2];
  for (int i = 0; i < terms; ++i)
    if (std::abs(last[i] - prev[i]) >= rel_tol * t) est.converged = false;
  return est;
}

}  // namespace openslt
