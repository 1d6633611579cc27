#pragma once

#include "openslt/propagator.hpp"

namespace openslt {

/// Check function: true iff the map is a quantum channel (CPTP). Complete
/// positivity is read off the Choi spectrum (eigenvalues >= -tol * tr J) and
/// trace preservation from the partial trace of the Choi matrix over the
/// output factor.
bool check_channel(const SuperOperator& s, double tol = 1e-9);

/// All finite-m indivisibility counters of a slice grid. The mask records
/// ch[i][j] = 1 where slice propagator T^j_i fails to be a channel.
struct DivisibilityProfile {
  int m = 0;
  int term_count = 0;
  std::vector<std::vector<bool>> mask;  // [term i][slice j-1], true = not a channel
  std::vector<int> n_tilde_i;           // per-term non-channel slice counts
  std::vector<int> n_hat_j;             // per-slice non-channel term counts
  int n_tilde = 0;                      // max_i n_tilde_i
  int n_hat = 0;                        // max_j n_hat_j
  long n_tot = 0;                       // sum_i n_tilde_i
  std::vector<int> c_i;                 // disjoint indivisible-interval counts (Seq)
  double c_tilde_m = 0.0;               // 2 * max_i c_i at this m
  /// Terms whose first slice is already non-channel: such a leading interval
  /// is not counted by Seq (it has no preceding channel slice).
  std::vector<int> leading_edge_terms;
};

DivisibilityProfile divisibility_profile(const SliceGrid& grid, double tol = 1e-9);

/// Finite-sequence estimate of t^ID_i = lim_{m->inf} N~^m_i * dt, with
/// explicit convergence reporting instead of a silent limit claim.
struct TidEstimate {
  std::vector<int> m_sequence;
  std::vector<std::vector<double>> tid_i_by_m;  // [sequence idx][term]
  std::vector<std::vector<int>> c_i_by_m;
  std::vector<double> tid_i;  // final-m estimates
  double tid = 0.0;           // max_i tid_i
  std::vector<int> c_i;       // final-m estimates of C_i
  double c_tilde = 0.0;       // 2 * max_i C_i
  bool converged = false;
  DivisibilityProfile final_profile;
};

TidEstimate estimate_tid(const KLocalLiouvillian& model, double t, std::vector<int> m_sequence = {},
                         double rel_tol = 0.02, double grid_tol = 1e-10, double cp_tol = 1e-9);

}  // namespace openslt
