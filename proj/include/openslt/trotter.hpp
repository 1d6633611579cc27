#pragma once

#include "openslt/divisibility.hpp"

namespace openslt {

/// Ordered first-order decomposition product over the full space: rightmost
/// factor (slice 1, term 1) applied first, ascending term index within a
/// slice. The bound below is order-independent, the product is not; reports
/// record the order.
SuperOperator slt_product(const SliceGrid& grid);

/// Scalar inputs of the decomposition error bound.
struct BoundInputs {
  int term_count = 1;  // K
  double beta = 0.0;
  double t = 0.0;
  int m = 1;
  int n_tilde = 0;   // max_i over per-term non-channel slice counts
  int n_hat = 0;     // max_j over per-slice non-channel term counts
  double t_id = 0.0;
  double c_tilde = 0.0;
};

enum class BoundForm {
  Measured,  // uses the counted quantities n_tilde / n_hat at this m
  TidLimit,  // uses the limit quantities t_id / c_tilde
};

/// Upper bound on ||T_L(t,0) - prod_j prod_i T^j_i||_{1->1}:
///   measured: (K^2 b^2 t^2 / m) e^{(3 + K(2+Nt) + K min(m, K Nt) + Nh) b t/m}
///   tid:      (K^2 b^2 t^2 / m) e^{(3 + (3+C)K + C K^2) b t/m} e^{(K+K^2) t_id b}
double slt_error_bound(const BoundInputs& in, BoundForm form);

/// Coefficient convention for the sufficient step count. Two variants are in
/// circulation; only the K^2 coefficient closes against slt_error_bound when
/// substituted back (the K-linear variant leaves a residual factor K), so
/// Validated is the default and Published is kept for comparison.
enum class StepRule { Published, Validated };

struct StepCount {
  long long m = 1;
  double m_real = 0.0;      // pre-ceiling value
  bool eps_admissible = false;
};

/// Smallest sufficient slice count for target decomposition error eps:
///   validated: ceil(2 K^2 b^2 t^2 e^{(K+K^2) t_id b} / eps)
///   published: ceil(2 K   b^2 t^2 e^{(K+K^2) t_id b} / eps)
/// eps_admissible reports eps <= 2 K^2 b t ln2 e^{(K+K^2) t_id b} / (3 + (3+C)K + C K^2).
StepCount required_slice_count(double eps, int term_count, double beta_value, double t,
                               double t_id, double c_tilde, StepRule rule = StepRule::Validated);

/// Measured decomposition error ||T_L(t,0) - SLT product||_{1->1} as a
/// (lower, upper) estimate pair.
NormEstimate empirical_slt_error(const KLocalLiouvillian& model, double t, int m, double tol,
                                 const NormEffort& effort = {});

/// Same, against a precomputed reference propagator (for sweeps that reuse
/// one reference across many m).
NormEstimate empirical_slt_error_against(const SuperOperator& reference, const SliceGrid& grid,
                                         const NormEffort& effort = {});

/// Diagnostic quantities behind the bound: norms of partial products and of
/// the per-slice global propagators, the product-envelope bound, pairwise
/// commutator suprema, the per-slice splitting bound, and direct checks of
/// the two-generator splitting inequality
///   ||T_{A+B}(t,s) - T_A(t,s) T_B(t,s)||
///     <= (1/2)(t-s)^2 sup||[A(u),B(r)]|| e^{(t-s)(3 sup||A|| + 2 sup||B||)}.
struct DecompositionDiagnostics {
  std::vector<double> partial_product_norms;   // alpha = 0..m (lower estimates)
  std::vector<double> slice_propagator_norms;  // alpha = 1..m
  double envelope_bound = 0.0;                 // m e^{[min(K Nt, m)+Nt] K b dt} max_j ||...||
  double max_slice_split_error = 0.0;          // max_j ||T^j_L - prod_i T^j_i||
  double per_slice_bound = 0.0;                // (K b^2)(dt)^2 e^{(3+2K) b dt}
  std::vector<std::vector<double>> commutator_sup;  // [a][b], full-space norms
  struct PairSplitCheck {
    int term_a = 0, term_b = 0;
    double s = 0.0, t = 0.0;
    double lhs = 0.0, rhs = 0.0;
  };
  std::vector<PairSplitCheck> pair_checks;
};

DecompositionDiagnostics decomposition_diagnostics(const SliceGrid& grid,
                                                   const KLocalLiouvillian& model,
                                                   double beta_value, int pair_samples = 5,
                                                   const NormEffort& effort = {},
                                                   double pair_tol = 1e-7);

}  // namespace openslt
