#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "openslt/superop.hpp"
#include "openslt/timefn.hpp"

namespace openslt {

struct Lattice {
  int sites = 1;
  int local_dim = 2;

  long dim() const {
    long d = 1;
    for (int i = 0; i < sites; ++i) d *= local_dim;
    return d;
  }
};

/// Matrix with declared time dependence: sum_c coeffs_c(t) * parts_c.
struct TimeMatrix {
  std::vector<Mat> parts;
  std::vector<TimeFunction> coeffs;

  TimeMatrix() = default;
  explicit TimeMatrix(Mat static_part);
  TimeMatrix(std::vector<Mat> parts_, std::vector<TimeFunction> coeffs_);

  Mat at(double t) const;
  bool is_static() const;
  int dim() const { return parts.empty() ? 0 : static_cast<int>(parts.front().rows()); }
  void collect_breakpoints(double t0, double t1, std::vector<double>& out) const;
};

/// GKSL-form generator data: -i[H, .] + sum_j gamma_j(t) D(L_j), with
/// dissipation rates gamma_j(t) allowed to be negative.
struct GkslTerm {
  TimeMatrix hamiltonian;
  std::vector<TimeMatrix> lindblad_ops;
  std::vector<TimeFunction> rates;
};

/// Raw generator: sum_c f_c(t) * S_c given directly as transfer matrices.
struct RawTerm {
  std::vector<SuperOperator> components;
  std::vector<TimeFunction> coeffs;
};

struct LocalTerm {
  std::vector<int> support;  // ordered, distinct site indices
  std::variant<GkslTerm, RawTerm> form;

  bool is_gksl() const { return std::holds_alternative<GkslTerm>(form); }
  int support_dim(int local_dim) const;
  void collect_breakpoints(double t0, double t1, std::vector<double>& out) const;
};

/// Generator of a local term at time s, as a superoperator on the support
/// space.
SuperOperator generator_at(const LocalTerm& term, double s, int local_dim);

struct KLocalLiouvillian {
  Lattice lattice;
  std::vector<LocalTerm> terms;
  int k = 1;  // locality bound

  int term_count() const { return static_cast<int>(terms.size()); }
  SuperOperator global_generator_at(double s) const;
  std::vector<double> breakpoints(double t0, double t1) const;
};

struct ValidationIssue {
  int term_index;  // -1 for model-level issues
  std::string what;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  std::vector<int> lindblad_counts;  // per GKSL term
};

/// Checks all model invariants on a time grid over [0, t_max]: Hermitian
/// Hamiltonians, support sizes within the locality bound, Lindblad counts
/// within d^{2k}, trace annihilation of raw generators.
ValidationReport validate_model(const KLocalLiouvillian& model, double t_max, int grid = 101);

/// Slice-averaged generator (m/t) * integral of the term generator over
/// [t(j-1)/m, tj/m], j in [1, m], by adaptive Simpson quadrature.
SuperOperator averaged_generator(const LocalTerm& term, int j, int m, double t, int local_dim,
                                 double rel_tol = 1e-10);

enum class BetaMode { LocalSpace, FullSpace };

/// beta = sup_s max_i ||L_i(s)||_{1->1}, sampled on `grid` points of [0, t].
/// FullSpace evaluates the norm on the identity-padded embedding (default for
/// bound evaluation), LocalSpace on the support space.
double beta(const KLocalLiouvillian& model, double t, BetaMode mode = BetaMode::FullSpace,
            int grid = 101, const NormEffort& effort = {});

/// beta_tilde = sup_s max_{i,j} ||L_{i,j}(s)||_inf. Requires every term in
/// GKSL form.
double beta_tilde(const KLocalLiouvillian& model, double t, int grid = 101);

const char* beta_mode_name(BetaMode mode);

}  // namespace openslt
