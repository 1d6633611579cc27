#pragma once

#include <functional>

#include "openslt/model.hpp"

namespace openslt {

/// Time-dependent generator handed to the integrator: evaluation plus the
/// declared discontinuities the integrator must split at.
struct GeneratorSource {
  int dim = 0;
  std::function<SuperOperator(double)> at;
  std::vector<double> breakpoints;
};

GeneratorSource local_source(const LocalTerm& term, const KLocalLiouvillian& model);
GeneratorSource global_source(const KLocalLiouvillian& model);

/// Time-ordered propagator over [s, t] by exponential-midpoint substeps with
/// step halving until successive refinements agree to `tol` (Frobenius).
/// Exact (one exponential) for time-independent generators; every substep is
/// an exponential of a generator, so trace preservation is inherited from the
/// generator structure.
SuperOperator evolve(const GeneratorSource& source, double s, double t, double tol);

/// All K x m slice propagators T^j_i on their support spaces. The averaged
/// variant uses exp(dt * averaged_generator) instead of the time-ordered
/// slice propagator.
struct SliceGrid {
  double t = 0.0;
  int m = 0;
  bool averaged = false;
  double tol = 1e-10;
  Lattice lattice;
  std::vector<std::vector<int>> supports;        // per term
  std::vector<std::vector<SuperOperator>> local;  // [term i][slice j-1]

  int term_count() const { return static_cast<int>(local.size()); }
  double dt() const { return t / m; }
};

SliceGrid slice_grid(const KLocalLiouvillian& model, double t, int m, bool averaged = false,
                     double tol = 1e-10);

/// Coarser grid assembled from a finer one by the cocycle identity
/// T(b, a) = T(b, c) T(c, a); requires fine.m % m == 0. Composition keeps the
/// error at integrator scale.
SliceGrid coarsen_grid(const SliceGrid& fine, int m);

/// Reference solution rho(t) of the full master equation, used as the oracle
/// everything else is checked against.
Mat reference_state_evolution(const KLocalLiouvillian& model, const Mat& rho0, double t,
                              double tol = 1e-10);

}  // namespace openslt
