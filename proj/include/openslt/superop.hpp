#pragma once

#include <cstdint>
#include <vector>

#include "openslt/linalg.hpp"

namespace openslt {

/// A linear map on operators over a D-dimensional Hilbert space, stored as
/// its D^2 x D^2 transfer matrix in the column-stacking convention
/// (vec(|i><j|) at index j*D + i, so vec(AXB) = (B^T (x) A) vec(X)).
struct SuperOperator {
  int dim = 0;
  Mat transfer;

  SuperOperator() = default;
  SuperOperator(int dim_, Mat transfer_);

  static SuperOperator identity_map(int dim);
  static SuperOperator zero_map(int dim);

  Mat apply(const Mat& a) const;

  SuperOperator operator+(const SuperOperator& o) const;
  SuperOperator operator-(const SuperOperator& o) const;
  SuperOperator operator*(double s) const;
};

/// Composition: (later o first)(A) = later(first(A)).
SuperOperator compose(const SuperOperator& later, const SuperOperator& first);

// Builders for the elementary maps everything else is assembled from.
SuperOperator left_mult(const Mat& m);          // A -> m A
SuperOperator right_mult(const Mat& m);         // A -> A m
SuperOperator sandwich(const Mat& l, const Mat& r);  // A -> l A r

/// Choi matrix J = sum_{ij} S(|i><j|) (x) |i><j| (output factor first).
struct ChoiMatrix {
  int dim = 0;
  Mat matrix;  // D^2 x D^2
};

ChoiMatrix to_choi(const SuperOperator& s);
SuperOperator from_choi(const ChoiMatrix& j);

/// Estimator settings for the (1->1) norm.
struct NormEffort {
  int restarts = 32;
  int max_iter = 200;
  double tol = 1e-9;
  std::uint64_t seed = 20240831ull;
};

struct NormEstimate {
  double lower = 0.0;  // best objective found by alternating optimization
  double upper = 0.0;  // certified: sqrt(D) * spectral_norm(transfer)
};

/// Two-sided estimate of ||S||_{1->1} = sup_{||A||_1 = 1} ||S(A)||_1. The
/// lower estimate optimizes over rank-one inputs |psi><phi| (the extreme
/// points of the trace-norm unit ball); the upper bound is certified via
/// ||X||_1 <= sqrt(D) ||X||_2.
NormEstimate one_to_one_norm(const SuperOperator& s, const NormEffort& effort = {});

/// Embed a map acting on `support` (ordered, distinct sites) into the full
/// lattice of `n_sites` factors of dimension `local_dim`, acting as the
/// identity elsewhere. Basis ordering is site-index lexicographic (site 0 is
/// the most significant factor).
SuperOperator embed_local(const SuperOperator& s, const std::vector<int>& support, int n_sites,
                          int local_dim);

/// Embed an operator on `support` into the full lattice (identity padding).
Mat embed_operator(const Mat& op, const std::vector<int>& support, int n_sites, int local_dim);

}  // namespace openslt
