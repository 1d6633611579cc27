#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace openslt {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Kronecker product; dimensions multiply.
Mat kron(const Mat& a, const Mat& b);

/// Partial trace of an operator on a tensor-product space. `dims` lists the
/// factor dimensions in tensor order (their product must equal the matrix
/// side); factors in `keep` survive, in their original order, everything else
/// is traced out. Trace is preserved: tr(out) = tr(in).
Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep);

struct HermEig {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix. Throws if the input deviates
/// from Hermiticity by more than `tol` relative to its norm.
HermEig herm_eig(const Mat& m, double tol = 1e-10);

/// Matrix exponential (scaling-and-squaring with a Pade core).
Mat expm(const Mat& m);

/// Hermitian PSD square root. Eigenvalues below -tol (relative) signal a
/// non-PSD input; small negatives within tolerance are clamped to zero.
Mat psd_sqrt(const Mat& m, double tol = 1e-10);

/// Column-stacking vectorization: vec(|i><j|) occupies index j*D + i.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, int rows, int cols);
Mat unvec(const Vec& v, int dim);  // square

/// Schatten norms: trace norm = sum of singular values, spectral norm =
/// largest singular value.
double trace_norm(const Mat& a);
double spectral_norm(const Mat& a);

inline Mat dagger(const Mat& a) { return a.adjoint(); }

inline double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/// Largest entry of |m - m^dagger|; zero for exactly Hermitian matrices.
inline double hermiticity_defect(const Mat& m) { return max_abs(m - m.adjoint()); }

// Fixed 2x2 constants used throughout tests and models.
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat sigma_minus();  // |0><1|
Mat identity(int dim);

}  // namespace openslt
