#include "openslt/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace openslt {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("partial_trace: factor dimensions must be positive");
    total *= d;
  }
  if (m.rows() != m.cols() || m.rows() != total)
    throw std::invalid_argument("partial_trace: matrix side does not match factor dimensions");

  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int idx : keep) {
    if (idx < 0 || idx >= n) throw std::invalid_argument("partial_trace: keep index out of range");
    kept[idx] = true;
  }

  long kept_dim = 1, traced_dim = 1;
  for (int f = 0; f < n; ++f) (kept[f] ? kept_dim : traced_dim) *= dims[f];

  // Strides of each factor in the composite (lexicographic, factor 0 most
  // significant) and in the kept sub-space.
  std::vector<long> stride(n), kept_stride(n, 0);
  long s = 1;
  for (int f = n - 1; f >= 0; --f) {
    stride[f] = s;
    s *= dims[f];
  }
  long ks = 1;
  for (int f = n - 1; f >= 0; --f) {
    if (kept[f]) {
      kept_stride[f] = ks;
      ks *= dims[f];
    }
  }

  Mat out = Mat::Zero(kept_dim, kept_dim);
  // Walk all (row, col) pairs that agree on the traced factors.
  std::vector<int> digits_r(n, 0), digits_c(n, 0);
  for (long r = 0; r < total; ++r) {
    long rr = r;
    for (int f = 0; f < n; ++f) {
      digits_r[f] = static_cast<int>(rr / stride[f]);
      rr %= stride[f];
    }
    long out_r = 0;
    for (int f = 0; f < n; ++f)
      if (kept[f]) out_r += digits_r[f] * kept_stride[f];
    for (long c = 0; c < total; ++c) {
      long cc = c;
      bool diagonal_on_traced = true;
      long out_c = 0;
      for (int f = 0; f < n; ++f) {
        digits_c[f] = static_cast<int>(cc / stride[f]);
        cc %= stride[f];
        if (kept[f])
          out_c += digits_c[f] * kept_stride[f];
        else if (digits_c[f] != digits_r[f])
          diagonal_on_traced = false;
      }
      if (diagonal_on_traced) out(out_r, out_c) += m(r, c);
    }
  }
  return out;
}

HermEig herm_eig(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("herm_eig: matrix must be square");
  const double scale = m.norm();
  if (hermiticity_defect(m) > tol * std::max(scale, 1.0))
    throw std::invalid_argument("herm_eig: input is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Mat> solver((m + m.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Mat expm(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  return m.exp();
}

Mat psd_sqrt(const Mat& m, double tol) {
  HermEig eig = herm_eig(m, tol);
  const double floor = -tol * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Eigen::VectorXd roots(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] < floor)
      throw std::invalid_argument("psd_sqrt: input is not positive semidefinite");
    roots[i] = std::sqrt(std::max(eig.values[i], 0.0));
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

Vec vec(const Mat& m) {
  Vec v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[k++] = m(i, j);
  return v;
}

Mat unvec(const Vec& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unvec: length does not match requested shape");
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = v[k++];
  return m;
}

Mat unvec(const Vec& v, int dim) { return unvec(v, dim, dim); }

static Eigen::VectorXd singular_values(const Mat& a) {
  if (a.rows() <= 32 && a.cols() <= 32) return Eigen::JacobiSVD<Mat>(a).singularValues();
  return Eigen::BDCSVD<Mat>(a).singularValues();
}

double trace_norm(const Mat& a) { return singular_values(a).sum(); }

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)[0];
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, Cplx(0, -1), Cplx(0, 1), 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Mat sigma_minus() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

Mat identity(int dim) { return Mat::Identity(dim, dim); }

}  // namespace openslt
