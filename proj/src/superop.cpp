#include "openslt/superop.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "openslt/rng.hpp"

namespace openslt {

SuperOperator::SuperOperator(int dim_, Mat transfer_) : dim(dim_), transfer(std::move(transfer_)) {
  if (dim < 1) throw std::invalid_argument("SuperOperator: dimension must be positive");
  const Eigen::Index side = static_cast<Eigen::Index>(dim) * dim;
  if (transfer.rows() != side || transfer.cols() != side)
    throw std::invalid_argument("SuperOperator: transfer matrix must be D^2 x D^2");
}

SuperOperator SuperOperator::identity_map(int dim) {
  return SuperOperator(dim, Mat::Identity(static_cast<Eigen::Index>(dim) * dim,
                                          static_cast<Eigen::Index>(dim) * dim));
}

SuperOperator SuperOperator::zero_map(int dim) {
  return SuperOperator(dim, Mat::Zero(static_cast<Eigen::Index>(dim) * dim,
                                      static_cast<Eigen::Index>(dim) * dim));
}

Mat SuperOperator::apply(const Mat& a) const {
  if (a.rows() != dim || a.cols() != dim)
    throw std::invalid_argument("SuperOperator::apply: operand dimension mismatch");
  return unvec(transfer * vec(a), dim);
}

SuperOperator SuperOperator::operator+(const SuperOperator& o) const {
  if (dim != o.dim) throw std::invalid_argument("SuperOperator: dimension mismatch");
  return SuperOperator(dim, transfer + o.transfer);
}

SuperOperator SuperOperator::operator-(const SuperOperator& o) const {
  if (dim != o.dim) throw std::invalid_argument("SuperOperator: dimension mismatch");
  return SuperOperator(dim, transfer - o.transfer);
}

SuperOperator SuperOperator::operator*(double s) const { return SuperOperator(dim, transfer * s); }

SuperOperator compose(const SuperOperator& later, const SuperOperator& first) {
  if (later.dim != first.dim) throw std::invalid_argument("compose: dimension mismatch");
  return SuperOperator(later.dim, later.transfer * first.transfer);
}

SuperOperator left_mult(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("left_mult: matrix must be square");
  return SuperOperator(static_cast<int>(m.rows()), kron(Mat::Identity(m.rows(), m.rows()), m));
}

SuperOperator right_mult(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("right_mult: matrix must be square");
  return SuperOperator(static_cast<int>(m.rows()),
                       kron(m.transpose(), Mat::Identity(m.rows(), m.rows())));
}

SuperOperator sandwich(const Mat& l, const Mat& r) {
  if (l.rows() != l.cols() || r.rows() != r.cols() || l.rows() != r.rows())
    throw std::invalid_argument("sandwich: operands must be square and same size");
  return SuperOperator(static_cast<int>(l.rows()), kron(r.transpose(), l));
}

ChoiMatrix to_choi(const SuperOperator& s) {
  const int d = s.dim;
  const Eigen::Index side = static_cast<Eigen::Index>(d) * d;
  Mat j(side, side);
  for (Eigen::Index row = 0; row < side; ++row)
    for (Eigen::Index col = 0; col < side; ++col)
      j(row, col) = s.transfer((col / d) * d + row / d, (col % d) * d + row % d);
  return ChoiMatrix{d, std::move(j)};
}

SuperOperator from_choi(const ChoiMatrix& j) {
  const int d = j.dim;
  const Eigen::Index side = static_cast<Eigen::Index>(d) * d;
  if (j.matrix.rows() != side || j.matrix.cols() != side)
    throw std::invalid_argument("from_choi: matrix must be D^2 x D^2");
  Mat t(side, side);
  for (Eigen::Index row = 0; row < side; ++row)
    for (Eigen::Index col = 0; col < side; ++col)
      t(row, col) = j.matrix((row % d) * d + col % d, (row / d) * d + col / d);
  return SuperOperator(d, std::move(t));
}

namespace {

Vec random_unit(int dim, Rng& rng) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Cplx(rng.gauss(), rng.gauss());
  const double n = v.norm();
  return n > 0 ? Vec(v / n) : Vec(Vec::Unit(dim, 0));
}

}  // namespace

NormEstimate one_to_one_norm(const SuperOperator& s, const NormEffort& effort) {
  const int d = s.dim;
  const double upper = std::sqrt(static_cast<double>(d)) * spectral_norm(s.transfer);
  const Mat adj = s.transfer.adjoint();

  double best = 0.0;
  Rng rng(effort.seed);
  for (int r = 0; r < effort.restarts; ++r) {
    Vec psi = random_unit(d, rng);
    Vec phi = random_unit(d, rng);
    double value = 0.0;
    for (int it = 0; it < effort.max_iter; ++it) {
      const Mat x = s.apply(psi * phi.adjoint());
      Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double trace_val = svd.singularValues().sum();
      if (std::abs(trace_val - value) <= effort.tol * std::max(1.0, trace_val)) {
        value = trace_val;
        break;
      }
      value = trace_val;
      // Dual certificate U with tr(U x) = ||x||_1, then ascend the
      // linearization <phi| B |psi> = tr(U S(|psi><phi|)) via its top
      // singular pair.
      const Mat cert = svd.matrixV() * svd.matrixU().adjoint();
      const Mat b = unvec(Vec(adj * vec(cert.adjoint())), d).adjoint();
      Eigen::JacobiSVD<Mat> bsvd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
      psi = bsvd.matrixV().col(0);
      phi = bsvd.matrixU().col(0);
    }
    best = std::max(best, value);
  }
  return NormEstimate{std::min(best, upper + 0.0), upper};
}

SuperOperator embed_local(const SuperOperator& s, const std::vector<int>& support, int n_sites,
                          int local_dim) {
  const int ks = static_cast<int>(support.size());
  long ds = 1;
  for (int p = 0; p < ks; ++p) ds *= local_dim;
  if (s.dim != ds) throw std::invalid_argument("embed_local: map dimension does not match support");

  std::vector<bool> in_support(n_sites, false);
  for (int site : support) {
    if (site < 0 || site >= n_sites) throw std::invalid_argument("embed_local: support out of range");
    if (in_support[site]) throw std::invalid_argument("embed_local: repeated support site");
    in_support[site] = true;
  }

  long d_full = 1;
  for (int i = 0; i < n_sites; ++i) d_full *= local_dim;
  const long d_rest = d_full / ds;

  // Site strides in the lexicographic global index (site 0 most significant).
  std::vector<long> site_stride(n_sites);
  long acc = 1;
  for (int site = n_sites - 1; site >= 0; --site) {
    site_stride[site] = acc;
    acc *= local_dim;
  }
  std::vector<int> rest_sites;
  for (int site = 0; site < n_sites; ++site)
    if (!in_support[site]) rest_sites.push_back(site);

  // global index = g(u, v): u runs over support digits (support order), v over
  // the remaining sites in increasing order.
  auto global_index = [&](long u, long v) {
    long g = 0;
    for (int p = ks - 1; p >= 0; --p) {
      g += (u % local_dim) * site_stride[support[p]];
      u /= local_dim;
    }
    for (int q = static_cast<int>(rest_sites.size()) - 1; q >= 0; --q) {
      g += (v % local_dim) * site_stride[rest_sites[q]];
      v /= local_dim;
    }
    return g;
  };

  Mat t = Mat::Zero(d_full * d_full, d_full * d_full);
  for (long u1 = 0; u1 < ds; ++u1)
    for (long u2 = 0; u2 < ds; ++u2)
      for (long a = 0; a < ds; ++a)
        for (long b = 0; b < ds; ++b) {
          const Cplx val = s.transfer(b * ds + a, u2 * ds + u1);
          if (val == Cplx(0, 0)) continue;
          for (long v1 = 0; v1 < d_rest; ++v1) {
            const long g_out_r = global_index(a, v1);
            const long g_in_r = global_index(u1, v1);
            for (long v2 = 0; v2 < d_rest; ++v2) {
              const long g_out_c = global_index(b, v2);
              const long g_in_c = global_index(u2, v2);
              t(g_out_c * d_full + g_out_r, g_in_c * d_full + g_in_r) = val;
            }
          }
        }
  return SuperOperator(static_cast<int>(d_full), std::move(t));
}

Mat embed_operator(const Mat& op, const std::vector<int>& support, int n_sites, int local_dim) {
  const int ks = static_cast<int>(support.size());
  long ds = 1;
  for (int p = 0; p < ks; ++p) ds *= local_dim;
  if (op.rows() != ds || op.cols() != ds)
    throw std::invalid_argument("embed_operator: operator dimension does not match support");

  std::vector<bool> in_support(n_sites, false);
  for (int site : support) {
    if (site < 0 || site >= n_sites)
      throw std::invalid_argument("embed_operator: support out of range");
    if (in_support[site]) throw std::invalid_argument("embed_operator: repeated support site");
    in_support[site] = true;
  }

  long d_full = 1;
  for (int i = 0; i < n_sites; ++i) d_full *= local_dim;
  const long d_rest = d_full / ds;

  std::vector<long> site_stride(n_sites);
  long acc = 1;
  for (int site = n_sites - 1; site >= 0; --site) {
    site_stride[site] = acc;
    acc *= local_dim;
  }
  std::vector<int> rest_sites;
  for (int site = 0; site < n_sites; ++site)
    if (!in_support[site]) rest_sites.push_back(site);

  auto global_index = [&](long u, long v) {
    long g = 0;
    for (int p = ks - 1; p >= 0; --p) {
      g += (u % local_dim) * site_stride[support[p]];
      u /= local_dim;
    }
    for (int q = static_cast<int>(rest_sites.size()) - 1; q >= 0; --q) {
      g += (v % local_dim) * site_stride[rest_sites[q]];
      v /= local_dim;
    }
    return g;
  };

  Mat out = Mat::Zero(d_full, d_full);
  for (long u1 = 0; u1 < ds; ++u1)
    for (long u2 = 0; u2 < ds; ++u2) {
      const Cplx val = op(u1, u2);
      if (val == Cplx(0, 0)) continue;
      for (long v = 0; v < d_rest; ++v) out(global_index(u1, v), global_index(u2, v)) = val;
    }
  return out;
}

}  // namespace openslt
