#include "openslt/instrument.hpp"

#include <algorithm>
#include <cmath>

namespace openslt {

bool is_hptp(const SuperOperator& s, double tol) {
  const ChoiMatrix j = to_choi(s);
  const double scale = std::max(1.0, j.matrix.norm());
  if (hermiticity_defect(j.matrix) > tol * scale) return false;
  const Mat marginal = partial_trace(j.matrix, {s.dim, s.dim}, {1});
  return max_abs(marginal - Mat::Identity(s.dim, s.dim)) <= tol;
}

Mat CpntpMap::gauge() const {
  Mat g = Mat::Zero(dim, dim);
  for (const Mat& k : kraus) g += k.adjoint() * k;
  return g;
}

double CpntpMap::max_gauge_eig() const {
  if (kraus.empty()) return 0.0;
  const HermEig eig = herm_eig(gauge());
  return std::max(0.0, eig.values.maxCoeff());
}

Mat CpntpMap::apply(const Mat& rho) const {
  Mat out = Mat::Zero(dim, dim);
  for (const Mat& k : kraus) out += k * rho * k.adjoint();
  return out;
}

SuperOperator CpntpMap::to_superop() const {
  SuperOperator acc = SuperOperator::zero_map(dim);
  for (const Mat& k : kraus) acc = acc + sandwich(k, k.adjoint());
  return acc;
}

CpntpMap CpntpMap::scaled(double factor) const {
  CpntpMap out{dim, kraus};
  const double root = std::sqrt(factor);
  for (Mat& k : out.kraus) k *= root;
  return out;
}

CpntpMap CpntpMap::embedded(const std::vector<int>& support, const Lattice& lattice) const {
  CpntpMap out;
  out.dim = static_cast<int>(lattice.dim());
  for (const Mat& k : kraus)
    out.kraus.push_back(embed_operator(k, support, lattice.sites, lattice.local_dim));
  return out;
}

HptpSplit hptp_split(const SuperOperator& s, double tol) {
  if (!is_hptp(s, tol)) throw std::invalid_argument("hptp_split: input is not HPTP");
  const ChoiMatrix j = to_choi(s);
  const HermEig eig = herm_eig((j.matrix + j.matrix.adjoint()) / 2.0, 1.0);
  const double abs_trace = eig.values.cwiseAbs().sum();
  const double cutoff = 1e-12 * std::max(1.0, abs_trace);

  HptpSplit split;
  split.original = s;
  split.positive_part.dim = s.dim;
  split.negative_part.dim = s.dim;
  const int d = s.dim;
  for (Eigen::Index a = 0; a < eig.values.size(); ++a) {
    const double lambda = eig.values[a];
    if (std::abs(lambda) <= cutoff) continue;
    // Choi eigenvector v -> Kraus K with K(row, col) = v[row * D + col].
    const Vec v = eig.vectors.col(a);
    Mat k(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) k(r, c) = v[static_cast<Eigen::Index>(r) * d + c];
    k *= std::sqrt(std::abs(lambda));
    (lambda > 0 ? split.positive_part : split.negative_part).kraus.push_back(std::move(k));
  }
  return split;
}

namespace {

// Deterministic extension of an isometry (orthonormal columns) to a unitary:
// Gram-Schmidt against canonical basis vectors in index order, pivoting on a
// norm threshold.
Mat complete_isometry(const Mat& isometry, double pivot_tol = 1e-8) {
  const Eigen::Index n = isometry.rows();
  const Eigen::Index have = isometry.cols();
  Mat u(n, n);
  u.leftCols(have) = isometry;
  Eigen::Index filled = have;
  for (Eigen::Index cand = 0; cand < n && filled < n; ++cand) {
    Vec v = Vec::Unit(n, cand);
    for (int pass = 0; pass < 2; ++pass)
      v -= u.leftCols(filled) * (u.leftCols(filled).adjoint() * v);
    const double norm = v.norm();
    if (norm > pivot_tol) u.col(filled++) = v / norm;
  }
  if (filled < n) throw std::runtime_error("complete_isometry: failed to span the space");
  return u;
}

}  // namespace

DilatedInstrument dilate(const CpntpMap& map, double tol) {
  DilatedInstrument out;
  out.dim = map.dim;
  const int d_x = static_cast<int>(map.kraus.size());
  out.ancilla_dim = d_x + 1;

  const double g = map.max_gauge_eig();
  out.gauge_scalar = 1.0;
  out.kraus = map.kraus;
  if (g > 1.0) {
    out.gauge_scalar = g;
    const double root = std::sqrt(g);
    for (Mat& k : out.kraus) k /= root;
  }

  Mat gauge = Mat::Zero(map.dim, map.dim);
  for (const Mat& k : out.kraus) gauge += k.adjoint() * k;
  const HermEig gauge_eig = herm_eig(gauge, 1.0);
  if (gauge_eig.values.minCoeff() < -tol)
    throw std::invalid_argument("dilate: gauge has a negative eigenvalue (corrupt Kraus set)");
  out.k_inf = psd_sqrt(Mat::Identity(map.dim, map.dim) - gauge, 1e-8);

  // First block column stacks the sub-normalized Kraus operators topped by
  // k_inf; Gram-Schmidt completes the isometry to a unitary. The completion
  // never affects instrument statistics: the ancilla starts in level 0, so
  // only this block column is ever read.
  const Eigen::Index side = static_cast<Eigen::Index>(out.ancilla_dim) * map.dim;
  Mat stack(side, map.dim);
  for (int b = 0; b < d_x; ++b) stack.middleRows(static_cast<Eigen::Index>(b) * map.dim, map.dim) = out.kraus[b];
  stack.middleRows(static_cast<Eigen::Index>(d_x) * map.dim, map.dim) = out.k_inf;
  out.unitary = complete_isometry(stack);
  return out;
}

Mat DilatedInstrument::projector_keep() const {
  const Eigen::Index side = static_cast<Eigen::Index>(ancilla_dim) * dim;
  Mat p = Mat::Zero(side, side);
  p.topLeftCorner(side - dim, side - dim) =
      Mat::Identity(side - dim, side - dim);
  return p;
}

Mat DilatedInstrument::projector_restart() const {
  const Eigen::Index side = static_cast<Eigen::Index>(ancilla_dim) * dim;
  Mat p = Mat::Zero(side, side);
  p.bottomRightCorner(dim, dim) = Mat::Identity(dim, dim);
  return p;
}

DilatedInstrument embed_instrument(const DilatedInstrument& instr, const std::vector<int>& support,
                                   const Lattice& lattice) {
  DilatedInstrument out;
  const long d_full = lattice.dim();
  out.dim = static_cast<int>(d_full);
  out.ancilla_dim = instr.ancilla_dim;
  out.gauge_scalar = instr.gauge_scalar;
  for (const Mat& k : instr.kraus)
    out.kraus.push_back(embed_operator(k, support, lattice.sites, lattice.local_dim));
  out.k_inf = embed_operator(instr.k_inf, support, lattice.sites, lattice.local_dim);

  // U_full = sum_{e,e'} |e'><e| (x) embed(U_block(e', e)), with the ancilla as
  // the leading factor on both sides.
  const Eigen::Index side = static_cast<Eigen::Index>(out.ancilla_dim) * d_full;
  out.unitary = Mat::Zero(side, side);
  const int ds = instr.dim;
  for (int eo = 0; eo < instr.ancilla_dim; ++eo)
    for (int ei = 0; ei < instr.ancilla_dim; ++ei) {
      const Mat block = instr.unitary.block(static_cast<Eigen::Index>(eo) * ds,
                                            static_cast<Eigen::Index>(ei) * ds, ds, ds);
      if (block.isZero(0.0)) continue;
      out.unitary.block(static_cast<Eigen::Index>(eo) * d_full,
                        static_cast<Eigen::Index>(ei) * d_full, d_full, d_full) =
          embed_operator(block, support, lattice.sites, lattice.local_dim);
    }
  return out;
}

InstrumentOutcome apply_exact(const DilatedInstrument& instr, const Mat& rho) {
  const int d = instr.dim;
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("apply_exact: state dimension mismatch");
  if (hermiticity_defect(rho) > 1e-9 * std::max(1.0, rho.norm()))
    throw std::invalid_argument("apply_exact: state must be Hermitian");
  if (std::abs(rho.trace() - Cplx(1, 0)) > 1e-9)
    throw std::invalid_argument("apply_exact: state must have unit trace");

  // |0><0|_anc (x) rho evolved by the dilation unitary; with the ancilla in
  // level 0 only the first block column of U contributes.
  const Eigen::Index side = static_cast<Eigen::Index>(instr.ancilla_dim) * d;
  Mat joint = Mat::Zero(side, side);
  joint.topLeftCorner(d, d) = rho;
  const Mat evolved = instr.unitary * joint * instr.unitary.adjoint();
  const Mat keep = instr.projector_keep();
  const Mat projected = keep * evolved * keep;

  // Trace out the ancilla (leading factor).
  InstrumentOutcome out;
  const Mat raw = partial_trace(projected, {instr.ancilla_dim, d}, {1});
  out.p1 = raw.trace().real();
  out.scaled_output = instr.gauge_scalar * raw;
  if (out.p1 >= 1e-14) out.post_state = raw / out.p1;
  return out;
}

SampleResult sample_outcome(const DilatedInstrument& instr, const Mat& rho, Rng& rng) {
  const InstrumentOutcome exact = apply_exact(instr, rho);
  SampleResult res;
  if (rng.uniform() < exact.p1) {
    res.outcome = 1;
    res.post_state = exact.post_state;
  } else {
    res.outcome = 2;
  }
  return res;
}

WilsonEstimate wilson(long long n_success, long long n_trials, double z) {
  if (n_trials < 1) throw std::invalid_argument("wilson: trial count must be at least 1");
  if (n_success < 0 || n_success > n_trials)
    throw std::invalid_argument("wilson: success count out of range");
  if (!(z > 0)) throw std::invalid_argument("wilson: z must be positive");
  WilsonEstimate w;
  w.n_trials = n_trials;
  w.n_success = n_success;
  w.z = z;
  w.p_hat = static_cast<double>(n_success) / static_cast<double>(n_trials);
  const double n = static_cast<double>(n_trials);
  const double z2n = z * z / n;
  w.point = (w.p_hat + 0.5 * z2n) / (1.0 + z2n);
  w.half_width =
      z * std::sqrt(w.p_hat * (1.0 - w.p_hat) / n + z * z / (4.0 * n * n)) / (1.0 + z2n);
  return w;
}

long long trials_needed(double eps, double z) {
  if (!(eps > 0) || !(z > 0)) throw std::invalid_argument("trials_needed: eps, z must be positive");
  const double c = z * z / (4.0 * eps * eps);
  const double root = 0.5 * (c + std::sqrt(c * c + 4.0 * c * z * z));
  long long n = std::max<long long>(1, static_cast<long long>(std::ceil(root)));
  auto satisfies = [&](long long nt) {
    const double x = static_cast<double>(nt);
    return x * x / (x + z * z) >= c;
  };
  while (!satisfies(n)) ++n;
  while (n > 1 && satisfies(n - 1)) --n;
  return n;
}

}  // namespace openslt
