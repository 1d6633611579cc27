#include "openslt/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace openslt {

GeneratorSource local_source(const LocalTerm& term, const KLocalLiouvillian& model) {
  GeneratorSource src;
  src.dim = term.support_dim(model.lattice.local_dim);
  const int local_dim = model.lattice.local_dim;
  src.at = [&term, local_dim](double s) { return generator_at(term, s, local_dim); };
  term.collect_breakpoints(0.0, std::numeric_limits<double>::infinity(), src.breakpoints);
  std::sort(src.breakpoints.begin(), src.breakpoints.end());
  return src;
}

GeneratorSource global_source(const KLocalLiouvillian& model) {
  GeneratorSource src;
  src.dim = static_cast<int>(model.lattice.dim());
  src.at = [&model](double s) { return model.global_generator_at(s); };
  src.breakpoints = model.breakpoints(0.0, std::numeric_limits<double>::infinity());
  return src;
}

namespace {

// Product of n exponential-midpoint substeps over [a, b].
Mat midpoint_product(const GeneratorSource& source, double a, double b, long n) {
  const double h = (b - a) / n;
  const Eigen::Index side = static_cast<Eigen::Index>(source.dim) * source.dim;
  Mat acc = Mat::Identity(side, side);
  for (long k = 0; k < n; ++k) {
    const double mid = a + (k + 0.5) * h;
    acc = expm(h * source.at(mid).transfer) * acc;
  }
  return acc;
}

Mat evolve_segment(const GeneratorSource& source, double a, double b, double tol) {
  Mat prev = midpoint_product(source, a, b, 1);
  double prev_diff = std::numeric_limits<double>::infinity();
  for (long n = 2; n <= (1L << 22); n *= 2) {
    Mat next = midpoint_product(source, a, b, n);
    const double diff = (next - prev).norm();
    if (diff < tol) return next;
    // Second-order halving should shrink the difference ~4x per step; once it
    // stops shrinking at a tiny relative level, rounding noise dominates and
    // further refinement only accumulates it.
    if (diff >= 0.5 * prev_diff && diff < 1e-9 * std::max(1.0, next.norm())) return next;
    prev = std::move(next);
    prev_diff = diff;
  }
  throw std::runtime_error(
      "evolve: integrator failed to converge (pathological generator or tolerance too tight)");
}

}  // namespace

SuperOperator evolve(const GeneratorSource& source, double s, double t, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("evolve: tolerance must be positive");
  if (t < s) throw std::invalid_argument("evolve: requires s <= t");
  const Eigen::Index side = static_cast<Eigen::Index>(source.dim) * source.dim;
  if (t == s) return SuperOperator::identity_map(source.dim);

  std::vector<double> cuts;
  for (double b : source.breakpoints)
    if (b > s && b < t) cuts.push_back(b);
  cuts.insert(cuts.begin(), s);
  cuts.push_back(t);

  Mat acc = Mat::Identity(side, side);
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    if (b - a < 1e-15) continue;
    acc = evolve_segment(source, a, b, tol * (b - a) / (t - s)) * acc;
  }
  return SuperOperator(source.dim, std::move(acc));
}

SliceGrid slice_grid(const KLocalLiouvillian& model, double t, int m, bool averaged, double tol) {
  if (m < 1) throw std::invalid_argument("slice_grid: slice count must be at least 1");
  SliceGrid grid;
  grid.t = t;
  grid.m = m;
  grid.averaged = averaged;
  grid.tol = tol;
  grid.lattice = model.lattice;
  grid.local.resize(model.term_count());
  grid.supports.resize(model.term_count());
  for (int i = 0; i < model.term_count(); ++i) {
    grid.supports[i] = model.terms[i].support;
    grid.local[i].reserve(m);
    const GeneratorSource src = local_source(model.terms[i], model);
    for (int j = 1; j <= m; ++j) {
      if (averaged) {
        const SuperOperator avg =
            averaged_generator(model.terms[i], j, m, t, model.lattice.local_dim);
        grid.local[i].push_back(SuperOperator(avg.dim, expm((t / m) * avg.transfer)));
      } else {
        grid.local[i].push_back(evolve(src, t * (j - 1) / m, t * j / m, tol));
      }
    }
  }
  return grid;
}

SliceGrid coarsen_grid(const SliceGrid& fine, int m) {
  if (m < 1 || fine.m % m != 0)
    throw std::invalid_argument("coarsen_grid: target slice count must divide the fine count");
  SliceGrid coarse;
  coarse.t = fine.t;
  coarse.m = m;
  coarse.averaged = fine.averaged;
  coarse.tol = fine.tol;
  coarse.lattice = fine.lattice;
  coarse.supports = fine.supports;
  coarse.local.resize(fine.term_count());
  const int stride = fine.m / m;
  for (int i = 0; i < fine.term_count(); ++i)
    for (int j = 0; j < m; ++j) {
      SuperOperator acc = fine.local[i][j * stride];
      for (int s = 1; s < stride; ++s) acc = compose(fine.local[i][j * stride + s], acc);
      coarse.local[i].push_back(std::move(acc));
    }
  return coarse;
}

Mat reference_state_evolution(const KLocalLiouvillian& model, const Mat& rho0, double t,
                              double tol) {
  const long d = model.lattice.dim();
  if (rho0.rows() != d || rho0.cols() != d)
    throw std::invalid_argument("reference_state_evolution: state dimension mismatch");
  if (hermiticity_defect(rho0) > 1e-9 * std::max(1.0, rho0.norm()))
    throw std::invalid_argument("reference_state_evolution: state must be Hermitian");
  if (std::abs(rho0.trace() - Cplx(1, 0)) > 1e-9)
    throw std::invalid_argument("reference_state_evolution: state must have unit trace");
  const SuperOperator prop = evolve(global_source(model), 0.0, t, tol);
  return prop.apply(rho0);
}

}  // namespace openslt
