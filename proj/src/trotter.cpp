#include "openslt/trotter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "openslt/rng.hpp"

namespace openslt {

SuperOperator slt_product(const SliceGrid& grid) {
  const long d = grid.lattice.dim();
  SuperOperator acc = SuperOperator::identity_map(static_cast<int>(d));
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.term_count(); ++i) {
      const SuperOperator emb =
          embed_local(grid.local[i][j], grid.supports[i], grid.lattice.sites,
                      grid.lattice.local_dim);
      acc = compose(emb, acc);
    }
  return acc;
}

double slt_error_bound(const BoundInputs& in, BoundForm form) {
  if (in.term_count < 1 || in.m < 1) throw std::invalid_argument("slt_error_bound: K, m >= 1");
  const double k = in.term_count;
  const double prefactor = k * k * in.beta * in.beta * in.t * in.t / in.m;
  const double dt_beta = in.beta * in.t / in.m;
  if (form == BoundForm::Measured) {
    const double min_term = std::min<double>(in.m, k * in.n_tilde);
    const double exponent = (3.0 + k * (2.0 + in.n_tilde) + k * min_term + in.n_hat) * dt_beta;
    return prefactor * std::exp(exponent);
  }
  const double exponent = (3.0 + (3.0 + in.c_tilde) * k + in.c_tilde * k * k) * dt_beta;
  return prefactor * std::exp(exponent) * std::exp((k + k * k) * in.t_id * in.beta);
}

StepCount required_slice_count(double eps, int term_count, double beta_value, double t,
                               double t_id, double c_tilde, StepRule rule) {
  if (!(eps > 0)) throw std::invalid_argument("required_slice_count: eps must be positive");
  if (term_count < 1) throw std::invalid_argument("required_slice_count: K >= 1");
  const double k = term_count;
  const double growth = std::exp((k + k * k) * t_id * beta_value);
  const double coeff = rule == StepRule::Validated ? 2.0 * k * k : 2.0 * k;

  StepCount out;
  out.m_real = coeff * beta_value * beta_value * t * t * growth / eps;
  if (!std::isfinite(out.m_real) || out.m_real >= 9.0e18) {
    out.m = std::numeric_limits<long long>::max();
  } else {
    out.m = std::max<long long>(1, static_cast<long long>(std::ceil(out.m_real)));
  }
  const double eps_max =
      2.0 * k * k * beta_value * t * std::log(2.0) * growth / (3.0 + (3.0 + c_tilde) * k + c_tilde * k * k);
  out.eps_admissible = eps <= eps_max;
  return out;
}

NormEstimate empirical_slt_error(const KLocalLiouvillian& model, double t, int m, double tol,
                                 const NormEffort& effort) {
  const SuperOperator reference = evolve(global_source(model), 0.0, t, tol);
  const SliceGrid grid = slice_grid(model, t, m, false, tol);
  return empirical_slt_error_against(reference, grid, effort);
}

NormEstimate empirical_slt_error_against(const SuperOperator& reference, const SliceGrid& grid,
                                         const NormEffort& effort) {
  return one_to_one_norm(reference - slt_product(grid), effort);
}

DecompositionDiagnostics decomposition_diagnostics(const SliceGrid& grid,
                                                   const KLocalLiouvillian& model,
                                                   double beta_value, int pair_samples,
                                                   const NormEffort& effort, double pair_tol) {
  DecompositionDiagnostics diag;
  const long d = grid.lattice.dim();
  const int big_k = grid.term_count();
  const double dt = grid.dt();

  // Partial products of the decomposition and per-slice global propagators.
  SuperOperator partial = SuperOperator::identity_map(static_cast<int>(d));
  diag.partial_product_norms.push_back(one_to_one_norm(partial, effort).lower);
  std::vector<SuperOperator> slice_products;
  for (int j = 0; j < grid.m; ++j) {
    SuperOperator slice = SuperOperator::identity_map(static_cast<int>(d));
    for (int i = 0; i < big_k; ++i) {
      const SuperOperator emb = embed_local(grid.local[i][j], grid.supports[i],
                                            grid.lattice.sites, grid.lattice.local_dim);
      slice = compose(emb, slice);
    }
    slice_products.push_back(slice);
    partial = compose(slice, partial);
    diag.partial_product_norms.push_back(one_to_one_norm(partial, effort).lower);
  }

  const GeneratorSource global = global_source(model);
  double max_split = 0.0;
  for (int j = 1; j <= grid.m; ++j) {
    const SuperOperator slice_ref =
        evolve(global, grid.t * (j - 1) / grid.m, grid.t * j / grid.m, grid.tol);
    diag.slice_propagator_norms.push_back(one_to_one_norm(slice_ref, effort).lower);
    max_split =
        std::max(max_split, one_to_one_norm(slice_ref - slice_products[j - 1], effort).lower);
  }
  diag.max_slice_split_error = max_split;

  const DivisibilityProfile prof = divisibility_profile(grid);
  const double min_term = std::min<double>(grid.m, static_cast<double>(big_k) * prof.n_tilde);
  diag.envelope_bound =
      grid.m * std::exp((min_term + prof.n_tilde) * big_k * beta_value * dt) * max_split;
  diag.per_slice_bound =
      big_k * beta_value * beta_value * dt * dt * std::exp((3.0 + 2.0 * big_k) * beta_value * dt);

  // Pairwise commutator suprema on a time grid, full-space norms.
  const int tg = 5;
  std::vector<std::vector<SuperOperator>> embedded(big_k);
  for (int i = 0; i < big_k; ++i)
    for (int p = 0; p < tg; ++p)
      embedded[i].push_back(embed_local(generator_at(model.terms[i], grid.t * p / (tg - 1),
                                                     grid.lattice.local_dim),
                                        model.terms[i].support, grid.lattice.sites,
                                        grid.lattice.local_dim));
  diag.commutator_sup.assign(big_k, std::vector<double>(big_k, 0.0));
  for (int a = 0; a < big_k; ++a)
    for (int b = 0; b < big_k; ++b) {
      double sup = 0.0;
      for (int pa = 0; pa < tg; ++pa)
        for (int pb = 0; pb < tg; ++pb) {
          const Mat comm = embedded[a][pa].transfer * embedded[b][pb].transfer -
                           embedded[b][pb].transfer * embedded[a][pa].transfer;
          sup = std::max(sup,
                         one_to_one_norm(SuperOperator(static_cast<int>(d), comm), effort).lower);
        }
      diag.commutator_sup[a][b] = sup;
    }

  // Direct checks of the two-generator splitting inequality on term pairs.
  Rng rng(0x5917ull);
  for (int a = 0; a < big_k; ++a)
    for (int b = 0; b < big_k; ++b) {
      if (a == b) continue;
      for (int sample = 0; sample < pair_samples; ++sample) {
        // Short windows keep the check sharp (the right side grows as
        // (t-s)^2 e^{c(t-s)}) and the window propagators cheap.
        const double len = (0.05 + 0.3 * rng.uniform()) * grid.t;
        const double s = (grid.t - len) * rng.uniform();
        const double t1 = s + len;

        KLocalLiouvillian pair_model;
        pair_model.lattice = model.lattice;
        pair_model.k = model.k;
        pair_model.terms = {model.terms[a], model.terms[b]};
        const SuperOperator joint = evolve(global_source(pair_model), s, t1, pair_tol);

        KLocalLiouvillian single_a{model.lattice, {model.terms[a]}, model.k};
        KLocalLiouvillian single_b{model.lattice, {model.terms[b]}, model.k};
        const SuperOperator prop_a = evolve(global_source(single_a), s, t1, pair_tol);
        const SuperOperator prop_b = evolve(global_source(single_b), s, t1, pair_tol);

        std::vector<SuperOperator> gen_a, gen_b;
        for (int p = 0; p < tg; ++p) {
          const double u = s + (t1 - s) * p / (tg - 1);
          gen_a.push_back(embed_local(generator_at(model.terms[a], u, grid.lattice.local_dim),
                                      model.terms[a].support, grid.lattice.sites,
                                      grid.lattice.local_dim));
          gen_b.push_back(embed_local(generator_at(model.terms[b], u, grid.lattice.local_dim),
                                      model.terms[b].support, grid.lattice.sites,
                                      grid.lattice.local_dim));
        }
        double sup_comm = 0.0, sup_a = 0.0, sup_b = 0.0;
        for (int p = 0; p < tg; ++p) {
          sup_a = std::max(sup_a, one_to_one_norm(gen_a[p], effort).lower);
          sup_b = std::max(sup_b, one_to_one_norm(gen_b[p], effort).lower);
          for (int q = 0; q < tg; ++q) {
            const Mat comm = gen_a[p].transfer * gen_b[q].transfer -
                             gen_b[q].transfer * gen_a[p].transfer;
            sup_comm = std::max(
                sup_comm, one_to_one_norm(SuperOperator(static_cast<int>(d), comm), effort).lower);
          }
        }

        DecompositionDiagnostics::PairSplitCheck check;
        check.term_a = a;
        check.term_b = b;
        check.s = s;
        check.t = t1;
        check.lhs = one_to_one_norm(joint - compose(prop_a, prop_b), effort).lower;
        check.rhs = 0.5 * (t1 - s) * (t1 - s) * sup_comm *
                    std::exp((t1 - s) * (3.0 * sup_a + 2.0 * sup_b));
        diag.pair_checks.push_back(check);
      }
    }
  return diag;
}

}  // namespace openslt
