#include "openslt/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "openslt/rng.hpp"

namespace openslt {

TimeMatrix::TimeMatrix(Mat static_part) {
  parts.push_back(std::move(static_part));
  coeffs.push_back(TimeFunction::constant(1.0));
}

TimeMatrix::TimeMatrix(std::vector<Mat> parts_, std::vector<TimeFunction> coeffs_)
    : parts(std::move(parts_)), coeffs(std::move(coeffs_)) {
  if (parts.empty() || parts.size() != coeffs.size())
    throw std::invalid_argument("TimeMatrix: one coefficient per part required");
  for (const auto& p : parts)
    if (p.rows() != parts.front().rows() || p.cols() != parts.front().cols())
      throw std::invalid_argument("TimeMatrix: parts must share a shape");
}

Mat TimeMatrix::at(double t) const {
  Mat out = Mat::Zero(parts.front().rows(), parts.front().cols());
  for (size_t c = 0; c < parts.size(); ++c) out += coeffs[c](t) * parts[c];
  return out;
}

bool TimeMatrix::is_static() const {
  for (const auto& f : coeffs)
    if (!f.is_constant()) return false;
  return true;
}

void TimeMatrix::collect_breakpoints(double t0, double t1, std::vector<double>& out) const {
  for (const auto& f : coeffs) f.collect_breakpoints(t0, t1, out);
}

int LocalTerm::support_dim(int local_dim) const {
  int d = 1;
  for (size_t i = 0; i < support.size(); ++i) d *= local_dim;
  return d;
}

void LocalTerm::collect_breakpoints(double t0, double t1, std::vector<double>& out) const {
  if (is_gksl()) {
    const auto& g = std::get<GkslTerm>(form);
    g.hamiltonian.collect_breakpoints(t0, t1, out);
    for (const auto& l : g.lindblad_ops) l.collect_breakpoints(t0, t1, out);
    for (const auto& r : g.rates) r.collect_breakpoints(t0, t1, out);
  } else {
    for (const auto& f : std::get<RawTerm>(form).coeffs) f.collect_breakpoints(t0, t1, out);
  }
}

SuperOperator generator_at(const LocalTerm& term, double s, int local_dim) {
  if (s < 0) throw std::invalid_argument("generator_at: time out of domain");
  const int d = term.support_dim(local_dim);
  if (term.is_gksl()) {
    const auto& g = std::get<GkslTerm>(term.form);
    const Mat id = Mat::Identity(d, d);
    Mat t = Mat::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
    if (!g.hamiltonian.parts.empty()) {
      const Mat h = g.hamiltonian.at(s);
      t += Cplx(0, -1) * (kron(id, h) - kron(h.transpose(), id));
    }
    for (size_t j = 0; j < g.lindblad_ops.size(); ++j) {
      const Mat l = g.lindblad_ops[j].at(s);
      const Mat ldl = l.adjoint() * l;
      const double rate = g.rates[j](s);
      t += rate * (kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
    }
    return SuperOperator(d, std::move(t));
  }
  const auto& raw = std::get<RawTerm>(term.form);
  SuperOperator acc = SuperOperator::zero_map(d);
  for (size_t c = 0; c < raw.components.size(); ++c) acc = acc + raw.components[c] * raw.coeffs[c](s);
  return acc;
}

SuperOperator KLocalLiouvillian::global_generator_at(double s) const {
  const long d = lattice.dim();
  SuperOperator acc = SuperOperator::zero_map(static_cast<int>(d));
  for (const auto& term : terms)
    acc = acc + embed_local(generator_at(term, s, lattice.local_dim), term.support, lattice.sites,
                            lattice.local_dim);
  return acc;
}

std::vector<double> KLocalLiouvillian::breakpoints(double t0, double t1) const {
  std::vector<double> out;
  for (const auto& term : terms) term.collect_breakpoints(t0, t1, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            out.end());
  return out;
}

ValidationReport validate_model(const KLocalLiouvillian& model, double t_max, int grid) {
  ValidationReport report;
  auto fail = [&](int term, std::string what) {
    report.ok = false;
    report.issues.push_back({term, std::move(what)});
  };

  if (model.lattice.sites < 1) fail(-1, "lattice must have at least one site");
  if (model.lattice.local_dim < 2) fail(-1, "local dimension must be at least 2");
  if (model.terms.empty()) fail(-1, "model must have at least one term");
  if (model.lattice.dim() > 4096) fail(-1, "global dimension exceeds the dense-storage cap");
  const double support_patterns = std::pow(static_cast<double>(model.lattice.sites), model.k);
  if (static_cast<double>(model.term_count()) > support_patterns)
    fail(-1, "more terms than distinct k-site supports");

  const int max_lindblads =
      static_cast<int>(std::pow(static_cast<double>(model.lattice.local_dim), 2 * model.k) + 0.5);

  for (int i = 0; i < model.term_count(); ++i) {
    const auto& term = model.terms[i];
    if (term.support.empty() || static_cast<int>(term.support.size()) > model.k)
      fail(i, "support size violates the locality bound");
    std::vector<int> sorted = term.support;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(i, "support sites must be distinct");
    for (int s : term.support)
      if (s < 0 || s >= model.lattice.sites) fail(i, "support site out of range");

    const int d = term.support_dim(model.lattice.local_dim);
    if (term.is_gksl()) {
      const auto& g = std::get<GkslTerm>(term.form);
      report.lindblad_counts.push_back(static_cast<int>(g.lindblad_ops.size()));
      if (g.lindblad_ops.size() != g.rates.size()) {
        fail(i, "one rate per Lindblad operator required");
        continue;
      }
      if (static_cast<int>(g.lindblad_ops.size()) > max_lindblads)
        fail(i, "too many Lindblad operators for the locality bound");
      if (!g.hamiltonian.parts.empty() && g.hamiltonian.dim() != d)
        fail(i, "Hamiltonian dimension does not match support");
      for (const auto& l : g.lindblad_ops)
        if (l.dim() != d) fail(i, "Lindblad operator dimension does not match support");
      for (int p = 0; p < grid; ++p) {
        const double s = grid == 1 ? 0.0 : t_max * p / (grid - 1);
        if (!g.hamiltonian.parts.empty()) {
          const Mat h = g.hamiltonian.at(s);
          if (hermiticity_defect(h) > 1e-10 * std::max(1.0, h.norm())) {
            fail(i, "Hamiltonian is not Hermitian at sampled time");
            break;
          }
        }
      }
    } else {
      const auto& raw = std::get<RawTerm>(term.form);
      if (raw.components.empty() || raw.components.size() != raw.coeffs.size()) {
        fail(i, "raw generator needs one coefficient per component");
        continue;
      }
      bool dims_ok = true;
      for (const auto& c : raw.components)
        if (c.dim != d) {
          fail(i, "raw generator dimension does not match support");
          dims_ok = false;
        }
      if (!dims_ok) continue;
      // Trace annihilation: tr(L(s)[A]) = 0 for random A at sampled times.
      Rng rng(0xA11CEull + i);
      for (int p = 0; p < grid; ++p) {
        const double s = grid == 1 ? 0.0 : t_max * p / (grid - 1);
        const SuperOperator gen = generator_at(term, s, model.lattice.local_dim);
        Mat a(d, d);
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) a(r, c) = Cplx(rng.gauss(), rng.gauss());
        const double defect = std::abs(gen.apply(a).trace());
        if (defect > 1e-9 * std::max(1.0, a.norm() * gen.transfer.norm())) {
          fail(i, "raw generator does not annihilate the trace at sampled time");
          break;
        }
      }
    }
  }
  return report;
}

namespace {

// Adaptive Simpson on superoperator transfer matrices, Frobenius error
// control, recursion depth capped.
Mat simpson_recurse(const std::function<Mat(double)>& f, double a, double b, const Mat& fa,
                    const Mat& fm, const Mat& fb, const Mat& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const Mat fl = f(0.5 * (a + m));
  const Mat fr = f(0.5 * (m + b));
  const Mat left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const Mat right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  const Mat sum = left + right;
  if ((sum - whole).norm() <= 15.0 * tol || depth <= 0) {
    if (depth <= 0 && (sum - whole).norm() > 15.0 * tol)
      throw std::runtime_error("averaged_generator: quadrature failed to converge");
    return sum + (sum - whole) / 15.0;
  }
  return simpson_recurse(f, a, m, fa, fl, fm, left, tol / 2.0, depth - 1) +
         simpson_recurse(f, m, b, fm, fr, fb, right, tol / 2.0, depth - 1);
}

Mat adaptive_simpson(const std::function<Mat(double)>& f, double a, double b, double tol) {
  const Mat fa = f(a);
  const Mat fm = f(0.5 * (a + b));
  const Mat fb = f(b);
  const Mat whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 32);
}

}  // namespace

SuperOperator averaged_generator(const LocalTerm& term, int j, int m, double t, int local_dim,
                                 double rel_tol) {
  if (j < 1 || j > m) throw std::invalid_argument("averaged_generator: slice index out of range");
  const double a = t * (j - 1) / m;
  const double b = t * j / m;
  const int d = term.support_dim(local_dim);
  auto f = [&](double s) { return generator_at(term, s, local_dim).transfer; };

  // Split at declared discontinuities inside the slice.
  std::vector<double> cuts;
  term.collect_breakpoints(a, b, cuts);
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);

  const double scale = std::max(1.0, f(0.5 * (a + b)).norm()) * (b - a);
  Mat integral = Mat::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    if (cuts[c + 1] - cuts[c] < 1e-15) continue;
    integral += adaptive_simpson(f, cuts[c], cuts[c + 1], rel_tol * scale);
  }
  return SuperOperator(d, integral * (static_cast<double>(m) / t));
}

double beta(const KLocalLiouvillian& model, double t, BetaMode mode, int grid,
            const NormEffort& effort) {
  if (grid < 2) throw std::invalid_argument("beta: grid must have at least 2 points");
  double best = 0.0;
  for (const auto& term : model.terms) {
    for (int p = 0; p < grid; ++p) {
      const double s = t * p / (grid - 1);
      SuperOperator gen = generator_at(term, s, model.lattice.local_dim);
      if (mode == BetaMode::FullSpace)
        gen = embed_local(gen, term.support, model.lattice.sites, model.lattice.local_dim);
      best = std::max(best, one_to_one_norm(gen, effort).lower);
    }
  }
  return best;
}

double beta_tilde(const KLocalLiouvillian& model, double t, int grid) {
  if (grid < 2) throw std::invalid_argument("beta_tilde: grid must have at least 2 points");
  double best = 0.0;
  for (const auto& term : model.terms) {
    if (!term.is_gksl())
      throw std::invalid_argument("beta_tilde: requires every term in GKSL form");
    const auto& g = std::get<GkslTerm>(term.form);
    for (const auto& l : g.lindblad_ops) {
      if (l.is_static()) {
        best = std::max(best, spectral_norm(l.at(0.0)));
        continue;
      }
      for (int p = 0; p < grid; ++p) best = std::max(best, spectral_norm(l.at(t * p / (grid - 1))));
    }
  }
  return best;
}

const char* beta_mode_name(BetaMode mode) {
  return mode == BetaMode::FullSpace ? "full-space" : "local-space";
}

}  // namespace openslt
