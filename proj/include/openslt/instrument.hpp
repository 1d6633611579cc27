#pragma once

#include <optional>

#include "openslt/model.hpp"
#include "openslt/rng.hpp"

namespace openslt {

/// True iff the map is Hermiticity- and trace-preserving: Hermitian Choi
/// matrix whose partial trace over the output factor is the identity.
bool is_hptp(const SuperOperator& s, double tol = 1e-9);

/// Completely positive, not necessarily trace-preserving map in Kraus form.
struct CpntpMap {
  int dim = 0;
  std::vector<Mat> kraus;

  Mat gauge() const;             // sum_i K_i^dagger K_i
  double max_gauge_eig() const;  // g = max spec(G), >= 0
  Mat apply(const Mat& rho) const;
  SuperOperator to_superop() const;
  CpntpMap scaled(double factor) const;  // Kraus scaled by sqrt(factor)
  CpntpMap embedded(const std::vector<int>& support, const Lattice& lattice) const;
};

/// Difference-of-CP decomposition of an HPTP map, T = positive - negative,
/// obtained from the spectral decomposition of the Choi matrix (eigenvalues
/// within +-1e-12 tr|J| of zero are dropped). The split is canonical: it
/// commutes with identity padding.
struct HptpSplit {
  SuperOperator original;
  CpntpMap positive_part;
  CpntpMap negative_part;
};

HptpSplit hptp_split(const SuperOperator& s, double tol = 1e-9);

/// Measure-and-postselect realization of a CPnTP map: unitary dilation on
/// ancilla (x) system with a two-outcome projective measurement on the
/// ancilla. Outcome 1 (ancilla levels 0..d_x-1) keeps the run; outcome 2
/// restarts it. If the gauge is not sub-normalized the Kraus set is first
/// scaled by 1/sqrt(g) and `gauge_scalar` records g.
struct DilatedInstrument {
  int dim = 0;          // system dimension D
  int ancilla_dim = 0;  // d_x + 1
  double gauge_scalar = 1.0;
  std::vector<Mat> kraus;  // sub-normalized Kraus set actually dilated
  Mat k_inf;               // completes the gauge to the identity
  Mat unitary;             // side ancilla_dim * D; first block column stacks kraus + k_inf

  Mat projector_keep() const;     // ancilla levels 0..d_x-1
  Mat projector_restart() const;  // ancilla level d_x
};

DilatedInstrument dilate(const CpntpMap& map, double tol = 1e-10);

/// Lift a dilated instrument to the full lattice: the unitary acts on
/// ancilla (x) support and as the identity elsewhere.
DilatedInstrument embed_instrument(const DilatedInstrument& instr, const std::vector<int>& support,
                                   const Lattice& lattice);

struct InstrumentOutcome {
  double p1 = 0.0;                // probability of measurement outcome 1
  std::optional<Mat> post_state;  // unit trace; absent when p1 ~ 0
  Mat scaled_output;              // gauge_scalar * p1 * post_state = T(rho)
};

/// Exact instrument application: evolve |0><0|_anc (x) rho with the dilation
/// unitary, project on outcome 1, trace out the ancilla.
InstrumentOutcome apply_exact(const DilatedInstrument& instr, const Mat& rho);

struct SampleResult {
  int outcome = 0;  // 1 (keep) or 2 (restart)
  std::optional<Mat> post_state;
};

/// One Bernoulli draw against the exactly computed outcome-1 probability.
SampleResult sample_outcome(const DilatedInstrument& instr, const Mat& rho, Rng& rng);

/// Wilson score interval for a binomial proportion.
struct WilsonEstimate {
  long long n_trials = 0;
  long long n_success = 0;
  double z = 0.0;
  double p_hat = 0.0;
  double point = 0.0;       // (p_hat + z^2/2N) / (1 + z^2/N)
  double half_width = 0.0;  // z sqrt(p(1-p)/N + z^2/4N^2) / (1 + z^2/N)
};

WilsonEstimate wilson(long long n_success, long long n_trials, double z);

/// Minimal trial count with half-width at most eps at the stated z for any
/// proportion: the exact integer solution of N^2/(N + z^2) >= z^2/(4 eps^2).
long long trials_needed(double eps, double z);

}  // namespace openslt
