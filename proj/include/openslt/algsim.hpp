#pragma once

#include <cstdint>
#include <string>

#include "openslt/instrument.hpp"
#include "openslt/trotter.hpp"

namespace openslt {

/// Resource ceilings the planner checks a run against.
struct Caps {
  int max_nontrivial = 16;          // non-channel slots in the decomposition
  long long max_circuits = 65536;   // 2^{n_tot}
  double max_shots = 1e9;           // simulated trials, all circuits combined
  long max_dim = 64;                // global Hilbert-space dimension
  long long max_slices = 4096;      // m
  double postselect_floor = 1e-6;   // estimated min_r P(C_r)
};

/// Thrown when a run would exceed a cap; the message names the cap and the
/// offending quantity so the user can re-plan.
struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// One slot of the decomposition in execution order gamma = (j, i), slices
/// outermost. Non-channel slots carry their ordinal among non-channel slots;
/// bit `ordinal` of the circuit index selects the part.
struct Slot {
  int slice = 0;      // j, 0-based
  int term = 0;       // i, 0-based
  bool is_channel = true;
  int ordinal = -1;   // 0-based among non-channel slots, -1 for channels
};

/// Everything shared by the 2^{n_tot} circuits: embedded channel actions and,
/// per non-channel slot, the difference-of-CP split with both parts dilated
/// and embedded.
struct CircuitSlots {
  Lattice lattice;
  int m = 0;
  int term_count = 0;
  int n_tot = 0;
  std::vector<Slot> order;                   // size m * K
  std::vector<SuperOperator> channel_full;   // indexed by slot position (channels only)
  struct NonChannelSlot {
    HptpSplit split;                  // on the support space
    DilatedInstrument instrument[2];  // embedded; [0] positive part, [1] negative part
    double gauge[2] = {1.0, 1.0};
  };
  std::vector<NonChannelSlot> parts;  // indexed by ordinal
};

struct CircuitSpec {
  std::uint64_t r = 0;
  int parity = 0;  // popcount(r) mod 2
  /// Part chosen at each non-channel slot: bit n of r, least significant
  /// bit first.
  int part(int ordinal) const { return static_cast<int>((r >> ordinal) & 1u); }
};

struct CircuitEnsemble {
  CircuitSlots slots;
  std::vector<CircuitSpec> circuits;  // ascending r
};

/// Builds the circuit family from a slice grid and its divisibility profile.
/// Throws CapExceeded when 2^{n_tot} would exceed the caps.
CircuitEnsemble enumerate_circuits(const DivisibilityProfile& profile, const SliceGrid& grid,
                                   const Caps& caps = {});

struct LedgerEntry {
  int slot_position = 0;  // index into slots.order
  int ordinal = 0;
  int part = 0;
  double gauge = 1.0;
  double n_exact = 0.0;               // outcome-1 probability at this slot
  WilsonEstimate n_sampled;           // populated in sampled mode
  bool sampled = false;
};

struct CircuitResult {
  std::uint64_t r = 0;
  int parity = 0;
  Mat terminal_state;        // unit trace when reachable
  bool unreachable = false;  // some slot had outcome-1 probability ~ 0
  std::vector<LedgerEntry> ledger;
  double weight = 0.0;       // prod gauge * N (exact or estimated N)
  double p_circuit = 0.0;    // prod N over non-channel slots
  Mat signed_state;          // weight * terminal_state (the circuit's contribution)
  long long trials_used = 0;
};

CircuitResult run_circuit_exact(const CircuitEnsemble& ensemble, std::size_t index,
                                const Mat& rho0);

/// Orchestration record for one simulation: error split, slice count, trial
/// budget and the feasibility verdict.
struct SimulationPlan {
  double eps = 0.0;
  double eps_trotter = 0.0;
  double eps_algorithmic = 0.0;
  double z = 4.42;
  double beta_value = 0.0;
  double t_id = 0.0;
  double c_tilde = 0.0;
  bool tid_converged = false;
  long long m_required = 1;   // from the step rule
  long long m = 1;            // actually planned (clipped / overridden)
  bool m_overridden = false;
  bool trotter_certified = false;  // decomposition bound at m is <= eps_trotter
  bool eps_admissible = false;
  int n_tot = 0;
  long long circuit_count = 1;
  double g_max = 1.0;              // max_r prod gauge
  double per_estimator_tol = 0.0;  // eps_A / (G n_tot 2^{n_tot - 1})
  long long trials_per_estimator = 0;
  double shots_estimate = 0.0;
  double est_min_p_circuit = 1.0;
  bool feasible = false;
  std::string limiting_factor;  // empty when feasible
  Caps caps;
};

SimulationPlan make_plan(const KLocalLiouvillian& model, double t, double eps, double z = 4.42,
                         const Caps& caps = {}, long long m_override = 0,
                         double trotter_share = 0.5, const NormEffort& effort = {},
                         double grid_tol = 1e-10);

/// Sampled-mode run: slot normalizations are estimated by simulated Bernoulli
/// trials with the restart-on-failure rule (a trial reaches slot n only after
/// outcome 1 at every earlier slot); states propagate exactly. Trials continue
/// until every slot estimate meets the plan's per-estimator tolerance at its
/// z; exceeding the shot cap raises CapExceeded with the success-probability
/// bracket.
CircuitResult run_circuit_sampled(const CircuitEnsemble& ensemble, std::size_t index,
                                  const Mat& rho0, const SimulationPlan& plan, Rng& rng);

struct Reconstruction {
  Mat state;                      // signed sum over circuits
  double expectation = 0.0;       // tr(A state), real part
  int n_tot = 0;
  double g_max = 1.0;
  double max_estimator_error = 0.0;    // max_r max_slot |N - N_estimate|
  double ledger_bound = 0.0;           // 2^{n_tot-1} max_r (G_r n_tot max|N - N~|)
  double ledger_bound_apriori = 0.0;   // same with Wilson half-widths
  long long total_trials = 0;
};

Reconstruction reconstruct(const std::vector<CircuitResult>& results, const Mat& observable);

/// Mean output trace of a (sub-normalized) CP map over random pure inputs;
/// used only for plan feasibility, never in reconstruction.
double classical_gauge_estimate(const CpntpMap& map, int samples, Rng& rng);

enum class RunMode { Exact, Sampled };

struct SimulationOutcome {
  SimulationPlan plan;
  DivisibilityProfile profile;
  std::vector<CircuitResult> results;
  Reconstruction reconstruction;
};

/// End-to-end pipeline: plan, slice, enumerate, run every circuit (ascending
/// r), reconstruct. Throws CapExceeded on cap violations; an infeasible plan
/// is returned without running when `force` is false.
SimulationOutcome run_simulation(const KLocalLiouvillian& model, double t, const Mat& rho0,
                                 const Mat& observable, double eps, double z, RunMode mode,
                                 std::uint64_t seed, const Caps& caps = {}, long long m_override = 0,
                                 double grid_tol = 1e-10, const NormEffort& effort = {});

struct VerifyReport {
  double deviation = 0.0;    // (1/2) || state - reference ||_1
  double budget = 0.0;       // eps_T + eps_A (sampled) or eps_T + 10 tol (exact)
  bool pass = false;
  double expectation_sim = 0.0;
  double expectation_ref = 0.0;
};

VerifyReport verify_against_reference(const KLocalLiouvillian& model, const Mat& rho0,
                                      const Mat& observable, double t,
                                      const SimulationOutcome& outcome, RunMode mode,
                                      double grid_tol = 1e-10);

}  // namespace openslt
