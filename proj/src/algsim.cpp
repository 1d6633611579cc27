#include "openslt/algsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace openslt {

CircuitEnsemble enumerate_circuits(const DivisibilityProfile& profile, const SliceGrid& grid,
                                   const Caps& caps) {
  if (profile.m != grid.m || profile.term_count != grid.term_count())
    throw std::invalid_argument("enumerate_circuits: profile does not match grid");
  if (profile.n_tot > caps.max_nontrivial) {
    std::ostringstream msg;
    msg << "enumerate_circuits: " << profile.n_tot
        << " non-channel slots exceed the cap of " << caps.max_nontrivial;
    throw CapExceeded(msg.str());
  }
  const long long circuit_count = 1LL << profile.n_tot;
  if (circuit_count > caps.max_circuits) {
    std::ostringstream msg;
    msg << "enumerate_circuits: " << circuit_count << " circuits exceed the cap of "
        << caps.max_circuits;
    throw CapExceeded(msg.str());
  }

  CircuitEnsemble ens;
  ens.slots.lattice = grid.lattice;
  ens.slots.m = grid.m;
  ens.slots.term_count = grid.term_count();
  ens.slots.n_tot = static_cast<int>(profile.n_tot);
  ens.slots.channel_full.resize(static_cast<std::size_t>(grid.m) * grid.term_count());

  int ordinal = 0;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.term_count(); ++i) {
      Slot slot;
      slot.slice = j;
      slot.term = i;
      slot.is_channel = !profile.mask[i][j];
      const std::size_t pos = ens.slots.order.size();
      if (slot.is_channel) {
        ens.slots.channel_full[pos] = embed_local(grid.local[i][j], grid.supports[i],
                                                  grid.lattice.sites, grid.lattice.local_dim);
      } else {
        slot.ordinal = ordinal++;
        CircuitSlots::NonChannelSlot part;
        part.split = hptp_split(grid.local[i][j]);
        const CpntpMap* maps[2] = {&part.split.positive_part, &part.split.negative_part};
        for (int b = 0; b < 2; ++b) {
          const DilatedInstrument local = dilate(*maps[b]);
          part.gauge[b] = local.gauge_scalar;
          part.instrument[b] = embed_instrument(local, grid.supports[i], grid.lattice);
        }
        ens.slots.parts.push_back(std::move(part));
      }
      ens.slots.order.push_back(slot);
    }

  ens.circuits.reserve(static_cast<std::size_t>(circuit_count));
  for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(circuit_count); ++r) {
    CircuitSpec spec;
    spec.r = r;
    spec.parity = static_cast<int>(std::popcount(r) & 1u);
    ens.circuits.push_back(spec);
  }
  return ens;
}

namespace {

struct SlotProbe {
  std::vector<double> p;          // outcome-1 probability per non-channel slot, circuit order
  std::vector<int> positions;     // slot positions of the non-channel slots
  Mat terminal;
  bool unreachable = false;
  std::vector<LedgerEntry> ledger;
};

// Walk the circuit once with exact states, collecting the per-slot outcome-1
// probabilities and the exact ledger.
SlotProbe probe_circuit(const CircuitEnsemble& ens, const CircuitSpec& spec, const Mat& rho0) {
  SlotProbe probe;
  Mat state = rho0;
  for (std::size_t pos = 0; pos < ens.slots.order.size(); ++pos) {
    const Slot& slot = ens.slots.order[pos];
    if (slot.is_channel) {
      state = ens.slots.channel_full[pos].apply(state);
      continue;
    }
    const int part = spec.part(slot.ordinal);
    const auto& ncs = ens.slots.parts[slot.ordinal];
    const InstrumentOutcome out = apply_exact(ncs.instrument[part], state);

    LedgerEntry entry;
    entry.slot_position = static_cast<int>(pos);
    entry.ordinal = slot.ordinal;
    entry.part = part;
    entry.gauge = ncs.gauge[part];
    entry.n_exact = out.p1;
    probe.ledger.push_back(entry);
    probe.p.push_back(out.p1);
    probe.positions.push_back(static_cast<int>(pos));

    if (!out.post_state) {
      probe.unreachable = true;
      break;
    }
    state = *out.post_state;
  }
  probe.terminal = probe.unreachable ? Mat::Zero(rho0.rows(), rho0.cols()) : state;
  return probe;
}

CircuitResult result_from_probe(const CircuitEnsemble&, const CircuitSpec& spec, SlotProbe probe) {
  CircuitResult res;
  res.r = spec.r;
  res.parity = spec.parity;
  res.terminal_state = std::move(probe.terminal);
  res.unreachable = probe.unreachable;
  res.ledger = std::move(probe.ledger);
  res.weight = 1.0;
  res.p_circuit = 1.0;
  for (const LedgerEntry& e : res.ledger) {
    res.weight *= e.gauge * e.n_exact;
    res.p_circuit *= e.n_exact;
  }
  if (res.unreachable) res.weight = 0.0;
  res.signed_state = res.weight * res.terminal_state;
  return res;
}

}  // namespace

CircuitResult run_circuit_exact(const CircuitEnsemble& ensemble, std::size_t index,
                                const Mat& rho0) {
  const CircuitSpec& spec = ensemble.circuits.at(index);
  return result_from_probe(ensemble, spec, probe_circuit(ensemble, spec, rho0));
}

CircuitResult run_circuit_sampled(const CircuitEnsemble& ensemble, std::size_t index,
                                  const Mat& rho0, const SimulationPlan& plan, Rng& rng) {
  const CircuitSpec& spec = ensemble.circuits.at(index);
  SlotProbe probe = probe_circuit(ensemble, spec, rho0);
  CircuitResult res = result_from_probe(ensemble, spec, probe);
  const std::size_t slots = probe.p.size();
  if (slots == 0 || res.unreachable) return res;

  // Restart-on-failure sampling: a trial reaches slot n only after outcome 1
  // at every earlier slot, so each slot's estimator is conditioned on the
  // trials that reached it.
  std::vector<long long> reached(slots, 0), succeeded(slots, 0);
  const long long check_every = 256;
  long long trials = 0;
  const double tol = plan.per_estimator_tol;
  const long long trial_cap =
      static_cast<long long>(std::min<double>(plan.caps.max_shots, 9.0e18));

  auto all_converged = [&]() {
    for (std::size_t n = 0; n < slots; ++n) {
      if (reached[n] < 1) return false;
      if (wilson(succeeded[n], reached[n], plan.z).half_width > tol) return false;
    }
    return true;
  };

  while (true) {
    for (long long b = 0; b < check_every; ++b) {
      ++trials;
      for (std::size_t n = 0; n < slots; ++n) {
        ++reached[n];
        if (rng.uniform() < probe.p[n]) {
          ++succeeded[n];
        } else {
          break;
        }
      }
    }
    if (all_converged()) break;
    if (trials >= trial_cap) {
      double pmin = 1.0, pmax = 1.0;
      for (std::size_t n = 0; n < slots; ++n) {
        const double est =
            reached[n] > 0 ? wilson(succeeded[n], reached[n], plan.z).point : 0.0;
        pmin = std::min(pmin, est);
        pmax = std::max(pmax, est);
      }
      std::ostringstream msg;
      msg << "run_circuit_sampled: trial cap " << trial_cap << " exceeded on circuit " << spec.r
          << "; success probability per attempt lies in ["
          << std::pow(std::min(pmin, 1.0), static_cast<double>(slots)) << ", "
          << std::pow(std::max(pmax, 0.0), static_cast<double>(slots)) << "]";
      throw CapExceeded(msg.str());
    }
  }

  res.trials_used = trials;
  res.weight = 1.0;
  for (std::size_t n = 0; n < slots; ++n) {
    const WilsonEstimate est = wilson(succeeded[n], reached[n], plan.z);
    res.ledger[n].sampled = true;
    res.ledger[n].n_sampled = est;
    res.weight *= res.ledger[n].gauge * est.point;
  }
  res.signed_state = res.weight * res.terminal_state;
  return res;
}

Reconstruction reconstruct(const std::vector<CircuitResult>& results, const Mat& observable) {
  if (results.empty()) throw std::invalid_argument("reconstruct: no circuit results");
  const std::uint64_t expected = results.size();
  for (std::uint64_t r = 0; r < expected; ++r)
    if (results[r].r != r)
      throw std::invalid_argument("reconstruct: results must cover every circuit in order");

  Reconstruction rec;
  rec.state = Mat::Zero(results.front().terminal_state.rows(),
                        results.front().terminal_state.cols());
  for (const CircuitResult& res : results) {
    rec.state += (res.parity ? -1.0 : 1.0) * res.signed_state;
    rec.total_trials += res.trials_used;
    rec.n_tot = std::max<int>(rec.n_tot, static_cast<int>(res.ledger.size()));

    double g_r = 1.0, worst = 0.0, worst_apriori = 0.0;
    for (const LedgerEntry& e : res.ledger) {
      g_r *= e.gauge;
      if (e.sampled) {
        worst = std::max(worst, std::abs(e.n_exact - e.n_sampled.point));
        worst_apriori = std::max(worst_apriori, e.n_sampled.half_width);
      }
    }
    rec.g_max = std::max(rec.g_max, g_r);
    rec.max_estimator_error = std::max(rec.max_estimator_error, worst);
    const double n_tot = static_cast<double>(res.ledger.size());
    rec.ledger_bound = std::max(rec.ledger_bound, g_r * n_tot * worst);
    rec.ledger_bound_apriori = std::max(rec.ledger_bound_apriori, g_r * n_tot * worst_apriori);
  }
  const double aggregation =
      rec.n_tot > 0 ? std::pow(2.0, static_cast<double>(rec.n_tot - 1)) : 0.0;
  rec.ledger_bound *= aggregation;
  rec.ledger_bound_apriori *= aggregation;
  rec.expectation = (observable * rec.state).trace().real();
  return rec;
}

double classical_gauge_estimate(const CpntpMap& map, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("classical_gauge_estimate: samples >= 1");
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec psi(map.dim);
    for (int i = 0; i < map.dim; ++i) psi[i] = Cplx(rng.gauss(), rng.gauss());
    psi.normalize();
    const Mat rho = psi * psi.adjoint();
    acc += map.apply(rho).trace().real();
  }
  return acc / samples;
}

SimulationPlan make_plan(const KLocalLiouvillian& model, double t, double eps, double z,
                         const Caps& caps, long long m_override, double trotter_share,
                         const NormEffort& effort, double grid_tol) {
  if (!(eps > 0)) throw std::invalid_argument("make_plan: eps must be positive");
  if (!(trotter_share > 0) || !(trotter_share < 1))
    throw std::invalid_argument("make_plan: trotter share must lie in (0, 1)");

  SimulationPlan plan;
  plan.eps = eps;
  plan.eps_trotter = eps * trotter_share;
  plan.eps_algorithmic = eps * (1.0 - trotter_share);
  plan.z = z;
  plan.caps = caps;

  auto infeasible = [&](const std::string& why) {
    if (plan.limiting_factor.empty()) plan.limiting_factor = why;
    plan.feasible = false;
  };
  plan.feasible = true;

  if (model.lattice.dim() > caps.max_dim) {
    infeasible("global dimension exceeds cap");
    return plan;
  }

  plan.beta_value = beta(model, t, BetaMode::FullSpace, 101, effort);
  const TidEstimate tid = estimate_tid(model, t, {}, 0.02, grid_tol);
  plan.t_id = tid.tid;
  plan.c_tilde = tid.c_tilde;
  plan.tid_converged = tid.converged;

  const int big_k = model.term_count();
  const StepCount step = required_slice_count(plan.eps_trotter, big_k, plan.beta_value, t,
                                              plan.t_id, plan.c_tilde, StepRule::Validated);
  plan.m_required = step.m;
  plan.eps_admissible = step.eps_admissible;
  plan.m = m_override > 0 ? m_override : std::min<long long>(step.m, caps.max_slices);
  plan.m_overridden = m_override > 0;
  if (plan.m > caps.max_slices) {
    infeasible("slice count exceeds cap");
    return plan;
  }

  BoundInputs inputs;
  inputs.term_count = big_k;
  inputs.beta = plan.beta_value;
  inputs.t = t;
  inputs.m = static_cast<int>(plan.m);
  inputs.t_id = plan.t_id;
  inputs.c_tilde = plan.c_tilde;
  plan.trotter_certified = slt_error_bound(inputs, BoundForm::TidLimit) <= plan.eps_trotter;

  const SliceGrid grid = slice_grid(model, t, static_cast<int>(plan.m), false, grid_tol);
  const DivisibilityProfile prof = divisibility_profile(grid);
  plan.n_tot = static_cast<int>(prof.n_tot);
  if (plan.n_tot > caps.max_nontrivial) {
    infeasible("non-channel slot count exceeds cap");
    plan.circuit_count = plan.n_tot < 62 ? (1LL << plan.n_tot) : std::numeric_limits<long long>::max();
    return plan;
  }
  plan.circuit_count = 1LL << plan.n_tot;
  if (plan.circuit_count > caps.max_circuits) infeasible("circuit count exceeds cap");

  // Gauges and postselection probabilities per non-channel slot.
  Rng rng(0xFEA51B1Eull);
  double est_min_p = 1.0;
  plan.g_max = 1.0;
  for (int i = 0; i < grid.term_count(); ++i)
    for (int j = 0; j < grid.m; ++j) {
      if (!prof.mask[i][j]) continue;
      const HptpSplit split = hptp_split(grid.local[i][j]);
      double worst_gauge = 1.0, worst_p = 1.0;
      for (const CpntpMap* part : {&split.positive_part, &split.negative_part}) {
        const double g = part->max_gauge_eig();
        const double gauge = g > 1.0 ? g : 1.0;
        worst_gauge = std::max(worst_gauge, gauge);
        const CpntpMap subnormalized = part->scaled(1.0 / gauge);
        worst_p = std::min(worst_p, classical_gauge_estimate(subnormalized, 200, rng));
      }
      plan.g_max *= worst_gauge;
      est_min_p *= worst_p;
    }
  plan.est_min_p_circuit = est_min_p;

  if (plan.n_tot > 0) {
    plan.per_estimator_tol = plan.eps_algorithmic /
                             (plan.g_max * plan.n_tot *
                              std::pow(2.0, static_cast<double>(plan.n_tot - 1)));
    plan.trials_per_estimator = trials_needed(plan.per_estimator_tol, z);
  } else {
    plan.per_estimator_tol = std::numeric_limits<double>::infinity();
    plan.trials_per_estimator = 0;
  }
  plan.shots_estimate =
      static_cast<double>(plan.trials_per_estimator) * static_cast<double>(plan.circuit_count);
  if (plan.shots_estimate > caps.max_shots) infeasible("shot budget exceeds cap");
  if (plan.n_tot > 0 && plan.est_min_p_circuit < caps.postselect_floor)
    infeasible("estimated circuit success probability below postselection floor");
  return plan;
}

SimulationOutcome run_simulation(const KLocalLiouvillian& model, double t, const Mat& rho0,
                                 const Mat& observable, double eps, double z, RunMode mode,
                                 std::uint64_t seed, const Caps& caps, long long m_override,
                                 double grid_tol, const NormEffort& effort) {
  SimulationOutcome outcome;
  outcome.plan = make_plan(model, t, eps, z, caps, m_override, 0.5, effort, grid_tol);
  if (!outcome.plan.feasible) return outcome;

  const SliceGrid grid = slice_grid(model, t, static_cast<int>(outcome.plan.m), false, grid_tol);
  outcome.profile = divisibility_profile(grid);
  const CircuitEnsemble ensemble = enumerate_circuits(outcome.profile, grid, caps);

  Rng master(seed);
  double shots = 0.0;
  for (std::size_t idx = 0; idx < ensemble.circuits.size(); ++idx) {
    CircuitResult res;
    if (mode == RunMode::Exact) {
      res = run_circuit_exact(ensemble, idx, rho0);
    } else {
      Rng stream = master.derive(ensemble.circuits[idx].r);
      res = run_circuit_sampled(ensemble, idx, rho0, outcome.plan, stream);
      shots += static_cast<double>(res.trials_used);
      if (shots > caps.max_shots) {
        std::ostringstream msg;
        msg << "run_simulation: total simulated shots " << shots << " exceed the cap of "
            << caps.max_shots;
        throw CapExceeded(msg.str());
      }
    }
    outcome.results.push_back(std::move(res));
  }
  outcome.reconstruction = reconstruct(outcome.results, observable);
  return outcome;
}

VerifyReport verify_against_reference(const KLocalLiouvillian& model, const Mat& rho0,
                                      const Mat& observable, double t,
                                      const SimulationOutcome& outcome, RunMode mode,
                                      double grid_tol) {
  const Mat reference = reference_state_evolution(model, rho0, t, grid_tol);
  VerifyReport rep;
  rep.deviation = 0.5 * trace_norm(outcome.reconstruction.state - reference);
  rep.budget = mode == RunMode::Sampled
                   ? outcome.plan.eps_trotter + outcome.plan.eps_algorithmic
                   : outcome.plan.eps_trotter + 10.0 * grid_tol;
  rep.pass = rep.deviation <= rep.budget;
  rep.expectation_sim = outcome.reconstruction.expectation;
  rep.expectation_ref = (observable * reference).trace().real();
  return rep;
}

}  // namespace openslt
