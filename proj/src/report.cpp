#include "openslt/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

namespace openslt {

namespace {

Report conventions_block(const RunOptions& opts) {
  Report c;
  c["vectorization"] = "column-stacking";
  c["bit_order"] = "lsb-first";
  c["beta_mode"] = beta_mode_name(opts.beta_mode);
  c["step_rule"] = opts.step_rule == StepRule::Validated ? "validated" : "published";
  c["slice_term_order"] = "ascending-term-index";
  return c;
}

Report model_block(const ModelConfig& cfg) {
  Report m;
  m["sites"] = cfg.model.lattice.sites;
  m["local_dim"] = cfg.model.lattice.local_dim;
  m["terms"] = cfg.model.term_count();
  m["locality"] = cfg.model.k;
  m["horizon"] = cfg.horizon;
  m["initial_state"] = cfg.initial_state_name;
  m["observable"] = cfg.observable_name;
  return m;
}

Report profile_block(const DivisibilityProfile& prof) {
  Report p;
  p["m"] = prof.m;
  p["n_tilde_i"] = prof.n_tilde_i;
  p["n_hat_j"] = prof.n_hat_j;
  p["n_tilde"] = prof.n_tilde;
  p["n_hat"] = prof.n_hat;
  p["n_tot"] = prof.n_tot;
  p["c_i"] = prof.c_i;
  p["c_tilde_m"] = prof.c_tilde_m;
  p["leading_edge_terms"] = prof.leading_edge_terms;
  Report mask = Report::array();
  for (const auto& row : prof.mask) {
    Report r = Report::array();
    for (bool b : row) r.push_back(b ? 1 : 0);
    mask.push_back(r);
  }
  p["mask"] = mask;
  return p;
}

Report plan_block(const SimulationPlan& plan) {
  Report p;
  p["eps"] = plan.eps;
  p["eps_trotter"] = plan.eps_trotter;
  p["eps_algorithmic"] = plan.eps_algorithmic;
  p["z"] = plan.z;
  p["beta"] = plan.beta_value;
  p["t_id"] = plan.t_id;
  p["c_tilde"] = plan.c_tilde;
  p["tid_converged"] = plan.tid_converged;
  p["m_required"] = plan.m_required;
  p["m"] = plan.m;
  p["m_overridden"] = plan.m_overridden;
  p["trotter_certified"] = plan.trotter_certified;
  p["eps_admissible"] = plan.eps_admissible;
  p["n_tot"] = plan.n_tot;
  p["circuit_count"] = plan.circuit_count;
  p["g_max"] = plan.g_max;
  p["per_estimator_tol"] = plan.per_estimator_tol;
  p["trials_per_estimator"] = plan.trials_per_estimator;
  p["shots_estimate"] = plan.shots_estimate;
  p["est_min_p_circuit"] = plan.est_min_p_circuit;
  p["feasible"] = plan.feasible;
  p["limiting_factor"] = plan.limiting_factor;
  return p;
}

Report header(const std::string& command, const ModelConfig& cfg, const RunOptions& opts) {
  Report r;
  r["command"] = command;
  r["schema_version"] = 1;
  r["seed"] = opts.seed;
  r["mode"] = opts.mode == RunMode::Exact ? "exact" : "sampled";
  r["conventions"] = conventions_block(opts);
  r["model"] = model_block(cfg);
  return r;
}

std::vector<int> sweep_points(const RunOptions& opts) {
  std::vector<int> ms = opts.m_sequence;
  if (opts.m_override > 0) ms.push_back(static_cast<int>(opts.m_override));
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  return ms;
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Report build_analyze_report(const ModelConfig& cfg, const RunOptions& opts) {
  Report r = header("analyze", cfg, opts);
  const KLocalLiouvillian& model = cfg.model;
  const double t = cfg.horizon;

  const double beta_val = beta(model, t, opts.beta_mode, 101, opts.effort);
  r["beta"] = beta_val;
  bool all_gksl = true;
  for (const auto& term : model.terms) all_gksl = all_gksl && term.is_gksl();
  if (all_gksl) r["beta_tilde"] = beta_tilde(model, t);

  const TidEstimate tid = estimate_tid(model, t, opts.m_sequence, 0.02, opts.grid_tol);
  Report tid_block;
  tid_block["m_sequence"] = tid.m_sequence;
  tid_block["tid_i_by_m"] = tid.tid_i_by_m;
  tid_block["tid_i"] = tid.tid_i;
  tid_block["t_id"] = tid.tid;
  tid_block["c_i"] = tid.c_i;
  tid_block["c_tilde"] = tid.c_tilde;
  tid_block["converged"] = tid.converged;
  r["tid"] = tid_block;

  const int m_report = opts.m_override > 0 ? static_cast<int>(opts.m_override)
                                           : opts.m_sequence.back();
  const SliceGrid report_grid = slice_grid(model, t, m_report, false, opts.grid_tol);
  const DivisibilityProfile prof = divisibility_profile(report_grid);
  r["profile"] = profile_block(prof);

  BoundInputs inputs;
  inputs.term_count = model.term_count();
  inputs.beta = beta_val;
  inputs.t = t;
  inputs.m = m_report;
  inputs.n_tilde = prof.n_tilde;
  inputs.n_hat = prof.n_hat;
  inputs.t_id = tid.tid;
  inputs.c_tilde = tid.c_tilde;
  Report bounds;
  bounds["measured"] = slt_error_bound(inputs, BoundForm::Measured);
  bounds["tid_form"] = slt_error_bound(inputs, BoundForm::TidLimit);
  r["bounds"] = bounds;

  // (m, empirical error, bound) sweep against one shared reference propagator.
  const SuperOperator reference = evolve(global_source(model), 0.0, t, opts.grid_tol);
  Report sweep = Report::array();
  for (int m : sweep_points(opts)) {
    const SliceGrid grid = slice_grid(model, t, m, false, opts.grid_tol);
    const DivisibilityProfile p_m = divisibility_profile(grid);
    const NormEstimate err = empirical_slt_error_against(reference, grid, opts.effort);
    BoundInputs in_m = inputs;
    in_m.m = m;
    in_m.n_tilde = p_m.n_tilde;
    in_m.n_hat = p_m.n_hat;
    Report row;
    row["m"] = m;
    row["empirical_lower"] = err.lower;
    row["empirical_upper"] = err.upper;
    row["bound_measured"] = slt_error_bound(in_m, BoundForm::Measured);
    row["bound_tid"] = slt_error_bound(in_m, BoundForm::TidLimit);
    sweep.push_back(row);
  }
  r["sweep"] = sweep;
  return r;
}

Report build_plan_report(const ModelConfig& cfg, const RunOptions& opts) {
  Report r = header("plan", cfg, opts);
  const SimulationPlan plan = make_plan(cfg.model, cfg.horizon, opts.eps, opts.z, opts.caps,
                                        opts.m_override, 0.5, opts.effort);
  r["plan"] = plan_block(plan);
  return r;
}

namespace {

Report ledger_block(const std::vector<CircuitResult>& results) {
  Report ledgers = Report::array();
  for (const auto& res : results) {
    Report circ;
    circ["r"] = res.r;
    circ["parity"] = res.parity;
    circ["weight"] = res.weight;
    circ["p_circuit"] = res.p_circuit;
    circ["unreachable"] = res.unreachable;
    circ["trials_used"] = res.trials_used;
    Report entries = Report::array();
    for (const auto& e : res.ledger) {
      Report entry;
      entry["slot"] = e.slot_position;
      entry["part"] = e.part;
      entry["gauge"] = e.gauge;
      entry["n_exact"] = e.n_exact;
      if (e.sampled) {
        entry["n_estimate"] = e.n_sampled.point;
        entry["wilson_half_width"] = e.n_sampled.half_width;
        entry["n_trials"] = e.n_sampled.n_trials;
        entry["n_success"] = e.n_sampled.n_success;
      }
      entries.push_back(entry);
    }
    circ["ledger"] = entries;
    ledgers.push_back(circ);
  }
  return ledgers;
}

Report reconstruction_block(const Reconstruction& rec) {
  Report b;
  b["expectation"] = rec.expectation;
  b["n_tot"] = rec.n_tot;
  b["g_max"] = rec.g_max;
  b["max_estimator_error"] = rec.max_estimator_error;
  b["ledger_bound"] = rec.ledger_bound;
  b["ledger_bound_apriori"] = rec.ledger_bound_apriori;
  b["total_trials"] = rec.total_trials;
  Report state = Report::array();
  for (Eigen::Index i = 0; i < rec.state.rows(); ++i) {
    Report row = Report::array();
    for (Eigen::Index j = 0; j < rec.state.cols(); ++j)
      row.push_back(Report::array({rec.state(i, j).real(), rec.state(i, j).imag()}));
    state.push_back(row);
  }
  b["state"] = state;
  return b;
}

}  // namespace

Report build_simulate_report(const ModelConfig& cfg, const RunOptions& opts) {
  Report r = header("simulate", cfg, opts);
  const SimulationOutcome outcome =
      run_simulation(cfg.model, cfg.horizon, cfg.initial_state, cfg.observable, opts.eps, opts.z,
                     opts.mode, opts.seed, opts.caps, opts.m_override, opts.grid_tol, opts.effort);
  r["plan"] = plan_block(outcome.plan);
  if (!outcome.plan.feasible) return r;
  r["profile"] = profile_block(outcome.profile);
  r["circuits"] = ledger_block(outcome.results);
  r["reconstruction"] = reconstruction_block(outcome.reconstruction);
  return r;
}

Report build_verify_report(const ModelConfig& cfg, const RunOptions& opts) {
  Report r = header("verify", cfg, opts);
  const SimulationOutcome outcome =
      run_simulation(cfg.model, cfg.horizon, cfg.initial_state, cfg.observable, opts.eps, opts.z,
                     opts.mode, opts.seed, opts.caps, opts.m_override, opts.grid_tol, opts.effort);
  r["plan"] = plan_block(outcome.plan);
  if (!outcome.plan.feasible) return r;
  const VerifyReport v = verify_against_reference(cfg.model, cfg.initial_state, cfg.observable,
                                                  cfg.horizon, outcome, opts.mode, opts.grid_tol);
  Report vb;
  vb["deviation"] = v.deviation;
  vb["budget"] = v.budget;
  vb["pass"] = v.pass;
  vb["expectation_sim"] = v.expectation_sim;
  vb["expectation_ref"] = v.expectation_ref;
  r["verify"] = vb;
  r["reconstruction"] = reconstruction_block(outcome.reconstruction);
  return r;
}

std::string report_to_csv(const Report& report) {
  std::string out;
  const std::string command = report.value("command", "");
  if (command == "analyze" && report.contains("sweep")) {
    out = "m,empirical_lower,empirical_upper,bound_measured,bound_tid\n";
    for (const auto& row : report["sweep"]) {
      out += std::to_string(row["m"].get<int>()) + "," +
             fmt17(row["empirical_lower"].get<double>()) + "," +
             fmt17(row["empirical_upper"].get<double>()) + "," +
             fmt17(row["bound_measured"].get<double>()) + "," +
             fmt17(row["bound_tid"].get<double>()) + "\n";
    }
    return out;
  }
  if ((command == "simulate" || command == "verify") && report.contains("circuits")) {
    out = "circuit,slot,part,gauge,n_exact,n_estimate,wilson_half_width\n";
    for (const auto& circ : report["circuits"]) {
      for (const auto& e : circ["ledger"]) {
        out += std::to_string(circ["r"].get<long long>()) + "," +
               std::to_string(e["slot"].get<int>()) + "," + std::to_string(e["part"].get<int>()) +
               "," + fmt17(e["gauge"].get<double>()) + "," + fmt17(e["n_exact"].get<double>()) +
               ",";
        out += e.contains("n_estimate") ? fmt17(e["n_estimate"].get<double>()) : "";
        out += ",";
        out += e.contains("wilson_half_width") ? fmt17(e["wilson_half_width"].get<double>()) : "";
        out += "\n";
      }
    }
    return out;
  }
  // Flat key/value projection for reports without a natural table.
  out = "key,value\n";
  const std::function<void(const std::string&, const Report&)> walk =
      [&](const std::string& prefix, const Report& node) {
        if (node.is_object()) {
          for (auto it = node.begin(); it != node.end(); ++it)
            walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
        } else if (node.is_array()) {
          for (std::size_t i = 0; i < node.size(); ++i)
            walk(prefix + "[" + std::to_string(i) + "]", node[i]);
        } else if (node.is_number_float()) {
          out += prefix + "," + fmt17(node.get<double>()) + "\n";
        } else {
          out += prefix + "," + node.dump() + "\n";
        }
      };
  walk("", report);
  return out;
}

void write_text_atomic(const std::string& path, const std::string& payload) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << payload;
    if (!out.good()) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace openslt
