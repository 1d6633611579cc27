#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "openslt/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;
constexpr int kExitCapAbort = 4;

void print_summary(const openslt::Report& report) {
  const std::string command = report.value("command", "");
  std::cout << "openslt " << command << "\n";
  if (report.contains("beta")) std::cout << "  beta            = " << report["beta"] << "\n";
  if (report.contains("beta_tilde"))
    std::cout << "  beta_tilde      = " << report["beta_tilde"] << "\n";
  if (report.contains("tid")) {
    std::cout << "  t_id            = " << report["tid"]["t_id"]
              << (report["tid"]["converged"].get<bool>() ? " (converged)" : " (not converged)")
              << "\n";
    std::cout << "  c_tilde         = " << report["tid"]["c_tilde"] << "\n";
  }
  if (report.contains("profile")) {
    std::cout << "  m               = " << report["profile"]["m"] << "\n";
    std::cout << "  n_tilde / n_hat = " << report["profile"]["n_tilde"] << " / "
              << report["profile"]["n_hat"] << "\n";
    std::cout << "  n_tot           = " << report["profile"]["n_tot"] << "\n";
  }
  if (report.contains("bounds")) {
    std::cout << "  bound(measured) = " << report["bounds"]["measured"] << "\n";
    std::cout << "  bound(tid form) = " << report["bounds"]["tid_form"] << "\n";
  }
  if (report.contains("plan")) {
    const auto& plan = report["plan"];
    std::cout << "  plan m          = " << plan["m"] << " (required " << plan["m_required"]
              << ")\n";
    if (plan["n_tot"].get<int>() > 20)
      std::cout << "  circuits        = 2^" << plan["n_tot"] << "\n";
    else
      std::cout << "  circuits        = " << plan["circuit_count"] << "\n";
    std::cout << "  trials/estimator= " << plan["trials_per_estimator"] << "\n";
    std::cout << "  feasible        = " << (plan["feasible"].get<bool>() ? "yes" : "no");
    if (!plan["feasible"].get<bool>())
      std::cout << "  (" << plan["limiting_factor"].get<std::string>() << ")";
    std::cout << "\n";
  }
  if (report.contains("reconstruction"))
    std::cout << "  <A>             = " << report["reconstruction"]["expectation"] << "\n";
  if (report.contains("verify")) {
    std::cout << "  deviation       = " << report["verify"]["deviation"] << " (budget "
              << report["verify"]["budget"] << ")\n";
    std::cout << "  verdict         = "
              << (report["verify"]["pass"].get<bool>() ? "pass" : "fail") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical simulator for k-local locally-indivisible open-system dynamics: "
               "indivisibility measures, decomposition error bounds, instrument emulation "
               "and reconstruction with error budgets"};

  std::string config_path;
  std::string command;
  std::string mode = "exact";
  std::string format = "json";
  std::string out_path;
  long long m_override = 0;
  double epsilon = 0.1;
  double z = 4.42;
  std::uint64_t seed = 1;
  long long max_circuits = 65536;

  app.add_option("--config", config_path, "Model config file (JSON)")->required();
  app.add_option("--command", command, "One of: analyze, plan, simulate, verify")->required();
  app.add_option("--m", m_override, "Slice count override (0 = automatic)");
  app.add_option("--epsilon", epsilon, "Total error target");
  app.add_option("--z", z, "z-value of the confidence level");
  app.add_option("--mode", mode, "exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}));
  app.add_option("--seed", seed, "Master seed for sampled runs");
  app.add_option("--max-circuits", max_circuits, "Circuit-count cap");
  app.add_option("--out", out_path, "Report file path");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  openslt::RunOptions opts;
  opts.m_override = m_override;
  opts.eps = epsilon;
  opts.z = z;
  opts.mode = mode == "sampled" ? openslt::RunMode::Sampled : openslt::RunMode::Exact;
  opts.seed = seed;
  opts.caps.max_circuits = max_circuits;

  try {
    const openslt::ModelConfig cfg = openslt::load_config(config_path);

    openslt::Report report;
    if (command == "analyze") {
      report = openslt::build_analyze_report(cfg, opts);
    } else if (command == "plan") {
      report = openslt::build_plan_report(cfg, opts);
    } else if (command == "simulate") {
      report = openslt::build_simulate_report(cfg, opts);
    } else if (command == "verify") {
      report = openslt::build_verify_report(cfg, opts);
    } else {
      std::cerr << "unknown command '" << command << "'\n";
      return kExitValidation;
    }

    if (!out_path.empty()) {
      const std::string payload =
          format == "csv" ? openslt::report_to_csv(report) : report.dump(2) + "\n";
      openslt::write_text_atomic(out_path, payload);
    }
    print_summary(report);

    if (report.contains("plan") && !report["plan"]["feasible"].get<bool>()) {
      std::cerr << "plan infeasible: " << report["plan"]["limiting_factor"].get<std::string>()
                << "\n";
      return kExitInfeasible;
    }
    return kExitOk;
  } catch (const openslt::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const openslt::CapExceeded& e) {
    std::cerr << e.what() << "\n";
    return kExitCapAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
