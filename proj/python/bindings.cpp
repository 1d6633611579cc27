#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "openslt/report.hpp"

namespace py = pybind11;
using namespace openslt;

namespace {

RunOptions options_from_kwargs(long long m, double eps, double z, const std::string& mode,
                               std::uint64_t seed, long long max_circuits, double grid_tol,
                               int restarts) {
  RunOptions opts;
  opts.m_override = m;
  opts.eps = eps;
  opts.z = z;
  opts.mode = mode == "sampled" ? RunMode::Sampled : RunMode::Exact;
  opts.seed = seed;
  opts.caps.max_circuits = max_circuits;
  opts.grid_tol = grid_tol;
  opts.effort.restarts = restarts;
  return opts;
}

py::object json_to_py(const Report& node) {
  const py::module_ json = py::module_::import("json");
  return json.attr("loads")(node.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Classical simulator for k-local locally-indivisible open-system dynamics";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<CapExceeded>(m, "CapExceeded");

  py::class_<ModelConfig>(m, "ModelConfig")
      .def_static("from_json", [](const std::string& text) { return parse_config(text); },
                  py::arg("text"), "Parse a model config from a JSON string.")
      .def_static("from_file", [](const std::string& path) { return load_config(path); },
                  py::arg("path"))
      .def_property_readonly("sites", [](const ModelConfig& c) { return c.model.lattice.sites; })
      .def_property_readonly("local_dim",
                             [](const ModelConfig& c) { return c.model.lattice.local_dim; })
      .def_property_readonly("terms", [](const ModelConfig& c) { return c.model.term_count(); })
      .def_property_readonly("horizon", [](const ModelConfig& c) { return c.horizon; })
      .def_property_readonly("initial_state", [](const ModelConfig& c) { return c.initial_state; })
      .def_property_readonly("observable", [](const ModelConfig& c) { return c.observable; });

  m.def("analyze",
        [](const ModelConfig& cfg, long long m, double eps, double z, std::uint64_t seed,
           double grid_tol, int restarts, std::vector<int> m_sequence) {
          RunOptions opts = options_from_kwargs(m, eps, z, "exact", seed, 65536, grid_tol, restarts);
          if (!m_sequence.empty()) opts.m_sequence = std::move(m_sequence);
          return json_to_py(build_analyze_report(cfg, opts));
        },
        py::arg("config"), py::arg("m") = 0, py::arg("eps") = 0.1, py::arg("z") = 4.42,
        py::arg("seed") = 1, py::arg("grid_tol") = 1e-10, py::arg("restarts") = 32,
        py::arg("m_sequence") = std::vector<int>{},
        "Indivisibility measures, t_id estimate, bounds and the error sweep.");

  m.def("plan",
        [](const ModelConfig& cfg, long long m, double eps, double z, std::uint64_t seed,
           long long max_circuits, double grid_tol, int restarts) {
          return json_to_py(build_plan_report(
              cfg, options_from_kwargs(m, eps, z, "exact", seed, max_circuits, grid_tol, restarts)));
        },
        py::arg("config"), py::arg("m") = 0, py::arg("eps") = 0.1, py::arg("z") = 4.42,
        py::arg("seed") = 1, py::arg("max_circuits") = 65536, py::arg("grid_tol") = 1e-10,
        py::arg("restarts") = 32);

  m.def("simulate",
        [](const ModelConfig& cfg, long long m, double eps, double z, const std::string& mode,
           std::uint64_t seed, long long max_circuits, double grid_tol, int restarts) {
          return json_to_py(build_simulate_report(
              cfg, options_from_kwargs(m, eps, z, mode, seed, max_circuits, grid_tol, restarts)));
        },
        py::arg("config"), py::arg("m") = 0, py::arg("eps") = 0.1, py::arg("z") = 4.42,
        py::arg("mode") = "exact", py::arg("seed") = 1, py::arg("max_circuits") = 65536,
        py::arg("grid_tol") = 1e-10, py::arg("restarts") = 32);

  m.def("verify",
        [](const ModelConfig& cfg, long long m, double eps, double z, const std::string& mode,
           std::uint64_t seed, long long max_circuits, double grid_tol, int restarts) {
          return json_to_py(build_verify_report(
              cfg, options_from_kwargs(m, eps, z, mode, seed, max_circuits, grid_tol, restarts)));
        },
        py::arg("config"), py::arg("m") = 0, py::arg("eps") = 0.1, py::arg("z") = 4.42,
        py::arg("mode") = "exact", py::arg("seed") = 1, py::arg("max_circuits") = 65536,
        py::arg("grid_tol") = 1e-10, py::arg("restarts") = 32);

  // Low-level operations on transfer matrices (column-stacking convention).
  m.def("check_channel",
        [](const Mat& transfer, double tol) {
          const int d = static_cast<int>(std::lround(std::sqrt(double(transfer.rows()))));
          return check_channel(SuperOperator(d, transfer), tol);
        },
        py::arg("transfer"), py::arg("tol") = 1e-9,
        "True iff the transfer matrix describes a quantum channel (CPTP).");

  m.def("is_hptp",
        [](const Mat& transfer, double tol) {
          const int d = static_cast<int>(std::lround(std::sqrt(double(transfer.rows()))));
          return is_hptp(SuperOperator(d, transfer), tol);
        },
        py::arg("transfer"), py::arg("tol") = 1e-9);

  m.def("hptp_split",
        [](const Mat& transfer) {
          const int d = static_cast<int>(std::lround(std::sqrt(double(transfer.rows()))));
          const HptpSplit split = hptp_split(SuperOperator(d, transfer));
          return py::make_tuple(split.positive_part.kraus, split.negative_part.kraus);
        },
        py::arg("transfer"),
        "Difference-of-CP split; returns (positive Kraus list, negative Kraus list).");

  m.def("one_to_one_norm",
        [](const Mat& transfer, int restarts) {
          const int d = static_cast<int>(std::lround(std::sqrt(double(transfer.rows()))));
          NormEffort effort;
          effort.restarts = restarts;
          const NormEstimate est = one_to_one_norm(SuperOperator(d, transfer), effort);
          return py::make_tuple(est.lower, est.upper);
        },
        py::arg("transfer"), py::arg("restarts") = 32,
        "(lower, upper) estimate of the (1->1) norm.");

  m.def("to_choi",
        [](const Mat& transfer) {
          const int d = static_cast<int>(std::lround(std::sqrt(double(transfer.rows()))));
          return to_choi(SuperOperator(d, transfer)).matrix;
        },
        py::arg("transfer"));

  m.def("expm", &expm, py::arg("matrix"));
  m.def("kron", &kron, py::arg("a"), py::arg("b"));
  m.def("partial_trace", &partial_trace, py::arg("matrix"), py::arg("dims"), py::arg("keep"));
  m.def("trace_norm", &trace_norm, py::arg("matrix"));
  m.def("spectral_norm", &spectral_norm, py::arg("matrix"));

  m.def("slt_error_bound",
        [](int term_count, double beta_value, double t, int m, int n_tilde, int n_hat, double t_id,
           double c_tilde, const std::string& form) {
          BoundInputs in;
          in.term_count = term_count;
          in.beta = beta_value;
          in.t = t;
          in.m = m;
          in.n_tilde = n_tilde;
          in.n_hat = n_hat;
          in.t_id = t_id;
          in.c_tilde = c_tilde;
          return slt_error_bound(in, form == "tid" ? BoundForm::TidLimit : BoundForm::Measured);
        },
        py::arg("term_count"), py::arg("beta"), py::arg("t"), py::arg("m"),
        py::arg("n_tilde") = 0, py::arg("n_hat") = 0, py::arg("t_id") = 0.0,
        py::arg("c_tilde") = 0.0, py::arg("form") = "measured");

  m.def("required_slice_count",
        [](double eps, int term_count, double beta_value, double t, double t_id, double c_tilde,
           const std::string& rule) {
          const StepCount sc =
              required_slice_count(eps, term_count, beta_value, t, t_id, c_tilde,
                                   rule == "published" ? StepRule::Published : StepRule::Validated);
          return py::make_tuple(sc.m, sc.eps_admissible);
        },
        py::arg("eps"), py::arg("term_count"), py::arg("beta"), py::arg("t"),
        py::arg("t_id") = 0.0, py::arg("c_tilde") = 0.0, py::arg("rule") = "validated");

  m.def("wilson",
        [](long long n_success, long long n_trials, double z) {
          const WilsonEstimate w = wilson(n_success, n_trials, z);
          py::dict d;
          d["p_hat"] = w.p_hat;
          d["point"] = w.point;
          d["half_width"] = w.half_width;
          return d;
        },
        py::arg("n_success"), py::arg("n_trials"), py::arg("z") = 4.42);

  m.def("trials_needed", &trials_needed, py::arg("eps"), py::arg("z") = 4.42);

  m.attr("__version__") = "0.1.0";
}
