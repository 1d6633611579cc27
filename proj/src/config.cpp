#include "openslt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace openslt {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream out;
  out << "config validation failed:";
  for (const auto& e : errors) out << "\n  " << e;
  return out.str();
}

class Parser {
 public:
  explicit Parser(const json& root) : root_(root) {}

  ModelConfig run() {
    ModelConfig cfg;
    expect_object(root_, "$",
                  {"schema_version", "lattice", "terms", "horizon", "initial_state", "observable",
                   "dimension_cap"});

    cfg.schema_version = get_int(root_, "$", "schema_version", 1);
    if (cfg.schema_version != 1) error("$.schema_version", "unsupported schema version");

    if (require(root_, "$", "lattice")) {
      const json& lat = root_["lattice"];
      expect_object(lat, "$.lattice", {"sites", "local_dim"});
      cfg.model.lattice.sites = get_int(lat, "$.lattice", "sites", 1);
      cfg.model.lattice.local_dim = get_int(lat, "$.lattice", "local_dim", 2);
      if (cfg.model.lattice.sites < 1) error("$.lattice.sites", "must be at least 1");
      if (cfg.model.lattice.local_dim < 2) error("$.lattice.local_dim", "must be at least 2");
    }

    if (root_.contains("dimension_cap")) cfg.dimension_cap = get_int(root_, "$", "dimension_cap", 64);
    if (cfg.model.lattice.dim() > cfg.dimension_cap)
      error("$.lattice", "global dimension exceeds the dimension cap");

    cfg.horizon = get_number(root_, "$", "horizon", 1.0);
    if (!(cfg.horizon > 0)) error("$.horizon", "must be positive");

    if (require(root_, "$", "terms")) {
      const json& terms = root_["terms"];
      if (!terms.is_array() || terms.empty()) {
        error("$.terms", "must be a non-empty array");
      } else {
        for (std::size_t i = 0; i < terms.size(); ++i)
          parse_term(terms[i], "$.terms[" + std::to_string(i) + "]", cfg);
      }
    }
    cfg.model.k = 1;
    for (const auto& term : cfg.model.terms)
      cfg.model.k = std::max(cfg.model.k, static_cast<int>(term.support.size()));

    parse_state(cfg);
    parse_observable(cfg);

    if (!errors_.empty()) throw ConfigError(errors_);

    const ValidationReport report = validate_model(cfg.model, cfg.horizon);
    if (!report.ok) {
      for (const auto& issue : report.issues)
        errors_.push_back((issue.term_index < 0
                               ? std::string("$.terms")
                               : "$.terms[" + std::to_string(issue.term_index) + "]") +
                          ": " + issue.what);
      throw ConfigError(errors_);
    }
    return cfg;
  }

 private:
  const json& root_;
  std::vector<std::string> errors_;

  void error(const std::string& path, const std::string& reason) {
    errors_.push_back(path + ": " + reason);
  }

  bool require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) {
      error(path + "." + key, "missing required field");
      return false;
    }
    return true;
  }

  void expect_object(const json& obj, const std::string& path,
                     std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      error(path, "must be an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* a : allowed)
        if (it.key() == a) known = true;
      if (!known) error(path + "." + it.key(), "unknown field");
    }
  }

  int get_int(const json& obj, const std::string& path, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
      error(path + "." + key, "must be an integer");
      return fallback;
    }
    return obj[key].get<int>();
  }

  double get_number(const json& obj, const std::string& path, const std::string& key,
                    double fallback) {
    if (!obj.contains(key)) {
      error(path + "." + key, "missing required field");
      return fallback;
    }
    if (!obj[key].is_number()) {
      error(path + "." + key, "must be a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  Cplx parse_entry(const json& entry, const std::string& path) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number()) {
      error(path, "complex entry must be a [re, im] pair");
      return Cplx(0, 0);
    }
    return Cplx(entry[0].get<double>(), entry[1].get<double>());
  }

  Mat parse_matrix(const json& lit, const std::string& path) {
    if (!lit.is_array() || lit.empty()) {
      error(path, "matrix literal must be a non-empty array of rows");
      return Mat::Zero(1, 1);
    }
    const std::size_t rows = lit.size();
    std::size_t cols = 0;
    if (lit[0].is_array()) cols = lit[0].size();
    if (cols == 0) {
      error(path, "matrix rows must be non-empty arrays");
      return Mat::Zero(1, 1);
    }
    Mat out = Mat::Zero(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!lit[r].is_array() || lit[r].size() != cols) {
        error(path + "[" + std::to_string(r) + "]", "all rows must have the same length");
        continue;
      }
      for (std::size_t c = 0; c < cols; ++c)
        out(r, c) = parse_entry(lit[r][c], path + "[" + std::to_string(r) + "][" +
                                               std::to_string(c) + "]");
    }
    return out;
  }

  TimeFunction parse_timefn(const json& fn, const std::string& path) {
    expect_object(fn, path, {"kind", "params", "pieces"});
    if (!fn.is_object() || !fn.contains("kind") || !fn["kind"].is_string()) {
      error(path + ".kind", "time function needs a string kind");
      return TimeFunction::constant(0.0);
    }
    const std::string kind = fn["kind"].get<std::string>();
    std::vector<double> params;
    if (fn.contains("params")) {
      if (!fn["params"].is_array()) {
        error(path + ".params", "must be an array of numbers");
      } else {
        for (const auto& p : fn["params"]) {
          if (!p.is_number()) {
            error(path + ".params", "must contain numbers only");
            return TimeFunction::constant(0.0);
          }
          params.push_back(p.get<double>());
        }
      }
    }
    try {
      if (kind == "constant") {
        if (params.size() != 1) throw std::invalid_argument("constant takes one parameter");
        return TimeFunction::constant(params[0]);
      }
      if (kind == "polynomial") return TimeFunction::polynomial(params);
      if (kind == "sinusoid") {
        if (params.size() != 3)
          throw std::invalid_argument("sinusoid takes [amp, freq, phase]");
        return TimeFunction::sinusoid(params[0], params[1], params[2]);
      }
      if (kind == "tanh") {
        if (params.size() != 3) throw std::invalid_argument("tanh takes [amp, rate, offset]");
        return TimeFunction::tanh_shaped(params[0], params[1], params[2]);
      }
      if (kind == "table") {
        if (params.size() < 4 || params.size() % 2 != 0)
          throw std::invalid_argument("table takes interleaved [t0, v0, t1, v1, ...]");
        std::vector<double> times, values;
        for (std::size_t i = 0; i < params.size(); i += 2) {
          times.push_back(params[i]);
          values.push_back(params[i + 1]);
        }
        return TimeFunction::table(times, values);
      }
      if (kind == "piecewise") {
        if (!fn.contains("pieces") || !fn["pieces"].is_array() || fn["pieces"].empty()) {
          error(path + ".pieces", "piecewise needs a non-empty pieces array");
          return TimeFunction::constant(0.0);
        }
        std::vector<double> ends;
        std::vector<TimeFunction> pieces;
        for (std::size_t i = 0; i < fn["pieces"].size(); ++i) {
          const json& piece = fn["pieces"][i];
          const std::string ppath = path + ".pieces[" + std::to_string(i) + "]";
          expect_object(piece, ppath, {"end", "fn"});
          if (!piece.contains("end") || !piece["end"].is_number()) {
            error(ppath + ".end", "piece needs a numeric end time");
            return TimeFunction::constant(0.0);
          }
          if (!piece.contains("fn")) {
            error(ppath + ".fn", "piece needs a time function");
            return TimeFunction::constant(0.0);
          }
          ends.push_back(piece["end"].get<double>());
          pieces.push_back(parse_timefn(piece["fn"], ppath + ".fn"));
        }
        return TimeFunction::piecewise(ends, pieces);
      }
      error(path + ".kind", "unknown time-function kind '" + kind + "'");
    } catch (const std::invalid_argument& e) {
      error(path, e.what());
    }
    return TimeFunction::constant(0.0);
  }

  TimeMatrix parse_time_matrix(const json& node, const std::string& path) {
    if (node.is_array()) return TimeMatrix(parse_matrix(node, path));
    if (node.is_object() && node.contains("components")) {
      expect_object(node, path, {"components"});
      const json& comps = node["components"];
      if (!comps.is_array() || comps.empty()) {
        error(path + ".components", "must be a non-empty array");
        return TimeMatrix(Mat::Zero(1, 1));
      }
      std::vector<Mat> parts;
      std::vector<TimeFunction> coeffs;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cpath = path + ".components[" + std::to_string(i) + "]";
        expect_object(comps[i], cpath, {"matrix", "coeff"});
        if (!comps[i].contains("matrix") || !comps[i].contains("coeff")) {
          error(cpath, "component needs matrix and coeff");
          continue;
        }
        parts.push_back(parse_matrix(comps[i]["matrix"], cpath + ".matrix"));
        coeffs.push_back(parse_timefn(comps[i]["coeff"], cpath + ".coeff"));
      }
      if (parts.empty()) return TimeMatrix(Mat::Zero(1, 1));
      for (const auto& p : parts)
        if (p.rows() != parts.front().rows() || p.cols() != parts.front().cols()) {
          error(path + ".components", "component matrices must share a shape");
          return TimeMatrix(parts.front());
        }
      return TimeMatrix(std::move(parts), std::move(coeffs));
    }
    error(path, "expected a matrix literal or {components: [...]}");
    return TimeMatrix(Mat::Zero(1, 1));
  }

  void parse_term(const json& term, const std::string& path, ModelConfig& cfg) {
    expect_object(term, path, {"support", "hamiltonian", "lindblads", "raw_generator"});
    if (!term.is_object()) return;

    LocalTerm out;
    if (!term.contains("support") || !term["support"].is_array() || term["support"].empty()) {
      error(path + ".support", "must be a non-empty array of site indices");
      return;
    }
    for (const auto& s : term["support"]) {
      if (!s.is_number_integer()) {
        error(path + ".support", "site indices must be integers");
        return;
      }
      const int site = s.get<int>();
      if (site < 0 || site >= cfg.model.lattice.sites) {
        error(path + ".support", "site index " + std::to_string(site) + " out of range for " +
                                     std::to_string(cfg.model.lattice.sites) + " sites");
        return;
      }
      out.support.push_back(site);
    }
    const int d = out.support_dim(cfg.model.lattice.local_dim);

    const bool has_raw = term.contains("raw_generator");
    const bool has_gksl = term.contains("hamiltonian") || term.contains("lindblads");
    if (has_raw && has_gksl) {
      error(path, "term must be either GKSL (hamiltonian/lindblads) or raw_generator, not both");
      return;
    }

    if (has_raw) {
      const json& raw = term["raw_generator"];
      expect_object(raw, path + ".raw_generator", {"components"});
      RawTerm rt;
      if (!raw.is_object() || !raw.contains("components") || !raw["components"].is_array() ||
          raw["components"].empty()) {
        error(path + ".raw_generator.components", "must be a non-empty array");
        return;
      }
      for (std::size_t i = 0; i < raw["components"].size(); ++i) {
        const std::string cpath = path + ".raw_generator.components[" + std::to_string(i) + "]";
        const json& comp = raw["components"][i];
        expect_object(comp, cpath, {"transfer", "coeff"});
        if (!comp.contains("transfer")) {
          error(cpath + ".transfer", "missing transfer matrix");
          return;
        }
        const Mat t = parse_matrix(comp["transfer"], cpath + ".transfer");
        if (t.rows() != static_cast<Eigen::Index>(d) * d || t.rows() != t.cols()) {
          error(cpath + ".transfer", "transfer matrix must be D^2 x D^2 for the support space");
          return;
        }
        rt.components.emplace_back(d, t);
        rt.coeffs.push_back(comp.contains("coeff") ? parse_timefn(comp["coeff"], cpath + ".coeff")
                                                   : TimeFunction::constant(1.0));
      }
      out.form = std::move(rt);
    } else {
      GkslTerm gk;
      if (term.contains("hamiltonian")) {
        gk.hamiltonian = parse_time_matrix(term["hamiltonian"], path + ".hamiltonian");
        if (gk.hamiltonian.dim() != d)
          error(path + ".hamiltonian", "must be " + std::to_string(d) + "x" + std::to_string(d));
      }
      if (term.contains("lindblads")) {
        if (!term["lindblads"].is_array()) {
          error(path + ".lindblads", "must be an array");
          return;
        }
        for (std::size_t i = 0; i < term["lindblads"].size(); ++i) {
          const std::string lpath = path + ".lindblads[" + std::to_string(i) + "]";
          const json& lb = term["lindblads"][i];
          expect_object(lb, lpath, {"matrix", "rate"});
          if (!lb.is_object() || !lb.contains("matrix")) {
            error(lpath + ".matrix", "missing Lindblad matrix");
            continue;
          }
          TimeMatrix op = parse_time_matrix(lb["matrix"], lpath + ".matrix");
          if (op.dim() != d)
            error(lpath + ".matrix", "must be " + std::to_string(d) + "x" + std::to_string(d));
          gk.lindblad_ops.push_back(std::move(op));
          gk.rates.push_back(lb.contains("rate") ? parse_timefn(lb["rate"], lpath + ".rate")
                                                 : TimeFunction::constant(1.0));
        }
      }
      if (gk.hamiltonian.parts.empty() && gk.lindblad_ops.empty()) {
        error(path, "GKSL term needs a hamiltonian or at least one Lindblad operator");
        return;
      }
      out.form = std::move(gk);
    }
    cfg.model.terms.push_back(std::move(out));
  }

  void parse_state(ModelConfig& cfg) {
    const long d = cfg.model.lattice.dim();
    if (!root_.contains("initial_state")) {
      cfg.initial_state_name = "ground";
      cfg.initial_state = Mat::Zero(d, d);
      cfg.initial_state(0, 0) = 1.0;
      return;
    }
    const json& st = root_["initial_state"];
    if (st.is_string()) {
      const std::string name = st.get<std::string>();
      cfg.initial_state_name = name;
      if (name == "ground") {
        cfg.initial_state = Mat::Zero(d, d);
        cfg.initial_state(0, 0) = 1.0;
      } else if (name == "maximally_mixed") {
        cfg.initial_state = Mat::Identity(d, d) / static_cast<double>(d);
      } else {
        error("$.initial_state", "unknown preset '" + name + "'");
      }
      return;
    }
    cfg.initial_state_name = "literal";
    cfg.initial_state = parse_matrix(st, "$.initial_state");
    if (cfg.initial_state.rows() != d || cfg.initial_state.cols() != d)
      error("$.initial_state", "must be " + std::to_string(d) + "x" + std::to_string(d));
    else if (std::abs(cfg.initial_state.trace() - Cplx(1, 0)) > 1e-9)
      error("$.initial_state", "must have unit trace");
    else if (hermiticity_defect(cfg.initial_state) > 1e-9)
      error("$.initial_state", "must be Hermitian");
  }

  void parse_observable(ModelConfig& cfg) {
    const long d = cfg.model.lattice.dim();
    if (!root_.contains("observable")) {
      cfg.observable_name = "literal";
      cfg.observable = Mat::Identity(d, d);
      return;
    }
    const json& ob = root_["observable"];
    if (ob.is_string()) {
      const std::string name = ob.get<std::string>();
      cfg.observable_name = name;
      if (cfg.model.lattice.local_dim != 2) {
        error("$.observable", "Pauli strings require local dimension 2");
        return;
      }
      if (static_cast<int>(name.size()) != cfg.model.lattice.sites) {
        error("$.observable", "Pauli string length must equal the site count");
        return;
      }
      Mat acc = Mat::Identity(1, 1);
      for (char c : name) {
        Mat factor;
        switch (c) {
          case 'I': factor = identity(2); break;
          case 'X': factor = pauli_x(); break;
          case 'Y': factor = pauli_y(); break;
          case 'Z': factor = pauli_z(); break;
          default:
            error("$.observable", std::string("unknown Pauli letter '") + c + "'");
            return;
        }
        acc = kron(acc, factor);
      }
      cfg.observable = acc;
      return;
    }
    cfg.observable_name = "literal";
    cfg.observable = parse_matrix(ob, "$.observable");
    if (cfg.observable.rows() != d || cfg.observable.cols() != d)
      error("$.observable", "must be " + std::to_string(d) + "x" + std::to_string(d));
    else if (hermiticity_defect(cfg.observable) > 1e-9 * std::max(1.0, cfg.observable.norm()))
      error("$.observable", "must be Hermitian");
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors_)
    : std::runtime_error(join_errors(errors_)), errors(std::move(errors_)) {}

ModelConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("$: JSON syntax error: ") + e.what()});
  }
  return Parser(root).run();
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"$: cannot open config file '" + path + "'"});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace openslt
