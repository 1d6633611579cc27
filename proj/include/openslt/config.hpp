#pragma once

#include <string>
#include <vector>

#include "openslt/model.hpp"

namespace openslt {

/// Declarative model description parsed from JSON. Complex entries are
/// [re, im] pairs, site indices zero-based, time dependence restricted to the
/// declared function family; unknown fields are rejected.
struct ModelConfig {
  int schema_version = 1;
  KLocalLiouvillian model;
  double horizon = 1.0;
  Mat initial_state;
  Mat observable;
  std::string initial_state_name;  // preset or "literal"
  std::string observable_name;     // Pauli string or "literal"
  long dimension_cap = 64;
};

/// Parse failure: every (path, reason) pair found, not just the first.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> errors_);
  std::vector<std::string> errors;
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

}  // namespace openslt
