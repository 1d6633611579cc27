#pragma once

#include <string>
#include <vector>

namespace openslt {

/// Scalar time dependence restricted to a declared, serializable family.
/// Arbitrary callables are deliberately not representable so that every model
/// can round-trip through the config format.
class TimeFunction {
 public:
  enum class Kind { Constant, Polynomial, Sinusoid, Tanh, Piecewise, Table };

  TimeFunction() : kind_(Kind::Constant), params_{0.0} {}

  static TimeFunction constant(double c);
  static TimeFunction polynomial(std::vector<double> coeffs);  // a0 + a1 t + a2 t^2 + ...
  static TimeFunction sinusoid(double amp, double freq, double phase);  // amp*sin(freq*t + phase)
  static TimeFunction tanh_shaped(double amp, double rate, double offset);  // amp*tanh(rate*(t-offset))
  /// Pieces cover [0, ends.back()] without gaps; piece i applies on
  /// [ends[i-1], ends[i]) with ends[-1] = 0.
  static TimeFunction piecewise(std::vector<double> ends, std::vector<TimeFunction> pieces);
  /// Tabulated values with linear interpolation; clamped outside the knots.
  static TimeFunction table(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<TimeFunction>& pieces() const { return pieces_; }
  const std::vector<double>& piece_ends() const { return piece_ends_; }

  /// Interior points of (t0, t1) where the function may be non-smooth
  /// (piecewise boundaries, table knots); integrators split there.
  void collect_breakpoints(double t0, double t1, std::vector<double>& out) const;

  bool is_constant() const;
  std::string kind_name() const;

 private:
  Kind kind_;
  std::vector<double> params_;
  std::vector<TimeFunction> pieces_;
  std::vector<double> piece_ends_;
};

}  // namespace openslt
