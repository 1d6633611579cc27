#include "openslt/timefn.hpp"

#include <cmath>
#include <stdexcept>

namespace openslt {

TimeFunction TimeFunction::constant(double c) {
  TimeFunction f;
  f.kind_ = Kind::Constant;
  f.params_ = {c};
  return f;
}

TimeFunction TimeFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("polynomial: needs at least one coefficient");
  TimeFunction f;
  f.kind_ = Kind::Polynomial;
  f.params_ = std::move(coeffs);
  return f;
}

TimeFunction TimeFunction::sinusoid(double amp, double freq, double phase) {
  TimeFunction f;
  f.kind_ = Kind::Sinusoid;
  f.params_ = {amp, freq, phase};
  return f;
}

TimeFunction TimeFunction::tanh_shaped(double amp, double rate, double offset) {
  TimeFunction f;
  f.kind_ = Kind::Tanh;
  f.params_ = {amp, rate, offset};
  return f;
}

TimeFunction TimeFunction::piecewise(std::vector<double> ends, std::vector<TimeFunction> pieces) {
  if (ends.empty() || ends.size() != pieces.size())
    throw std::invalid_argument("piecewise: one end time per piece required");
  for (size_t i = 0; i < ends.size(); ++i) {
    const double prev = i == 0 ? 0.0 : ends[i - 1];
    if (!(ends[i] > prev)) throw std::invalid_argument("piecewise: end times must increase");
    if (pieces[i].kind() == Kind::Piecewise)
      throw std::invalid_argument("piecewise: nesting piecewise in piecewise is not supported");
  }
  TimeFunction f;
  f.kind_ = Kind::Piecewise;
  f.params_.clear();
  f.piece_ends_ = std::move(ends);
  f.pieces_ = std::move(pieces);
  return f;
}

TimeFunction TimeFunction::table(std::vector<double> times, std::vector<double> values) {
  if (times.size() < 2 || times.size() != values.size())
    throw std::invalid_argument("table: need at least two (time, value) knots");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("table: times must increase");
  TimeFunction f;
  f.kind_ = Kind::Table;
  f.params_.clear();
  f.params_.reserve(2 * times.size());
  for (size_t i = 0; i < times.size(); ++i) {
    f.params_.push_back(times[i]);
    f.params_.push_back(values[i]);
  }
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return params_[0];
    case Kind::Polynomial: {
      double acc = 0.0;
      for (size_t i = params_.size(); i-- > 0;) acc = acc * t + params_[i];
      return acc;
    }
    case Kind::Sinusoid:
      return params_[0] * std::sin(params_[1] * t + params_[2]);
    case Kind::Tanh:
      return params_[0] * std::tanh(params_[1] * (t - params_[2]));
    case Kind::Piecewise: {
      for (size_t i = 0; i < piece_ends_.size(); ++i)
        if (t < piece_ends_[i] || i + 1 == piece_ends_.size()) return pieces_[i](t);
      return pieces_.back()(t);
    }
    case Kind::Table: {
      const size_t knots = params_.size() / 2;
      if (t <= params_[0]) return params_[1];
      if (t >= params_[2 * (knots - 1)]) return params_[2 * (knots - 1) + 1];
      for (size_t i = 1; i < knots; ++i) {
        const double t0 = params_[2 * (i - 1)], t1 = params_[2 * i];
        if (t <= t1) {
          const double v0 = params_[2 * (i - 1) + 1], v1 = params_[2 * i + 1];
          return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
      }
      return params_.back();
    }
  }
  return 0.0;
}

void TimeFunction::collect_breakpoints(double t0, double t1, std::vector<double>& out) const {
  if (kind_ == Kind::Piecewise) {
    for (double b : piece_ends_)
      if (b > t0 && b < t1) out.push_back(b);
    for (const auto& p : pieces_) p.collect_breakpoints(t0, t1, out);
  } else if (kind_ == Kind::Table) {
    for (size_t i = 0; i < params_.size() / 2; ++i) {
      const double b = params_[2 * i];
      if (b > t0 && b < t1) out.push_back(b);
    }
  }
}

bool TimeFunction::is_constant() const { return kind_ == Kind::Constant; }

std::string TimeFunction::kind_name() const {
  switch (kind_) {
    case Kind::Constant: return "constant";
    case Kind::Polynomial: return "polynomial";
    case Kind::Sinusoid: return "sinusoid";
    case Kind::Tanh: return "tanh";
    case Kind::Piecewise: return "piecewise";
    case Kind::Table: return "table";
  }
  return "?";
}

}  // namespace openslt
