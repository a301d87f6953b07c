#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/spectral_core.hpp"

namespace amp_sheet {

/// Pair (phi, phi_t) at one time.
struct StepState {
  SpectralField phi;
  SpectralField phit;

  StepState() = default;
  explicit StepState(const TorusGrid& g) : phi(g), phit(g) {}
  StepState(SpectralField p, SpectralField pt) : phi(std::move(p)), phit(std::move(pt)) {
    check_same_grid(phi, phit);
  }

  const TorusGrid& grid() const { return phi.grid(); }

  StepState& operator+=(const StepState& o) {
    phi += o.phi;
    phit += o.phit;
    return *this;
  }
  StepState& operator*=(double a) {
    phi *= a;
    phit *= a;
    return *this;
  }
  friend StepState operator+(StepState a, const StepState& b) { return a += b; }
  friend StepState operator*(double s, StepState a) { return a *= s; }
};

namespace detail {
inline void check_increasing(const std::vector<double>& t, double tn) {
  if (!t.empty() && !(tn > t.back())) throw InputShapeError("times must be strictly increasing");
}
inline bool uniform_mesh(const std::vector<double>& t, double rel_tol) {
  if (t.size() < 3) return true;
  double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (size_t i = 1; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - h) > rel_tol * h) return false;
  return true;
}
}  // namespace detail

/// Time-indexed sequence of single fields (g, F^a, residuals, ...).
class FieldSeries {
 public:
  FieldSeries() = default;
  FieldSeries(std::vector<double> times, std::vector<SpectralField> fields)
      : times_(std::move(times)), fields_(std::move(fields)) {
    if (times_.size() != fields_.size()) throw InputShapeError("FieldSeries: times/fields length mismatch");
    for (size_t i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) throw InputShapeError("FieldSeries: times must be strictly increasing");
      check_same_grid(fields_[0], fields_[i]);
    }
  }

  void push_back(double t, SpectralField f) {
    detail::check_increasing(times_, t);
    if (!fields_.empty()) check_same_grid(fields_.front(), f);
    times_.push_back(t);
    fields_.push_back(std::move(f));
  }

  size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double time(size_t i) const { return times_.at(i); }
  const std::vector<double>& times() const { return times_; }
  const SpectralField& operator[](size_t i) const { return fields_.at(i); }
  SpectralField& operator[](size_t i) { return fields_.at(i); }
  const std::vector<SpectralField>& fields() const { return fields_; }
  const TorusGrid& grid() const {
    if (fields_.empty()) throw InputShapeError("FieldSeries: empty");
    return fields_.front().grid();
  }
  bool is_uniform(double rel_tol = 1e-9) const { return detail::uniform_mesh(times_, rel_tol); }

 private:
  std::vector<double> times_;
  std::vector<SpectralField> fields_;
};

class Trajectory {
 public:
  Trajectory() = default;

  void push_back(double t, StepState s) {
    detail::check_increasing(times_, t);
    if (!states_.empty()) check_same_grid(states_.front().phi, s.phi);
    times_.push_back(t);
    states_.push_back(std::move(s));
  }

  size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double time(size_t i) const { return times_.at(i); }
  const std::vector<double>& times() const { return times_; }
  const StepState& operator[](size_t i) const { return states_.at(i); }
  StepState& operator[](size_t i) { return states_.at(i); }
  const StepState& back() const { return states_.back(); }
  const TorusGrid& grid() const {
    if (states_.empty()) throw InputShapeError("Trajectory: empty");
    return states_.front().phi.grid();
  }

  bool is_uniform(double rel_tol = 1e-9) const { return detail::uniform_mesh(times_, rel_tol); }
  void flag_nonuniform(bool f = true) { nonuniform_ok_ = f; }
  bool nonuniform_flagged() const { return nonuniform_ok_; }

  double dt() const {
    if (times_.size() < 2) throw InputShapeError("Trajectory: need at least two times for dt");
    if (!is_uniform()) throw InputShapeError("Trajectory: non-uniform time step");
    return (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
  }

  FieldSeries phi_series() const {
    std::vector<SpectralField> f;
    f.reserve(states_.size());
    for (const auto& s : states_) f.push_back(s.phi);
    return FieldSeries(times_, std::move(f));
  }
  FieldSeries phit_series() const {
    std::vector<SpectralField> f;
    f.reserve(states_.size());
    for (const auto& s : states_) f.push_back(s.phit);
    return FieldSeries(times_, std::move(f));
  }

 private:
  std::vector<double> times_;
  std::vector<StepState> states_;
  bool nonuniform_ok_ = false;
};

/// Apply f -> op(f) at every time.
template <class Op>
FieldSeries map_series(const FieldSeries& s, Op&& op) {
  std::vector<SpectralField> out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) out.push_back(op(s[i]));
  return FieldSeries(s.times(), std::move(out));
}

/// Cubic (4-point Lagrange) interpolation in time; stencil shifted one-sided at the ends.
/// Constant extrapolation outside the mesh.
inline SpectralField interpolate_cubic(const FieldSeries& s, double t) {
  const auto& ts = s.times();
  const size_t n = ts.size();
  if (n == 0) throw InputShapeError("interpolate_cubic: empty series");
  if (n == 1 || t <= ts.front()) return s[0];
  if (t >= ts.back()) return s[n - 1];
  size_t i = static_cast<size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  if (t == ts[i]) return s[i];
  if (n < 4) {
    double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return (1.0 - w) * s[i] + w * s[i + 1];
  }
  size_t lo = i >= 1 ? i - 1 : 0;
  if (lo + 3 >= n) lo = n - 4;
  SpectralField out(s[lo].grid(), s[lo].is_real());
  for (size_t a = lo; a < lo + 4; ++a) {
    double w = 1.0;
    for (size_t b = lo; b < lo + 4; ++b)
      if (b != a) w *= (t - ts[b]) / (ts[a] - ts[b]);
    out += w * s[a];
  }
  return out;
}

}  // namespace amp_sheet
