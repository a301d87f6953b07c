#pragma once

// Fourier analysis on the torus [0, 2pi).
//
// Coefficient convention: fhat(k) = (2pi/n) sum_j f(x_j) e^{-i k x_j}, so
// f(x) = (1/2pi) sum_k fhat(k) e^{i k x}.  Modes k = -K..K with K = n/2 - 1 are
// stored; the Nyquist mode is dropped.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/fft.hpp"

namespace amp_sheet {

using cplx = std::complex<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

class TorusGrid {
 public:
  explicit TorusGrid(int n = 4) : n_(n) {
    if (n < 4 || n % 2 != 0)
      throw RangeError("TorusGrid: n must be even and >= 4, got " + std::to_string(n));
  }

  int n() const { return n_; }
  int max_mode() const { return n_ / 2 - 1; }
  int num_modes() const { return n_ - 1; }
  double node(int j) const { return two_pi * j / n_; }

  std::vector<double> nodes() const {
    std::vector<double> x(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) x[static_cast<size_t>(j)] = node(j);
    return x;
  }

  bool operator==(const TorusGrid&) const = default;

 private:
  int n_;
};

class SpectralField {
 public:
  SpectralField() : SpectralField(TorusGrid(4)) {}
  explicit SpectralField(const TorusGrid& grid, bool real = true)
      : grid_(grid), coeffs_(static_cast<size_t>(grid.num_modes()), cplx(0.0)), real_(real) {}

  SpectralField(const TorusGrid& grid, std::vector<cplx> coeffs, bool real)
      : grid_(grid), coeffs_(std::move(coeffs)), real_(real) {
    if (static_cast<int>(coeffs_.size()) != grid.num_modes())
      throw InputShapeError("SpectralField: expected " + std::to_string(grid.num_modes()) +
                            " coefficients, got " + std::to_string(coeffs_.size()));
  }

  const TorusGrid& grid() const { return grid_; }
  int max_mode() const { return grid_.max_mode(); }
  bool is_real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  // Out-of-band modes read as zero.
  cplx operator[](int k) const {
    int K = max_mode();
    if (k < -K || k > K) return cplx(0.0);
    return coeffs_[static_cast<size_t>(k + K)];
  }
  cplx& at(int k) {
    int K = max_mode();
    if (k < -K || k > K) throw RangeError("SpectralField: mode out of range");
    return coeffs_[static_cast<size_t>(k + K)];
  }

  std::span<const cplx> coefficients() const { return coeffs_; }
  std::span<cplx> coefficients() { return coeffs_; }

  double mean() const { return (*this)[0].real() / two_pi; }

  // Largest |k| with |fhat(k)| > tol; 0 for constants and the zero field.
  int bandwidth(double tol = 0.0) const {
    for (int k = max_mode(); k > 0; --k)
      if (std::abs((*this)[k]) > tol || std::abs((*this)[-k]) > tol) return k;
    return 0;
  }

  // Lowest and highest k with a nonzero coefficient; {1, 0} for the zero field.
  std::pair<int, int> support() const {
    const int K = max_mode();
    int lo = 1, hi = 0;
    for (int k = -K; k <= K; ++k)
      if ((*this)[k] != cplx(0.0)) {
        lo = k;
        break;
      }
    for (int k = K; k >= -K; --k)
      if ((*this)[k] != cplx(0.0)) {
        hi = k;
        break;
      }
    return {lo, hi};
  }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == cplx(0.0); });
  }

  // max_k |conj(fhat(k)) - fhat(-k)|
  double hermitian_defect() const {
    double d = 0.0;
    for (int k = 0; k <= max_mode(); ++k) d = std::max(d, std::abs(std::conj((*this)[k]) - (*this)[-k]));
    return d;
  }

  // Enforce exact Hermitian symmetry (averaging the pair) and mark as real.
  void symmetrize() {
    int K = max_mode();
    at(0) = cplx((*this)[0].real(), 0.0);
    for (int k = 1; k <= K; ++k) {
      cplx a = 0.5 * ((*this)[k] + std::conj((*this)[-k]));
      at(k) = a;
      at(-k) = std::conj(a);
    }
    real_ = true;
  }

  void zero_mean() { at(0) = 0.0; }

  SpectralField& operator+=(const SpectralField& o) {
    check_grid(o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_grid(o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (auto& c : coeffs_) c *= a;
    if (a.imag() != 0.0) real_ = false;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

  void check_grid(const SpectralField& o) const {
    if (!(grid_ == o.grid_))
      throw GridMismatchError("grid mismatch: n=" + std::to_string(grid_.n()) + " vs n=" +
                              std::to_string(o.grid_.n()));
  }

 private:
  TorusGrid grid_;
  std::vector<cplx> coeffs_;
  bool real_;
};

inline void check_same_grid(const SpectralField& a, const SpectralField& b) { a.check_grid(b); }

// ---------------------------------------------------------------------------
// Construction helpers

/// Sum over (k, a, b) of a cos(kx) + b sin(kx); k = 0 contributes the constant a.
struct TrigMode {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
};

inline SpectralField from_modes(const TorusGrid& grid, std::span<const TrigMode> modes) {
  SpectralField f(grid, true);
  for (const auto& m : modes) {
    int k = std::abs(m.k);
    if (k > grid.max_mode()) throw RangeError("from_modes: mode beyond grid bandwidth");
    double b = m.k < 0 ? -m.b : m.b;
    if (k == 0) {
      f.at(0) += two_pi * m.a;
    } else {
      f.at(k) += std::numbers::pi * cplx(m.a, -b);
      f.at(-k) += std::numbers::pi * cplx(m.a, b);
    }
  }
  return f;
}

inline SpectralField from_modes(const TorusGrid& grid, std::initializer_list<TrigMode> modes) {
  return from_modes(grid, std::span<const TrigMode>(modes.begin(), modes.size()));
}

inline SpectralField cos_mode(const TorusGrid& grid, int k, double a = 1.0) {
  return from_modes(grid, {TrigMode{k, a, 0.0}});
}
inline SpectralField sin_mode(const TorusGrid& grid, int k, double b = 1.0) {
  return from_modes(grid, {TrigMode{k, 0.0, b}});
}
inline SpectralField exp_mode(const TorusGrid& grid, int k, cplx c = 1.0) {
  SpectralField f(grid, false);
  f.at(k) = two_pi * c;
  return f;
}

// ---------------------------------------------------------------------------
// Analysis / synthesis

inline SpectralField analyze(const TorusGrid& grid, std::span<const cplx> samples, bool real = false) {
  const int n = grid.n();
  if (static_cast<int>(samples.size()) != n)
    throw InputShapeError("analyze: expected " + std::to_string(n) + " samples, got " +
                          std::to_string(samples.size()));
  std::vector<cplx> in(samples.begin(), samples.end()), out(static_cast<size_t>(n));
  detail::dft_forward(in, out);
  SpectralField f(grid, real);
  const int K = grid.max_mode();
  const double scale = two_pi / n;
  for (int k = -K; k <= K; ++k) f.at(k) = scale * out[static_cast<size_t>((k + n) % n)];
  if (real) f.symmetrize();
  return f;
}

inline SpectralField analyze(const TorusGrid& grid, std::span<const double> samples) {
  if (static_cast<int>(samples.size()) != grid.n())
    throw InputShapeError("analyze: expected " + std::to_string(grid.n()) + " samples, got " +
                          std::to_string(samples.size()));
  std::vector<cplx> c(samples.begin(), samples.end());
  return analyze(grid, c, true);
}

inline SpectralField analyze_function(const TorusGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> s(static_cast<size_t>(grid.n()));
  for (int j = 0; j < grid.n(); ++j) s[static_cast<size_t>(j)] = f(grid.node(j));
  return analyze(grid, s);
}

namespace detail {

// Point values of f on an m-point grid (m >= n - 1), i.e. sum_k fhat(k) e^{ikx_j}
// without the 1/2pi factor.
inline std::vector<cplx> physical_unscaled(const SpectralField& f, int m) {
  std::vector<cplx> spec(static_cast<size_t>(m), cplx(0.0)), out(static_cast<size_t>(m));
  const int K = f.max_mode();
  for (int k = -K; k <= K; ++k) spec[static_cast<size_t>((k + m) % m)] = f[k];
  dft_backward(spec, out);
  return out;
}

}  // namespace detail

inline std::vector<cplx> synthesize(const SpectralField& f) {
  auto v = detail::physical_unscaled(f, f.grid().n());
  for (auto& c : v) c /= two_pi;
  return v;
}

inline std::vector<double> synthesize_real(const SpectralField& f) {
  auto v = detail::physical_unscaled(f, f.grid().n());
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i].real() / two_pi;
  return r;
}

/// Point values on an oversampled grid of factor*n nodes.
inline std::vector<cplx> synthesize_oversampled(const SpectralField& f, int factor) {
  auto v = detail::physical_unscaled(f, f.grid().n() * std::max(1, factor));
  for (auto& c : v) c /= two_pi;
  return v;
}

// ---------------------------------------------------------------------------
// Fourier multipliers

class MultiplierSymbol {
 public:
  using Function = std::function<cplx(int)>;

  MultiplierSymbol(Function values, double order, double bound, bool reality_preserving = true)
      : values_(std::move(values)), order_(order), bound_(bound), real_(reality_preserving) {
    if (!(bound_ >= 0.0)) throw RangeError("MultiplierSymbol: bound must be >= 0");
  }

  /// Symbol with the tightest bound C over |k| <= max_mode for the given order.
  static MultiplierSymbol certified(Function values, double order, int max_mode) {
    double c = 0.0;
    bool real = true;
    for (int k = -max_mode; k <= max_mode; ++k) {
      cplx a = values(k);
      c = std::max(c, std::abs(a) * std::pow(1.0 + std::abs(k), -order));
      if (std::abs(a - std::conj(values(-k))) > 0.0) real = false;
    }
    return MultiplierSymbol(std::move(values), order, c, real);
  }

  static MultiplierSymbol identity() {
    return MultiplierSymbol([](int) { return cplx(1.0); }, 0.0, 1.0);
  }
  static MultiplierSymbol hilbert() {
    return MultiplierSymbol([](int k) { return cplx(0.0, k > 0 ? -1.0 : (k < 0 ? 1.0 : 0.0)); }, 0.0, 1.0);
  }
  // (ik)^p ; |k|^p <= (1+|k|)^p so C = 1 at order p.
  static MultiplierSymbol derivative(int p) {
    return MultiplierSymbol(
        [p](int k) {
          cplx r(1.0);
          for (int i = 0; i < p; ++i) r *= cplx(0.0, static_cast<double>(k));
          return r;
        },
        static_cast<double>(p), 1.0);
  }
  static MultiplierSymbol projection(int N) {
    return MultiplierSymbol([N](int k) { return std::abs(k) <= N ? cplx(1.0) : cplx(0.0); }, 0.0, 1.0);
  }

  cplx operator()(int k) const { return values_(k); }
  double order() const { return order_; }
  double bound() const { return bound_; }
  bool preserves_reality() const { return real_; }

  /// Check the order/bound certificate on |k| <= max_mode.
  bool certificate_holds(int max_mode, double rel_tol = 1e-14) const {
    for (int k = -max_mode; k <= max_mode; ++k)
      if (std::abs(values_(k)) * std::pow(1.0 + std::abs(k), -order_) > bound_ * (1.0 + rel_tol)) return false;
    return true;
  }

  friend MultiplierSymbol compose(const MultiplierSymbol& a, const MultiplierSymbol& b) {
    return MultiplierSymbol([fa = a.values_, fb = b.values_](int k) { return fa(k) * fb(k); },
                            a.order_ + b.order_, a.bound_ * b.bound_, a.real_ && b.real_);
  }

 private:
  Function values_;
  double order_;
  double bound_;
  bool real_;
};

inline SpectralField apply_multiplier(const MultiplierSymbol& op, const SpectralField& f) {
  SpectralField out(f.grid(), f.is_real() && op.preserves_reality());
  const int K = f.max_mode();
  for (int k = -K; k <= K; ++k) out.at(k) = op(k) * f[k];
  return out;
}

inline SpectralField hilbert(const SpectralField& f) {
  SpectralField out(f.grid(), f.is_real());
  const int K = f.max_mode();
  for (int k = 1; k <= K; ++k) {
    cplx a = f[k], b = f[-k];
    out.at(k) = cplx(a.imag(), -a.real());   // -i a
    out.at(-k) = cplx(-b.imag(), b.real());  // +i b
  }
  return out;
}

inline SpectralField derivative(const SpectralField& f, int p = 1) {
  if (p < 0) throw RangeError("derivative: order must be nonnegative");
  SpectralField out = f;
  const int K = f.max_mode();
  for (int k = -K; k <= K; ++k) {
    cplx c = f[k];
    for (int i = 0; i < p; ++i) c *= cplx(0.0, static_cast<double>(k));
    out.at(k) = c;
  }
  return out;
}

inline SpectralField project(const SpectralField& f, int N) {
  if (N < 0 || N > f.max_mode())
    throw RangeError("project: cutoff " + std::to_string(N) + " outside [0, " + std::to_string(f.max_mode()) + "]");
  SpectralField out = f;
  for (int k = N + 1; k <= f.max_mode(); ++k) out.at(k) = out.at(-k) = 0.0;
  return out;
}

/// Copy coefficients onto another grid (truncating or zero-padding the band).
inline SpectralField resample(const SpectralField& f, const TorusGrid& grid) {
  SpectralField out(grid, f.is_real());
  const int K = std::min(f.max_mode(), grid.max_mode());
  for (int k = -K; k <= K; ++k) out.at(k) = f[k];
  return out;
}

// ---------------------------------------------------------------------------
// Products

enum class ProductRule { dealiased, aliased };

inline SpectralField pointwise_product(const SpectralField& f, const SpectralField& g,
                                       ProductRule rule = ProductRule::dealiased) {
  check_same_grid(f, g);
  const bool real = f.is_real() && g.is_real();
  // A constant factor is a scaling; doing it exactly keeps zero-base cases exact.
  if (f.bandwidth() == 0) {
    SpectralField out = (f[0] / two_pi) * g;
    out.set_real(real && (f[0].imag() == 0.0));
    return out;
  }
  if (g.bandwidth() == 0) {
    SpectralField out = (g[0] / two_pi) * f;
    out.set_real(real && (g[0].imag() == 0.0));
    return out;
  }
  auto [flo, fhi] = f.support();
  auto [glo, ghi] = g.support();
  if (flo > fhi || glo > ghi) return SpectralField(f.grid(), real);
  const int n = f.grid().n();
  const int m = rule == ProductRule::dealiased ? 3 * n / 2 : n;
  auto F = detail::physical_unscaled(f, m);
  auto G = detail::physical_unscaled(g, m);
  for (size_t i = 0; i < F.size(); ++i) F[i] *= G[i];
  std::vector<cplx> P(F.size());
  detail::dft_forward(F, P);
  SpectralField out(f.grid(), real);
  const int K = f.max_mode();
  const double scale = 1.0 / (two_pi * m);
  // Coefficients outside the exact support of the convolution are pure round-off; drop them.
  const int lo = rule == ProductRule::dealiased ? flo + glo : -K;
  const int hi = rule == ProductRule::dealiased ? fhi + ghi : K;
  for (int k = std::max(-K, lo); k <= std::min(K, hi); ++k) out.at(k) = scale * P[static_cast<size_t>((k + m) % m)];
  if (real) out.symmetrize();
  return out;
}

/// [v;H]f = v H[f] - H[v f]
inline SpectralField commutator_vh(const SpectralField& v, const SpectralField& f,
                                   ProductRule rule = ProductRule::dealiased) {
  check_same_grid(v, f);
  return pointwise_product(v, hilbert(f), rule) - hilbert(pointwise_product(v, f, rule));
}

/// [H;a]b = H[a b] - a H[b]
inline SpectralField commutator_hv(const SpectralField& a, const SpectralField& b,
                                   ProductRule rule = ProductRule::dealiased) {
  return -commutator_vh(a, b, rule);
}

// ---------------------------------------------------------------------------
// Norms

inline double sobolev_norm(const SpectralField& f, double s) {
  double acc = 0.0;
  const int K = f.max_mode();
  for (int k = -K; k <= K; ++k) acc += std::pow(1.0 + std::abs(k), 2.0 * s) * std::norm(f[k]);
  return std::sqrt(acc / two_pi);
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

inline bool has_zero_mean(const SpectralField& f, double tol = 1e-12) {
  double scale = 1.0;
  for (auto c : f.coefficients()) scale = std::max(scale, std::abs(c));
  return std::abs(f[0]) <= tol * scale;
}

inline double homogeneous_norm(const SpectralField& f, int s) {
  if (s < 0) throw RangeError("homogeneous_norm: order must be nonnegative");
  if (!has_zero_mean(f)) throw DomainError("homogeneous_norm: field has nonzero mean");
  double acc = 0.0;
  const int K = f.max_mode();
  for (int k = 1; k <= K; ++k) {
    double w = std::pow(static_cast<double>(k), 2.0 * s);
    acc += w * (std::norm(f[k]) + std::norm(f[-k]));
  }
  return std::sqrt(acc / two_pi);
}

inline cplx inner_product(const SpectralField& f, const SpectralField& g) {
  check_same_grid(f, g);
  cplx acc(0.0);
  const int K = f.max_mode();
  for (int k = -K; k <= K; ++k) acc += f[k] * std::conj(g[k]);
  return acc / two_pi;
}

/// Max |f| over an oversampled grid (factor 4 by default).
inline double sup_norm(const SpectralField& f, int oversample = 4) {
  double m = 0.0;
  for (auto c : synthesize_oversampled(f, oversample)) m = std::max(m, std::abs(c));
  return m;
}

inline double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
  check_same_grid(a, b);
  double d = 0.0;
  for (int k = -a.max_mode(); k <= a.max_mode(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace amp_sheet
