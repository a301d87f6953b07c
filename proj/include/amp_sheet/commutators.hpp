#pragma once

// Commutator and product inequalities checked on random trigonometric
// polynomials, the kernel form of [H;v]f, and the Hilbert transform identities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/estimates.hpp"
#include "amp_sheet/random_fields.hpp"
#include "amp_sheet/spectral_core.hpp"

namespace amp_sheet {

enum class CommutatorLemma { A1_comm_1, A1_comm_2, A1_comm_3, A2, A3, A4_prod, A4_comm4, A4_comm5, A5 };

inline const char* lemma_name(CommutatorLemma l) {
  switch (l) {
    case CommutatorLemma::A1_comm_1: return "A1_comm_1";
    case CommutatorLemma::A1_comm_2: return "A1_comm_2";
    case CommutatorLemma::A1_comm_3: return "A1_comm_3";
    case CommutatorLemma::A2: return "A2";
    case CommutatorLemma::A3: return "A3";
    case CommutatorLemma::A4_prod: return "A4_prod";
    case CommutatorLemma::A4_comm4: return "A4_comm4";
    case CommutatorLemma::A4_comm5: return "A4_comm5";
    case CommutatorLemma::A5: return "A5";
  }
  return "?";
}

inline CommutatorLemma parse_lemma(const std::string& s) {
  for (auto l : {CommutatorLemma::A1_comm_1, CommutatorLemma::A1_comm_2, CommutatorLemma::A1_comm_3,
                 CommutatorLemma::A2, CommutatorLemma::A3, CommutatorLemma::A4_prod, CommutatorLemma::A4_comm4,
                 CommutatorLemma::A4_comm5, CommutatorLemma::A5})
    if (s == lemma_name(l)) return l;
  throw ConfigError("unknown lemma '" + s + "'");
}

inline std::vector<CommutatorLemma> all_lemmas() {
  return {CommutatorLemma::A1_comm_1, CommutatorLemma::A1_comm_2, CommutatorLemma::A1_comm_3,
          CommutatorLemma::A2,        CommutatorLemma::A3,        CommutatorLemma::A4_prod,
          CommutatorLemma::A4_comm4,  CommutatorLemma::A4_comm5,  CommutatorLemma::A5};
}

/// Default parameter: s = 1 for the first family, m = 2 otherwise.
inline double default_lemma_parameter(CommutatorLemma l) {
  switch (l) {
    case CommutatorLemma::A1_comm_1:
    case CommutatorLemma::A1_comm_2:
    case CommutatorLemma::A1_comm_3: return 1.0;
    default: return 2.0;
  }
}

/// [d^k; v] f = d^k (v f) - v d^k f
inline SpectralField commutator_dk(int k, const SpectralField& v, const SpectralField& f) {
  return derivative(pointwise_product(v, f), k) - pointwise_product(v, derivative(f, k));
}

struct LemmaSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline void check_lemma_parameter(CommutatorLemma l, double param, int p) {
  switch (l) {
    case CommutatorLemma::A1_comm_1:
    case CommutatorLemma::A1_comm_2:
    case CommutatorLemma::A1_comm_3:
      if (!(param > 0.5)) throw RangeError(std::string(lemma_name(l)) + ": requires s > 1/2");
      break;
    default:
      if (!(param >= 1.0) || param != std::floor(param))
        throw RangeError(std::string(lemma_name(l)) + ": requires an integer m >= 1");
  }
  if (l == CommutatorLemma::A3 && p < 1) throw RangeError("A3: requires p >= 1");
}

/// Left and right sides (without the constant) of the selected inequality.
inline LemmaSides lemma_sides(CommutatorLemma l, double param, const SpectralField& v, const SpectralField& f,
                              int p = 1) {
  check_lemma_parameter(l, param, p);
  const int m = static_cast<int>(param);
  const double s = param;
  auto linf = [](const SpectralField& x) { return sup_norm(x, 8); };
  LemmaSides r;
  switch (l) {
    case CommutatorLemma::A1_comm_1:
      r.lhs = l2_norm(commutator_hv(v, f));
      r.rhs = sobolev_norm(v, s) * l2_norm(f);
      break;
    case CommutatorLemma::A1_comm_2:
      r.lhs = l2_norm(commutator_hv(v, derivative(f, 1)));
      r.rhs = sobolev_norm(derivative(v, 1), s) * l2_norm(f);
      break;
    case CommutatorLemma::A1_comm_3: {
      // [H;[H;v]] g = H([H;v] g) - [H;v] H g, with g = f_x
      SpectralField g = derivative(f, 1);
      SpectralField inner = hilbert(commutator_hv(v, g)) - commutator_hv(v, hilbert(g));
      r.lhs = l2_norm(derivative(inner, 1));
      r.rhs = sobolev_norm(derivative(v, 2), s) * l2_norm(f);
      break;
    }
    case CommutatorLemma::A2:
      r.lhs = sobolev_norm(commutator_hv(v, f), m);
      r.rhs = l2_norm(derivative(v, m)) * sobolev_norm(f, 1);
      break;
    case CommutatorLemma::A3:
      r.lhs = sobolev_norm(commutator_hv(v, derivative(f, p)), m);
      r.rhs = l2_norm(derivative(v, m + p)) * sobolev_norm(f, 1);
      break;
    case CommutatorLemma::A4_prod:
      r.lhs = sobolev_norm(pointwise_product(v, f), m);
      r.rhs = linf(v) * sobolev_norm(f, m) + sobolev_norm(v, m) * linf(f);
      break;
    case CommutatorLemma::A4_comm4:
      r.lhs = l2_norm(commutator_dk(m, v, f));
      r.rhs = linf(v) * sobolev_norm(f, m) + sobolev_norm(v, m) * linf(f);
      break;
    case CommutatorLemma::A4_comm5:
      r.lhs = l2_norm(commutator_dk(m, v, f));
      r.rhs = linf(derivative(v, 1)) * sobolev_norm(f, m - 1) + sobolev_norm(v, m) * linf(f);
      break;
    case CommutatorLemma::A5: {
      // [H;[d^m;v]] d^2 f = H([d^m;v] f_xx) - [d^m;v] H f_xx
      SpectralField fxx = derivative(f, 2);
      SpectralField c = hilbert(commutator_dk(m, v, fxx)) - commutator_dk(m, v, hilbert(fxx));
      r.lhs = l2_norm(c);
      r.rhs = sobolev_norm(derivative(v, 1), m) * sobolev_norm(derivative(f, 1), 1);
      break;
    }
  }
  return r;
}

/// Derivative orders of (v, f) that enter the right side; the ensemble decay is chosen one above,
/// and at least 2, so every norm involved converges as the bandwidth grows.
inline std::pair<double, double> lemma_decay(CommutatorLemma l, double param, int p = 1) {
  double ov = 0, of = 0;
  switch (l) {
    case CommutatorLemma::A1_comm_1: ov = param; break;
    case CommutatorLemma::A1_comm_2: ov = param + 1; break;
    case CommutatorLemma::A1_comm_3: ov = param + 2; break;
    case CommutatorLemma::A2: ov = param; of = 1; break;
    case CommutatorLemma::A3: ov = param + p; of = 1; break;
    case CommutatorLemma::A4_prod:
    case CommutatorLemma::A4_comm4: ov = param; of = param; break;
    case CommutatorLemma::A4_comm5: ov = param; of = param - 1; break;
    case CommutatorLemma::A5: ov = param + 1; of = 2; break;
  }
  return {std::max(2.0, ov + 1.0), std::max(2.0, of + 1.0)};
}

struct CommutatorCampaignOptions {
  std::vector<int> resolutions{256, 512};
  double rho = 0.0;  // 0: per-lemma default from lemma_decay
  int p = 1;         // derivative order on f for A3
  int jobs = 1;
  double drift_tolerance = 0.10;
};

struct CommutatorReport {
  EstimateReport report;
  std::vector<double> sup_ratio;  // per resolution
  double drift = 0.0;
};

/// Run `count` independent tasks over an index range with `jobs` threads; results are stored by index.
template <class F>
void parallel_for(int count, int jobs, F&& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += jobs) body(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Supremum over random draws of lhs/rhs at each resolution, and its relative drift.
inline CommutatorReport estimate_commutator_constant(CommutatorLemma lemma, double param, int samples,
                                                     std::uint64_t seed, const CommutatorCampaignOptions& opt = {}) {
  check_lemma_parameter(lemma, param, opt.p);
  if (samples < 1) throw RangeError("estimate_commutator_constant: samples must be >= 1");
  auto [rv, rf] = lemma_decay(lemma, param, opt.p);
  if (opt.rho > 0.0) rv = rf = opt.rho;
  CommutatorReport out;
  for (int n : opt.resolutions) {
    TorusGrid grid(n);
    const int B = grid.max_mode() / 2;
    std::vector<double> ratio(static_cast<size_t>(samples)), lhs(ratio.size()), rhs(ratio.size());
    parallel_for(samples, opt.jobs, [&](int i) {
      auto rng = draw_engine(seed, static_cast<std::uint64_t>(i));
      SpectralField v = random_real_field(grid, {B, rv, false, 1.0}, rng);
      auto rng_f = draw_engine(seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(i));
      SpectralField f = random_real_field(grid, {B, rf, true, 1.0}, rng_f);
      auto s = lemma_sides(lemma, param, v, f, opt.p);
      lhs[static_cast<size_t>(i)] = s.lhs;
      rhs[static_cast<size_t>(i)] = s.rhs;
      ratio[static_cast<size_t>(i)] = s.rhs > 0.0 ? s.lhs / s.rhs : 0.0;
    });
    size_t best = static_cast<size_t>(std::max_element(ratio.begin(), ratio.end()) - ratio.begin());
    out.sup_ratio.push_back(ratio[best]);
    if (out.sup_ratio.size() == 1) out.report.set_sides(lhs[best], rhs[best]);
  }
  const double s0 = out.sup_ratio.front();
  double drift = 0.0;
  for (double s : out.sup_ratio) drift = std::max(drift, s0 > 0.0 ? std::abs(s - s0) / s0 : 0.0);
  out.drift = drift;
  auto& r = out.report;
  r.estimate_id = std::string("lemma") + lemma_name(lemma);
  r.samples = samples;
  r.seed = static_cast<long long>(seed);
  r.params = {{"param", param}, {"rho_v", rv}, {"rho_f", rf}};
  if (lemma == CommutatorLemma::A3) r.params["p"] = opt.p;
  for (size_t i = 0; i < opt.resolutions.size(); ++i)
    r.extra["sup_ratio_n=" + std::to_string(opt.resolutions[i])] = out.sup_ratio[i];
  r.extra["resolution_drift"] = drift;
  bool finite = std::all_of(out.sup_ratio.begin(), out.sup_ratio.end(), [](double x) { return std::isfinite(x); });
  r.pass = finite && drift < opt.drift_tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Kernel form

/// Lambda(k, l) = i(-sgn k + sgn l)
inline cplx lambda_kernel(int k, int l) {
  auto sg = [](int x) { return static_cast<double>((x > 0) - (x < 0)); };
  return cplx(0.0, -sg(k) + sg(l));
}

/// hat([H;v]f)(k) = (1/2pi) sum_l Lambda(k,l) vhat(k-l) fhat(l), brute force.
inline SpectralField commutator_kernel_sum(const SpectralField& v, const SpectralField& f, bool swapped = false) {
  check_same_grid(v, f);
  const int K = v.max_mode();
  SpectralField out(v.grid(), false);
  for (int k = -K; k <= K; ++k) {
    cplx acc(0.0);
    for (int l = -K; l <= K; ++l) {
      cplx lam = swapped ? -lambda_kernel(l, k) : lambda_kernel(k, l);
      if (lam == cplx(0.0)) continue;
      acc += lam * v[k - l] * f[l];
    }
    out.at(k) = acc / two_pi;
  }
  return out;
}

struct KernelCheck {
  double max_discrepancy = 0.0;     // commutator vs kernel sum
  double antisymmetry_defect = 0.0;  // kernel sum vs the one written with -Lambda(l,k)
};

inline KernelCheck lambda_kernel_check(const SpectralField& v, const SpectralField& f) {
  check_same_grid(v, f);
  if (v.bandwidth() + f.bandwidth() > v.max_mode())
    throw PreconditionError("lambda_kernel_check: combined bandwidth exceeds the grid band");
  SpectralField direct = commutator_hv(v, f);
  SpectralField kern = commutator_kernel_sum(v, f);
  SpectralField swapped = commutator_kernel_sum(v, f, true);
  return {max_coeff_diff(direct, kern), max_coeff_diff(kern, swapped)};
}

// ---------------------------------------------------------------------------
// Hilbert identities

struct IdentityReport {
  std::map<std::string, double> max_error;
  double tolerance = 1e-11;
  int samples = 0;
  long long seed = 0;
  int n = 0;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const IdentityReport& r) {
  j = nlohmann::json{{"max_error", r.max_error}, {"tolerance", r.tolerance}, {"samples", r.samples},
                     {"seed", r.seed},           {"n", r.n},                 {"pass", r.pass}};
}

inline IdentityReport verify_hilbert_identities(int samples, std::uint64_t seed, int n = 128, int jobs = 1) {
  TorusGrid grid(n);
  const int B = grid.max_mode() / 2;
  const std::vector<std::string> names{"derivative_commutation", "product_identity", "H_squared",
                                       "antisymmetry",           "commutator_adjoint", "H_squared_mean",
                                       "sin_cos_closure"};
  std::vector<std::vector<double>> err(static_cast<size_t>(samples), std::vector<double>(names.size(), 0.0));
  parallel_for(samples, jobs, [&](int i) {
    auto rng = draw_engine(seed, static_cast<std::uint64_t>(i));
    RandomFieldSpec spec{B, 2.0, true, 1.0};
    SpectralField f = random_real_field(grid, spec, rng);
    SpectralField g = random_real_field(grid, spec, rng);
    SpectralField h = random_real_field(grid, {B, 2.0, false, 1.0}, rng);
    auto& e = err[static_cast<size_t>(i)];
    SpectralField Hf = hilbert(f), Hg = hilbert(g);
    e[0] = l2_norm(derivative(Hf, 1) - hilbert(derivative(f, 1)));
    e[1] = l2_norm(hilbert(pointwise_product(f, g) - pointwise_product(Hf, Hg)) -
                   (pointwise_product(f, Hg) + pointwise_product(Hf, g)));
    e[2] = l2_norm(hilbert(Hf) + f);
    e[3] = std::abs(inner_product(Hf, g) + inner_product(f, Hg));
    e[4] = std::abs(inner_product(commutator_vh(h, f), g) - inner_product(f, commutator_vh(h, g)));
    // With a mean: H^2 h = -h + mean(h).
    SpectralField hh = hilbert(hilbert(h)) + h;
    hh.at(0) -= h[0];
    e[5] = l2_norm(hh);
    if (i == 0) {
      double c = 0.0;
      for (int k = 1; k <= 5; ++k) {
        c = std::max(c, l2_norm(hilbert(cos_mode(grid, k)) - sin_mode(grid, k)));
        c = std::max(c, l2_norm(hilbert(sin_mode(grid, k)) + cos_mode(grid, k)));
      }
      SpectralField one = from_modes(grid, {TrigMode{0, 1.0, 0.0}});
      c = std::max(c, l2_norm(hilbert(hilbert(one))));
      e[6] = c;
    }
  });
  IdentityReport r;
  r.samples = samples;
  r.seed = static_cast<long long>(seed);
  r.n = n;
  for (size_t j = 0; j < names.size(); ++j) {
    double m = 0.0;
    for (const auto& e : err) m = std::max(m, e[j]);
    r.max_error[names[j]] = m;
  }
  r.pass = std::all_of(r.max_error.begin(), r.max_error.end(),
                       [&](const auto& kv) { return kv.second < r.tolerance; });
  return r;
}

}  // namespace amp_sheet
