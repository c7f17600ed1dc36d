#pragma once

// Thermal second moments of a localized mode and its purity.
//
// Moments are returned as covariance entries (vacuum-normalized: a pure mode has
// Sigma_VV * Sigma_WW = 1):
//   Sigma_VV = c_n int dk k^{n-1} coth(beta w/2) |v~(k)|^2 / w
//   Sigma_WW = c_n int dk k^{n-1} coth(beta w/2) |w~(k)|^2 * w
// with c_n the unit-sphere area (2 for n = 1) and unitary radial amplitudes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "profiles.hpp"
#include "quadrature.hpp"
#include "symplectic.hpp"

namespace mixedness {

enum class Quadrature { V, W };

namespace detail {

struct TailModel {
  SpectralEnvelope env;
  int dim;
  double mass;
  double beta;
  Quadrature which;

  /// Power-law convergence of the UV tail for this moment.
  bool converges() const {
    return which == Quadrature::V ? env.power > dim - 1 : env.power > dim + 1;
  }

  /// Bound on int_K^inf k^{n-1} g(k) |amp|^2 dk (no surface factor).
  double bound(double K) const {
    if (K < env.k_from || K <= 0.0) return std::numeric_limits<double>::infinity();
    const double ct = coth_half(beta, K);  // omega >= K, coth decreasing
    const double p = env.power;
    const int n = dim;
    if (which == Quadrature::V) return ct * env.coeff * std::pow(K, n - 1 - p) / (p - n + 1);
    double b = std::pow(K, n + 1 - p) / (p - n - 1);
    if (mass > 0.0) b += mass * std::pow(K, n - p) / (p - n);
    return ct * env.coeff * b;
  }
};

struct RadialResult {
  double value;
  double k_end;
};

// int_{k_lo}^{k_cut or inf} f(k) dk with panels graded geometrically from the
// IR up to `width`, then uniform. Without a cutoff the loop stops once the tail
// bound drops below rel_tol/10 of the accumulated value.
template <class F, class Tail>
RadialResult integrate_radial(F&& f, Tail&& tail, double k_lo, double ir_scale, double width,
                              std::optional<double> k_cut, double rel_tol, double baseline = 0.0) {
  const auto& rule = quad::GaussLegendre<20>::instance();
  quad::CompensatedSum acc;
  const double stop = k_cut.value_or(std::numeric_limits<double>::infinity());
  double a = k_lo;
  if (a <= 0.0) {
    const double floor = 1e-6 * std::min(ir_scale, width);
    const double b = std::min(floor, stop);
    acc.add(rule.integrate(f, 0.0, b));
    a = b;
  }
  auto done = [&](double k) {
    if (k >= stop) return true;
    if (k_cut) return false;
    return tail(k) <= 0.1 * rel_tol * std::abs(baseline + acc.value());
  };
  while (a < width && a < stop) {
    const double b = std::min({2.0 * a, width, stop});
    acc.add(rule.integrate(f, a, b));
    a = b;
  }
  const long long max_panels = 200'000'000LL;
  for (long long i = 0; !done(a); ++i) {
    if (i >= max_panels) {
      throw NumericalError("spectral quadrature did not reach its tail bound",
                           tail(a) / std::abs(baseline + acc.value()));
    }
    const double b = std::min(a + width, stop);
    acc.add(rule.integrate(f, a, b));
    a = b;
  }
  return {acc.value(), a};
}

inline double ir_scale(const FieldSpec& field, const ModeProfile& p) {
  double s = p.panel_width();
  if (field.mass > 0.0) s = std::min(s, field.mass);
  if (!field.vacuum()) s = std::min(s, 1.0 / field.beta);
  return s;
}

inline void check_ir(const ModeProfile& p, const FieldSpec& field, Quadrature which) {
  if (field.regulator == Regulator::Cavity || field.mass > 0.0 || which == Quadrature::W) return;
  const int q = p.ir_power();
  const int exponent = field.vacuum() ? field.dim - 2 + q : field.dim - 3 + q;
  if (exponent <= -1) {
    throw IrDivergenceError("IR divergence in <V^2> for " + p.describe() + " in dim " +
                            std::to_string(field.dim) + " without a mass or cavity regulator");
  }
}

inline double moment_weight(const FieldSpec& field, Quadrature which, double k) {
  const double w = field.omega(k);
  const double c = coth_half(field.beta, w);
  return which == Quadrature::V ? c / w : c * w;
}

inline double amplitude_sq(const ModeProfile& p, Quadrature which, double k) {
  const auto a = p.fourier_amplitude(k);
  return which == Quadrature::V ? a.v * a.v : a.w * a.w;
}

inline std::optional<double> explicit_cutoff(const ModeProfile& p, const QuadratureConfig& cfg) {
  if (!cfg.uv_cutoff_kl) return std::nullopt;
  return *cfg.uv_cutoff_kl / p.ell();
}

inline void check_uv(const TailModel& tail, const ModeProfile& p, const QuadratureConfig& cfg,
                     Quadrature which) {
  if (tail.converges() || cfg.uv_cutoff_kl || cfg.cavity_jmax) return;
  throw UvDivergenceError(std::string("UV divergence in <") + (which == Quadrature::V ? "V" : "W") +
                          "^2> for " + p.describe() + "; supply an explicit UV cutoff");
}

inline double continuum_moment(const ModeProfile& p, const FieldSpec& field, const QuadratureConfig& cfg,
                               Quadrature which) {
  const int n = field.dim;
  const double cn = surface_factor(n);
  auto f = [&](double k) {
    const double measure = (n == 1) ? 1.0 : std::pow(k, n - 1);
    return measure * moment_weight(field, which, k) * amplitude_sq(p, which, k);
  };
  TailModel tail{p.envelope(), n, field.mass, field.beta, which};
  check_uv(tail, p, cfg, which);
  auto tail_fn = [&](double K) { return tail.bound(K); };
  const auto r = integrate_radial(f, tail_fn, 0.0, ir_scale(field, p), p.panel_width(),
                                  explicit_cutoff(p, cfg), cfg.rel_tol);
  return cn * r.value;
}

// Dirichlet cavity [0, L] with the mode centred at L/2. Only odd j couple:
//   Sigma = sum_{odd j} (4 pi / L) g(k_j) |amp(k_j)|^2,  k_j = j pi / L.
// Past kDirectTerms odd modes the remainder is replaced by its continuum
// (midpoint-rule) counterpart 2 int F dk, which is accurate once the mode
// spacing is far below every spectral scale.
inline constexpr long long kDirectTerms = 200'000;

inline double cavity_moment(const ModeProfile& p, const FieldSpec& field, const QuadratureConfig& cfg,
                            Quadrature which) {
  if (p.dim() != 1) throw ValidationError("cavity regulator requires a 1D profile");
  const double L = field.cavity_length;
  if (!(L > 2.0 * p.ell())) throw ValidationError("cavity length must exceed the mode support 2*ell");
  const double dk = std::numbers::pi / L;
  auto F = [&](double k) { return moment_weight(field, which, k) * amplitude_sq(p, which, k); };
  TailModel tail{p.envelope(), 1, field.mass, field.beta, which};
  check_uv(tail, p, cfg, which);

  // Highest admitted mode index, if explicitly limited.
  std::optional<long double> j_limit;
  if (cfg.cavity_jmax) j_limit = static_cast<long double>(*cfg.cavity_jmax);
  if (auto kc = explicit_cutoff(p, cfg)) {
    const long double jc = std::floor(static_cast<long double>(*kc) / dk);
    j_limit = j_limit ? std::min(*j_limit, jc) : jc;
  }

  quad::CompensatedSum acc;
  long long j = 1;
  for (long long t = 0; t < kDirectTerms; ++t, j += 2) {
    if (j_limit && j > *j_limit) return 4.0 * dk * acc.value();
    acc.add(F(j * dk));
    if (!j_limit && t % 256 == 255) {
      const double K = (j + 1) * dk;
      if (2.0 * tail.bound(K) / (2.0 * dk) <= 0.1 * cfg.rel_tol * std::abs(acc.value())) {
        return 4.0 * dk * acc.value();
      }
    }
  }
  // Remainder: odd j >= j0 represents [(j-1) dk, (j+1) dk].
  const double k_from = (j - 1) * dk;
  std::optional<double> k_cut;
  if (j_limit) k_cut = static_cast<double>((*j_limit + 1) * dk);
  double sum = 4.0 * dk * acc.value();
  if (k_cut && *k_cut <= k_from) return sum;
  // Scaled by 1/(2 dk) so the remainder is on the same footing as the summed terms.
  auto G = [&](double k) { return F(k) / (2.0 * dk); };
  auto tail_fn = [&](double K) { return tail.bound(K) / (2.0 * dk); };
  const auto r = integrate_radial(G, tail_fn, k_from, ir_scale(field, p), p.panel_width(), k_cut,
                                  cfg.rel_tol, acc.value());
  sum += 4.0 * dk * r.value;
  return sum;
}

inline double moment(const ModeProfile& profile, const FieldSpec& field, const QuadratureConfig& cfg,
                     Quadrature which) {
  field.validate();
  cfg.validate();
  if (profile.dim() != field.dim)
    throw ValidationError("profile dim " + std::to_string(profile.dim()) + " does not match field dim " +
                          std::to_string(field.dim));
  check_ir(profile, field, which);
  const ModeProfile p = normalize(profile);
  return field.regulator == Regulator::Cavity ? cavity_moment(p, field, cfg, which)
                                              : continuum_moment(p, field, cfg, which);
}

}  // namespace detail

/// Profiles are normalized internally, so any amplitude convention may be passed.
inline double second_moment_V(const ModeProfile& profile, const FieldSpec& field,
                              const QuadratureConfig& cfg = {}) {
  return detail::moment(profile, field, cfg, Quadrature::V);
}

inline double second_moment_W(const ModeProfile& profile, const FieldSpec& field,
                              const QuadratureConfig& cfg = {}) {
  return detail::moment(profile, field, cfg, Quadrature::W);
}

struct ModePurity {
  double nu;
  double purity;
  double sigma_vv;
  double sigma_ww;
};

inline ModePurity mode_purity(const ModeProfile& profile, const FieldSpec& field,
                              const QuadratureConfig& cfg = {}) {
  const double vv = second_moment_V(profile, field, cfg);
  const double ww = second_moment_W(profile, field, cfg);
  const double nu = symplectic::mode_nu(vv, ww, 0.0);
  if (nu < 1.0 - 1e-6) {
    throw NumericalError("mode_purity: nu = " + std::to_string(nu) + " violates the uncertainty bound",
                         1.0 - nu);
  }
  return {nu, 1.0 / nu, vv, ww};
}

// ---------------------------------------------------------------------------
// Purity grids

/// Log-spaced axis [min, max] with `count` samples (count = 1 gives {min}).
struct AxisSpec {
  double min;
  double max;
  int count;

  std::vector<double> samples() const {
    if (count < 1) throw ValidationError("axis count must be >= 1");
    if (!(min > 0.0) || !(max >= min)) throw ValidationError("axis range must satisfy 0 < min <= max");
    std::vector<double> s(static_cast<std::size_t>(count));
    if (count == 1) {
      s[0] = min;
      return s;
    }
    const double a = std::log(min), b = std::log(max);
    for (int i = 0; i < count; ++i) s[i] = std::exp(a + (b - a) * i / (count - 1));
    s.front() = min;
    s.back() = max;
    return s;
  }
};

enum class CellStatus : std::uint8_t { Ok = 0, Validation = 1, IrDivergence = 2, UvDivergence = 3, Domain = 4, Numerical = 5 };

inline const char* cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::Validation: return "validation";
    case CellStatus::IrDivergence: return "ir_divergence";
    case CellStatus::UvDivergence: return "uv_divergence";
    case CellStatus::Domain: return "domain";
    case CellStatus::Numerical: return "numerical";
  }
  return "?";
}

/// Axis meaning depends on the regulator (all dimensionless):
///   Mass:   x = T/M,      y = ell*M      (units M = 1)
///   Cavity: x = T*L,      y = ell/L      (units L = 1)
///   None:   x = T*ell_0,  y = ell/ell_0  (ell_0 = the template profile's ell)
struct PurityGrid {
  std::vector<double> x_axis;
  std::vector<double> y_axis;
  std::vector<double> values;        // row-major [y][x]
  std::vector<CellStatus> status;    // same layout
  std::string profile;
  Regulator regulator = Regulator::None;
  int dim = 1;

  double at(std::size_t iy, std::size_t ix) const { return values[iy * x_axis.size() + ix]; }
  CellStatus status_at(std::size_t iy, std::size_t ix) const { return status[iy * x_axis.size() + ix]; }
  bool all_ok() const {
    return std::all_of(status.begin(), status.end(), [](CellStatus s) { return s == CellStatus::Ok; });
  }
};

struct GridPoint {
  ModeProfile profile;
  FieldSpec field;
};

/// Physical (profile, field) for the grid cell at axis values (x, y).
inline GridPoint grid_point(const ModeProfile& profile, const FieldSpec& tmpl, double x, double y) {
  FieldSpec f = tmpl;
  switch (tmpl.regulator) {
    case Regulator::Mass:
      f.mass = 1.0;
      f.beta = 1.0 / x;
      return {profile.with_ell(y), f};
    case Regulator::Cavity:
      f.cavity_length = 1.0;
      f.beta = 1.0 / x;
      return {profile.with_ell(y), f};
    case Regulator::None:
      f.beta = profile.ell() / x;
      return {profile.with_ell(y * profile.ell()), f};
  }
  throw ValidationError("unknown regulator");
}

inline PurityGrid purity_grid(const ModeProfile& profile, const FieldSpec& field_template, const AxisSpec& x_range,
                              const AxisSpec& y_range, const QuadratureConfig& cfg = {}, int workers = 1) {
  cfg.validate();
  PurityGrid g;
  g.x_axis = x_range.samples();
  g.y_axis = y_range.samples();
  g.profile = profile.describe();
  g.regulator = field_template.regulator;
  g.dim = field_template.dim;
  const std::size_t nx = g.x_axis.size(), ny = g.y_axis.size();
  g.values.assign(nx * ny, std::numeric_limits<double>::quiet_NaN());
  g.status.assign(nx * ny, CellStatus::Ok);
  parallel_for(nx * ny, workers, [&](std::size_t idx) {
    const std::size_t iy = idx / nx, ix = idx % nx;
    try {
      const auto pt = grid_point(profile, field_template, g.x_axis[ix], g.y_axis[iy]);
      g.values[idx] = mode_purity(pt.profile, pt.field, cfg).purity;
    } catch (const IrDivergenceError&) {
      g.status[idx] = CellStatus::IrDivergence;
    } catch (const UvDivergenceError&) {
      g.status[idx] = CellStatus::UvDivergence;
    } catch (const DomainError&) {
      g.status[idx] = CellStatus::Domain;
    } catch (const ValidationError&) {
      g.status[idx] = CellStatus::Validation;
    } catch (const NumericalError&) {
      g.status[idx] = CellStatus::Numerical;
    }
  });
  return g;
}

// ---------------------------------------------------------------------------
// Minimal-mixedness objective for the z_{m,kappa} family (massless, dim 1):
//   u = (Sigma_VV + Sigma_WW) / 2 >= nu >= 1.

inline double u_objective(int m, double kappa, double ell, double beta, const QuadratureConfig& cfg = {}) {
  if (m < 3) throw ValidationError("u_objective requires m >= 3");
  const auto p = ModeProfile::zkappa(m, kappa, ell);
  FieldSpec f;
  f.dim = 1;
  f.beta = beta;
  return 0.5 * (second_moment_V(p, f, cfg) + second_moment_W(p, f, cfg));
}

struct MinMixEntry {
  int m;
  double kappa;
  double u;
};

struct MinMixResult {
  MinMixEntry best;
  std::vector<MinMixEntry> table;  // evaluation order: m outer, kappa inner
};

/// Grid scan over every (m, kappa) pair; ties resolve to the earliest entry.
inline MinMixResult min_mixedness_scan(double ell, double beta, const std::vector<int>& m_range,
                                       const std::vector<double>& kappa_range, const QuadratureConfig& cfg = {},
                                       int workers = 1) {
  if (m_range.empty() || kappa_range.empty()) throw ValidationError("min_mixedness_scan: empty range");
  std::vector<MinMixEntry> table;
  for (int m : m_range)
    for (double k : kappa_range) table.push_back({m, k, 0.0});
  parallel_for(table.size(), workers, [&](std::size_t i) {
    table[i].u = u_objective(table[i].m, table[i].kappa, ell, beta, cfg);
  });
  MinMixResult r{table.front(), table};
  for (const auto& e : table)
    if (e.u < r.best.u) r.best = e;
  return r;
}

}  // namespace mixedness
