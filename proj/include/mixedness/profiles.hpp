#pragma once

// Localized mode shapes (v, w) and their radial Fourier amplitudes.
//
// Conventions: the rectangle has unit height on [-1, 1]; B_m(s) is its m-fold
// self-convolution rescaled to [-1, 1], so B_1(0) = 1, B_2(0) = 2, B_3(0) = 3.
// Fourier amplitudes use the unitary transform (2 pi)^{-n/2} int e^{-ik.x}.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "piecewise_polynomial.hpp"
#include "quadrature.hpp"

namespace mixedness {

enum class Family { BSpline, D2BSpline, Ball3D, ZKappa };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::BSpline: return "BSpline";
    case Family::D2BSpline: return "D2BSpline";
    case Family::Ball3D: return "Ball3D";
    case Family::ZKappa: return "ZKappa";
  }
  return "?";
}

inline Family parse_family(const std::string& name) {
  if (name == "BSpline" || name == "bspline") return Family::BSpline;
  if (name == "D2BSpline" || name == "d2bspline") return Family::D2BSpline;
  if (name == "Ball3D" || name == "ball3d") return Family::Ball3D;
  if (name == "ZKappa" || name == "zkappa") return Family::ZKappa;
  throw ValidationError("unknown profile family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scalar building blocks

/// Cardinal B-spline N_m on integer knots 0..m (Cox-de Boor).
inline double cardinal_bspline(int m, double y) {
  if (m < 1) throw ValidationError("cardinal B-spline order must be >= 1");
  if (!(y >= 0.0) || !(y < m)) return 0.0;
  std::vector<double> n(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) n[j] = (y - j >= 0.0 && y - j < 1.0) ? 1.0 : 0.0;
  for (int order = 2; order <= m; ++order) {
    for (int j = 0; j + order <= m; ++j) {
      const double t = y - j;
      n[j] = (t * n[j] + (order - t) * n[j + 1]) / (order - 1);
    }
  }
  return n[0];
}

/// B_m(s) = Pi^{*m}(m s); supported on [-1, 1].
inline double bspline(int m, double s) {
  if (m < 1) throw ValidationError("bspline: m must be >= 1");
  return std::ldexp(cardinal_bspline(m, 0.5 * m * (s + 1.0)), m - 1);
}

/// d/ds B_m(s).
inline double bspline_d1(int m, double s) {
  if (m < 2) return 0.0;  // piecewise constant; derivative is distributional
  const double y = 0.5 * m * (s + 1.0);
  const double dn = cardinal_bspline(m - 1, y) - cardinal_bspline(m - 1, y - 1.0);
  return std::ldexp(dn, m - 1) * 0.5 * m;
}

/// d^2/ds^2 B_m(s).
inline double bspline_d2(int m, double s) {
  if (m < 3) return 0.0;
  const double y = 0.5 * m * (s + 1.0);
  const double ddn = cardinal_bspline(m - 2, y) - 2.0 * cardinal_bspline(m - 2, y - 1.0) +
                     cardinal_bspline(m - 2, y - 2.0);
  return std::ldexp(ddn, m - 1) * 0.25 * m * m;
}

/// S_m(r) = [sin(r/m) / (r/m)]^m.
inline double sinc_power(int m, double r) {
  const double x = r / m;
  const double s = (std::abs(x) < 1e-4) ? 1.0 - x * x / 6.0 + x * x * x * x / 120.0 : std::sin(x) / x;
  return std::pow(s, m);
}

/// Unit-ball transform b(r) = 3 (sin r - r cos r) / r^3, b(0) = 1.
inline double ball_transform(double r) {
  r = std::abs(r);
  if (r < 1e-3) {
    const double r2 = r * r;
    return 1.0 - r2 / 10.0 + r2 * r2 / 280.0;
  }
  return 3.0 * (std::sin(r) - r * std::cos(r)) / (r * r * r);
}

namespace detail {

// h_1(x): line projection of the unit ball, pi (1 - x^2) on [-1, 1].
inline UnitPiecewise ball_projection() {
  const double pi = std::numbers::pi;
  return UnitPiecewise(-1, {Polynomial({0.0, 2.0 * pi, -pi}), Polynomial({pi, 0.0, -pi})});
}

// Radial profile f_m(r) of the m-fold 3D self-convolution of the unit ball,
// recovered from its line projection h_m via f(r) = -h_m'(r) / (2 pi r).
class BallConvolution {
 public:
  explicit BallConvolution(int m) : m_(m), dh_(0, {}) {
    UnitPiecewise h = ball_projection();
    const UnitPiecewise h1 = h;
    for (int i = 1; i < m; ++i) h = convolve(h, h1);
    dh_ = h.derivative();
    // Piece on [0, 1]: -h'(u) / (2 pi u) with h'(0) = 0 by symmetry.
    const auto& pieces = dh_.pieces();
    first_piece_ = pieces[static_cast<std::size_t>(-dh_.first_knot())].divided_by_u() * (-0.5 / std::numbers::pi);
  }

  int order() const { return m_; }

  double operator()(double r) const {
    r = std::abs(r);
    if (!(r < m_)) return 0.0;
    if (r < 1.0) return first_piece_(r);
    return -dh_(r) / (2.0 * std::numbers::pi * r);
  }

  /// -h_m'(r) / (2 pi); r^2 f(r)^2 = (that)^2 is polynomial on every unit piece.
  double radial_flux(double r) const { return -dh_(std::abs(r)) / (2.0 * std::numbers::pi); }

 private:
  int m_;
  UnitPiecewise dh_;
  Polynomial first_piece_;
};

inline const BallConvolution& ball_convolution(int m) {
  // Orders are tiny and few; build once per order, thread-safe via static init.
  static const std::vector<BallConvolution> table = [] {
    std::vector<BallConvolution> t;
    for (int k = 1; k <= 12; ++k) t.emplace_back(k);
    return t;
  }();
  if (m < 1 || m > 12) throw ValidationError("Ball3D order must be in [1, 12]");
  return table[static_cast<std::size_t>(m - 1)];
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Bound |amp(k)|^2 <= coeff * k^{-power} valid for k >= k_from.
struct SpectralEnvelope {
  double coeff;
  double power;
  double k_from;
};

struct FourierPair {
  double v;
  double w;
};

class ModeProfile {
 public:
  static ModeProfile bspline(int m, double ell) {
    if (m < 1) throw ValidationError("BSpline requires m >= 1");
    return ModeProfile(Family::BSpline, m, 0.0, ell, 1);
  }
  static ModeProfile d2bspline(int m, double ell) {
    if (m < 4) throw ValidationError("D2BSpline requires m >= 4");
    return ModeProfile(Family::D2BSpline, m, 0.0, ell, 1);
  }
  static ModeProfile ball3d(int m, double ell) {
    if (m < 2 || m > 12) throw ValidationError("Ball3D requires 2 <= m <= 12");
    return ModeProfile(Family::Ball3D, m, 0.0, ell, 3);
  }
  /// kappa in inverse length units; the dispersion frequency omega_kappa = kappa.
  static ModeProfile zkappa(int m, double kappa, double ell) {
    if (m < 3) throw ValidationError("ZKappa requires m >= 3");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("ZKappa requires kappa > 0");
    return ModeProfile(Family::ZKappa, m, kappa * ell, ell, 1);
  }

  /// Construct from the key-value dialect: family, m, ell, kappa (ZKappa), dim (checked).
  static ModeProfile from_keys(const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end()) throw ValidationError(std::string("profile: missing key '") + key + "'");
      return it->second;
    };
    const Family f = parse_family(get("family"));
    const int m = std::stoi(get("m"));
    const double ell = std::stod(get("ell"));
    ModeProfile p = [&] {
      switch (f) {
        case Family::BSpline: return bspline(m, ell);
        case Family::D2BSpline: return d2bspline(m, ell);
        case Family::Ball3D: return ball3d(m, ell);
        case Family::ZKappa: return zkappa(m, std::stod(get("kappa")), ell);
      }
      throw ValidationError("unreachable");
    }();
    if (auto it = kv.find("dim"); it != kv.end() && std::stoi(it->second) != p.dim())
      throw ValidationError("profile: family " + std::string(family_name(f)) + " has dim " +
                            std::to_string(p.dim()));
    return p;
  }

  Family family() const { return family_; }
  int m() const { return m_; }
  double ell() const { return ell_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_ell_ / ell_; }
  double kappa_ell() const { return kappa_ell_; }
  double norm_v() const { return norm_v_; }
  double norm_w() const { return norm_w_; }

  /// Same shape at a different size; kappa * ell is held fixed.
  ModeProfile with_ell(double ell) const {
    ModeProfile p(family_, m_, kappa_ell_, ell, dim_);
    return p;
  }

  /// Scale v and w independently (normalization constants multiply).
  ModeProfile scaled(double sv, double sw) const {
    ModeProfile p = *this;
    p.norm_v_ *= sv;
    p.norm_w_ *= sw;
    return p;
  }

  std::string describe() const {
    std::string s = std::string(family_name(family_)) + "(m=" + std::to_string(m_);
    if (family_ == Family::ZKappa) s += ", kappa*ell=" + std::to_string(kappa_ell_);
    return s + ")";
  }

  // --- position space; for dim 3 the argument is the radius |x| ---

  double v(double x) const { return norm_v_ * v_factor() * raw(x); }
  double w(double x) const { return norm_w_ * w_factor() * raw(x); }

  // --- Fourier space (radial, k >= 0) ---

  FourierPair fourier_amplitude(double k) const {
    if (!(k >= 0.0)) throw ValidationError("fourier_amplitude: k must be >= 0");
    const double r = raw_fourier(k);
    return {norm_v_ * v_factor() * r, norm_w_ * w_factor() * r};
  }

  /// Envelope for max(|v~|^2, |w~|^2).
  SpectralEnvelope envelope() const {
    const double sq2pi = std::sqrt(2.0 * std::numbers::pi);
    const double nmax = std::max(std::abs(norm_v_ * v_factor()), std::abs(norm_w_ * w_factor()));
    switch (family_) {
      case Family::BSpline: {
        const double a = (ell_ / m_) * std::ldexp(1.0, m_) / sq2pi;
        return {nmax * nmax * a * a * std::pow(m_ / ell_, 2 * m_), 2.0 * m_, 0.0};
      }
      case Family::D2BSpline: {
        const int n = m_ - 1;
        const double a = (ell_ / n) * std::ldexp(1.0, n) / sq2pi;
        return {nmax * nmax * a * a * std::pow(n / ell_, 2 * n), 2.0 * n - 4.0, 0.0};
      }
      case Family::Ball3D: {
        const double a = ball_prefactor();
        return {nmax * nmax * a * a * std::pow(6.0 * m_ * m_ / (ell_ * ell_), 2 * m_), 4.0 * m_, m_ / ell_};
      }
      case Family::ZKappa: {
        const double a = (ell_ / m_) * std::ldexp(1.0, m_) / sq2pi;
        return {nmax * nmax * a * a * std::pow(2.0 * m_ / ell_, 2 * m_), 2.0 * m_ - 4.0, 2.0 * kappa()};
      }
    }
    return {0, 0, 0};
  }

  /// Small-k power q with |v~(k)|^2 ~ k^q.
  int ir_power() const {
    return (family_ == Family::D2BSpline || family_ == Family::ZKappa) ? 4 : 0;
  }

  /// Natural panel width for Fourier quadrature (half a sinc period, narrowed for kappa).
  double panel_width() const {
    return std::numbers::pi / (ell_ * (1.0 + kappa_ell_ / std::numbers::pi));
  }

  /// Knots of the piecewise structure in position space (radius for dim 3).
  std::vector<double> knots() const {
    const int pieces = (family_ == Family::D2BSpline) ? m_ - 1 : m_;
    std::vector<double> k;
    if (dim_ == 3) {
      for (int j = 0; j <= pieces; ++j) k.push_back(ell_ * j / pieces);
    } else {
      for (int j = 0; j <= pieces; ++j) k.push_back(ell_ * (-1.0 + 2.0 * j / pieces));
    }
    return k;
  }

  /// Unnormalized shape; v = norm_v * v_factor * raw, w likewise.
  double raw(double x) const {
    switch (family_) {
      case Family::BSpline: return mixedness::bspline(m_, x / ell_);
      case Family::D2BSpline: return -bspline_d2(m_ - 1, x / ell_) / (ell_ * ell_);
      case Family::Ball3D: return detail::ball_convolution(m_)(m_ * std::abs(x) / ell_);
      case Family::ZKappa: {
        // z = -d^2/dx^2 [cos(kappa x) B_m(x/ell)]
        const double s = x / ell_;
        if (std::abs(s) > 1.0) return 0.0;
        const double kap = kappa();
        const double g = mixedness::bspline(m_, s);
        const double g1 = bspline_d1(m_, s) / ell_;
        const double g2 = bspline_d2(m_, s) / (ell_ * ell_);
        const double c = std::cos(kap * x), sn = std::sin(kap * x);
        return kap * kap * c * g + 2.0 * kap * sn * g1 - c * g2;
      }
    }
    return 0.0;
  }

  double raw_fourier(double k) const {
    const double sq2pi = std::sqrt(2.0 * std::numbers::pi);
    switch (family_) {
      case Family::BSpline:
        return (ell_ / m_) * std::ldexp(1.0, m_) * sinc_power(m_, k * ell_) / sq2pi;
      case Family::D2BSpline: {
        const int n = m_ - 1;
        return k * k * (ell_ / n) * std::ldexp(1.0, n) * sinc_power(n, k * ell_) / sq2pi;
      }
      case Family::Ball3D:
        return ball_prefactor() * std::pow(ball_transform(k * ell_ / m_), m_);
      case Family::ZKappa: {
        const double kap = kappa();
        const double s = sinc_power(m_, (k - kap) * ell_) + sinc_power(m_, (k + kap) * ell_);
        return k * k * 0.5 * (ell_ / m_) * std::ldexp(1.0, m_) * s / sq2pi;
      }
    }
    return 0.0;
  }

  /// sqrt(omega_kappa) for v, 1/sqrt(omega_kappa) for w (ZKappa only; 1 otherwise).
  double v_factor() const { return family_ == Family::ZKappa ? std::sqrt(kappa()) : 1.0; }
  double w_factor() const { return family_ == Family::ZKappa ? 1.0 / std::sqrt(kappa()) : 1.0; }

 private:
  ModeProfile(Family f, int m, double kappa_ell, double ell, int dim)
      : family_(f), m_(m), kappa_ell_(kappa_ell), ell_(ell), dim_(dim) {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ValidationError("profile ell must be positive and finite");
  }

  double ball_prefactor() const {
    const double l = ell_ / m_;
    return l * l * l * std::pow(4.0 * std::numbers::pi / 3.0, m_) / std::pow(2.0 * std::numbers::pi, 1.5);
  }

  Family family_;
  int m_;
  double kappa_ell_;
  double ell_;
  int dim_;
  double norm_v_ = 1.0;
  double norm_w_ = 1.0;
};

// ---------------------------------------------------------------------------
// Normalization and the commutator integral int v w d^n x.

enum class Space { Position, Fourier };

namespace detail {

inline double position_overlap(const ModeProfile& p) {
  const auto& rule = quad::GaussLegendre<20>::instance();
  const auto knots = p.knots();
  quad::CompensatedSum acc;
  // Oscillating cos^2(kappa x) factors get extra sub-panels.
  const int sub = 1 + static_cast<int>(std::ceil(2.0 * p.kappa_ell() / std::numbers::pi / (knots.size() - 1)));
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    const double a = knots[j], b = knots[j + 1];
    for (int s = 0; s < sub; ++s) {
      const double lo = a + (b - a) * s / sub, hi = a + (b - a) * (s + 1) / sub;
      double piece;
      if (p.dim() == 3) {
        piece = rule.integrate([&](double r) { return 4.0 * std::numbers::pi * r * r * p.v(r) * p.w(r); }, lo, hi);
      } else {
        piece = rule.integrate([&](double x) { return p.v(x) * p.w(x); }, lo, hi);
      }
      acc.add(piece);
    }
  }
  return acc.value();
}

inline double surface_factor(int dim) {
  // c_n = 2 pi^{n/2} / Gamma(n/2): 2, 2 pi, 4 pi.
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

inline double fourier_overlap(const ModeProfile& p, double rel_tol) {
  const auto& rule = quad::GaussLegendre<20>::instance();
  const double cn = surface_factor(p.dim());
  const auto env = p.envelope();
  const double width = p.panel_width();
  auto f = [&](double k) {
    const auto a = p.fourier_amplitude(k);
    return cn * std::pow(k, p.dim() - 1) * a.v * a.w;
  };
  quad::CompensatedSum acc;
  double k = 0.0, achieved = 1.0;
  const long max_panels = 50'000'000;
  for (long i = 0; i < max_panels; ++i) {
    acc.add(rule.integrate(f, k, k + width));
    k += width;
    if (k >= env.k_from && env.power > p.dim()) {
      const double tail = cn * env.coeff * std::pow(k, p.dim() - env.power) / (env.power - p.dim());
      achieved = tail / std::abs(acc.value());
      if (achieved <= rel_tol) return acc.value();
    }
  }
  throw NumericalError("commutator_integral: Fourier tail did not converge", achieved);
}

}  // namespace detail

inline double commutator_integral(const ModeProfile& p, Space space = Space::Position,
                                  double rel_tol = 1e-9) {
  return space == Space::Position ? detail::position_overlap(p) : detail::fourier_overlap(p, rel_tol);
}

inline ModeProfile normalize(const ModeProfile& p) {
  const double s = detail::position_overlap(p);
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("normalize: profile has non-positive norm");
  const double f = 1.0 / std::sqrt(s);
  return p.scaled(f, f);
}

}  // namespace mixedness
