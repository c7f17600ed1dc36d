#pragma once

// Perturbative two-detector entanglement harvesting with thermal probes.
//
// Smearings are unit-normalized Gaussians in space (width sigma) and time
// (width T, centre t0). The Wightman function is used in momentum space, so
// every element reduces to a sum over field modes (k-quadrature nodes in 3D, or
// Dirichlet modes in a 1D cavity) of
//   K_ij(mode) [ (1+n) e^{-i w (t-t')} + n e^{+i w (t-t')} ]
// with K_ij the smeared spatial kernel and n the Bose occupation.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace mixedness {

using cplx = std::complex<double>;

enum class DetectorKind { Qubit, Oscillator };

inline const char* detector_kind_name(DetectorKind k) { return k == DetectorKind::Qubit ? "qubit" : "oscillator"; }

inline DetectorKind parse_detector_kind(const std::string& s) {
  if (s == "qubit" || s == "Qubit") return DetectorKind::Qubit;
  if (s == "oscillator" || s == "Oscillator" || s == "ho") return DetectorKind::Oscillator;
  throw ValidationError("unknown detector kind '" + s + "'");
}

/// z = exp(-beta * gap); beta = infinity gives 0.
inline double boltzmann_z(double beta, double gap) {
  if (!(beta > 0.0)) throw ValidationError("boltzmann_z: beta must be > 0");
  if (!(gap > 0.0)) throw ValidationError("boltzmann_z: gap must be > 0");
  if (std::isinf(beta)) return 0.0;
  return std::exp(-beta * gap);
}

/// Inverse of boltzmann_z: beta for which exp(-beta * gap) = z.
inline double beta_for_z(double z, double gap) {
  if (!(z >= 0.0 && z < 1.0)) throw ValidationError("z must lie in [0, 1)");
  if (!(gap > 0.0)) throw ValidationError("gap must be > 0");
  if (z == 0.0) return kInfiniteBeta;
  return -std::log(z) / gap;
}

inline double detector_purity(DetectorKind kind, double z) {
  if (!(z >= 0.0 && z < 1.0)) throw ValidationError("detector_purity: z must lie in [0, 1)");
  if (kind == DetectorKind::Qubit) return (1.0 + z * z) / ((1.0 + z) * (1.0 + z));
  return (1.0 - z) / (1.0 + z);
}

struct DetectorSpec {
  DetectorKind kind = DetectorKind::Qubit;
  double gap = 1.0;
  double coupling = 1.0;
  double z = 0.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double spatial_width = 1.0;
  double switch_center = 0.0;
  double switch_width = 1.0;

  void validate() const {
    if (!(gap > 0.0) || !std::isfinite(gap)) throw ValidationError("detector gap must be > 0");
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw ValidationError("detector coupling must be >= 0");
    if (!(z >= 0.0 && z < 1.0)) throw ValidationError("detector z must lie in [0, 1)");
    if (!(spatial_width > 0.0)) throw ValidationError("detector spatial_width must be > 0");
    if (!(switch_width > 0.0)) throw ValidationError("detector switch_width must be > 0");
    for (double c : center)
      if (!std::isfinite(c)) throw ValidationError("detector center must be finite");
    if (!std::isfinite(switch_center)) throw ValidationError("detector switch_center must be finite");
  }

  /// Normalized temporal profile chi(t).
  double chi(double t) const {
    const double u = (t - switch_center) / switch_width;
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * switch_width);
  }

  /// int chi(t) e^{-i w t} dt.
  cplx chi_hat(double w) const {
    return std::exp(cplx(-0.5 * w * w * switch_width * switch_width, -w * switch_center));
  }
};

struct HarvestElements {
  Eigen::Matrix2cd L = Eigen::Matrix2cd::Zero();  // (A, B) ordering
  cplx M{0.0, 0.0};
  cplx K_A{0.0, 0.0};
  cplx K_B{0.0, 0.0};

  cplx L_AA() const { return L(0, 0); }
  cplx L_AB() const { return L(0, 1); }
  cplx L_BA() const { return L(1, 0); }
  cplx L_BB() const { return L(1, 1); }

  /// Elements after multiplying the couplings by (sA, sB): each term scales as lambda_i lambda_j.
  HarvestElements rescaled(double sA, double sB) const {
    HarvestElements e = *this;
    e.L(0, 0) *= sA * sA;
    e.L(0, 1) *= sA * sB;
    e.L(1, 0) *= sA * sB;
    e.L(1, 1) *= sB * sB;
    e.M *= sA * sB;
    e.K_A *= sA * sA;
    e.K_B *= sB * sB;
    return e;
  }
};

/// Knobs for the k- and t-panel densities (1 = default; larger = finer).
struct HarvestResolution {
  double k_refine = 1.0;
  double t_refine = 1.0;
  bool nonlocal = true;  // compute M and K_i (the costly time-ordered terms)
};

namespace detail {

/// Occupation number n(w) = 1 / (e^{beta w} - 1).
inline double bose(double beta, double w) {
  if (std::isinf(beta)) return 0.0;
  const double y = beta * w;
  if (y > 700.0) return 0.0;
  return 1.0 / std::expm1(y);
}

// Time-ordered double integral
//   J(a, b) = int dt chi_X(t) e^{i a t} int_{-inf}^{t} dt' chi_Y(t') e^{i b t'}
// on fixed Gauss panels covering both switching windows.
class OrderedTimeIntegral {
 public:
  OrderedTimeIntegral(const DetectorSpec& A, const DetectorSpec& B, double max_frequency, double refine) {
    lo_ = std::min(A.switch_center - 9.0 * A.switch_width, B.switch_center - 9.0 * B.switch_width);
    hi_ = std::max(A.switch_center + 9.0 * A.switch_width, B.switch_center + 9.0 * B.switch_width);
    const double tmin = std::min(A.switch_width, B.switch_width);
    double h = std::min(0.5 * tmin, 2.0 * std::numbers::pi / std::max(max_frequency, 1e-300));
    h /= refine;
    panels_ = std::max(1, static_cast<int>(std::ceil((hi_ - lo_) / h)));
    h_ = (hi_ - lo_) / panels_;
    const auto& rule = quad::GaussLegendre<20>::instance();
    // Node tables shared across all (a, b): outer nodes and, for each outer node,
    // the inner nodes on [panel start, outer node].
    for (int p = 0; p < panels_; ++p) {
      const double a = lo_ + p * h_;
      for (int i = 0; i < 20; ++i) {
        const double t = a + 0.5 * h_ * (1.0 + rule.nodes[i]);
        outer_t_.push_back(t);
        outer_w_.push_back(0.5 * h_ * rule.weights[i]);
        for (int j = 0; j < 20; ++j) {
          inner_t_.push_back(a + 0.5 * (t - a) * (1.0 + rule.nodes[j]));
          inner_w_.push_back(0.5 * (t - a) * rule.weights[j]);
        }
      }
    }
    chi_cache_[0] = &A;
    chi_cache_[1] = &B;
    for (int d = 0; d < 2; ++d) {
      outer_chi_[d].reserve(outer_t_.size());
      inner_chi_[d].reserve(inner_t_.size());
      for (double t : outer_t_) outer_chi_[d].push_back(chi_cache_[d]->chi(t));
      for (double t : inner_t_) inner_chi_[d].push_back(chi_cache_[d]->chi(t));
    }
  }

  /// x, y in {0 = A, 1 = B}.
  cplx operator()(int x, int y, double a, double b) const {
    cplx total{0.0, 0.0};
    cplx running{0.0, 0.0};  // int_{lo}^{panel start} chi_Y e^{i b t'}
    std::size_t o = 0, in = 0;
    for (int p = 0; p < panels_; ++p) {
      cplx panel_sum{0.0, 0.0};
      for (int i = 0; i < 20; ++i, ++o) {
        cplx inner{0.0, 0.0};
        for (int j = 0; j < 20; ++j, ++in) {
          const double t = inner_t_[in];
          inner += inner_w_[in] * inner_chi_[y][in] * cplx(std::cos(b * t), std::sin(b * t));
        }
        const double t = outer_t_[o];
        const cplx outer = outer_w_[o] * outer_chi_[x][o] * cplx(std::cos(a * t), std::sin(a * t));
        total += outer * (running + inner);
        panel_sum += outer_w_[o] * outer_chi_[y][o] * cplx(std::cos(b * t), std::sin(b * t));
      }
      running += panel_sum;
    }
    return total;
  }

 private:
  double lo_, hi_, h_;
  int panels_;
  std::vector<double> outer_t_, outer_w_, inner_t_, inner_w_;
  const DetectorSpec* chi_cache_[2];
  std::vector<double> outer_chi_[2], inner_chi_[2];
};

/// One field mode (or quadrature node) with its smeared spatial kernel.
struct FieldNode {
  double omega;
  double occupation;
  double k_AA, k_AB, k_BB;
};

struct NodeTerms {
  std::array<cplx, 7> v{};  // L_AA, L_AB, L_BA, L_BB, M, K_A, K_B
  NodeTerms& operator+=(const NodeTerms& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  friend NodeTerms operator+(NodeTerms a, const NodeTerms& b) { return a += b; }
};

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

inline double separation(const DetectorSpec& A, const DetectorSpec& B) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (A.center[i] - B.center[i]) * (A.center[i] - B.center[i]);
  return std::sqrt(s);
}

/// Largest k at which the spatial Gaussians still matter (e^{-k^2 sigma^2} ~ 1e-18).
inline double smearing_k_max(const DetectorSpec& A, const DetectorSpec& B) {
  const double smin = std::min(A.spatial_width, B.spatial_width);
  return std::sqrt(41.5) / smin;
}

inline std::vector<FieldNode> continuum_nodes(const DetectorSpec& A, const DetectorSpec& B, const FieldSpec& field,
                                              double refine) {
  const double d = separation(A, B);
  const double smax = std::max(A.spatial_width, B.spatial_width);
  const double tmax = std::max(A.switch_width, B.switch_width);
  double h = 0.5 * std::min(1.0 / smax, 1.0 / tmax);
  if (d > 0.0) h = std::min(h, 0.5 * std::numbers::pi / d);
  h /= refine;
  const double kmax = smearing_k_max(A, B);
  const int panels = std::max(1, static_cast<int>(std::ceil(kmax / h)));
  h = kmax / panels;
  const auto& rule = quad::GaussLegendre<20>::instance();
  const double sa2 = A.spatial_width * A.spatial_width, sb2 = B.spatial_width * B.spatial_width;
  std::vector<FieldNode> nodes;
  nodes.reserve(static_cast<std::size_t>(panels) * 20);
  for (int p = 0; p < panels; ++p) {
    for (int i = 0; i < 20; ++i) {
      const double k = h * (p + 0.5 * (1.0 + rule.nodes[i]));
      const double wq = 0.5 * h * rule.weights[i];
      const double w = field.omega(k);
      // d^3k / ((2 pi)^3 2 w) with the angular integral done: k^2 / (4 pi^2 w).
      const double base = wq * k * k / (4.0 * std::numbers::pi * std::numbers::pi * w);
      nodes.push_back({w, bose(field.beta, w), base * std::exp(-k * k * sa2),
                       base * std::exp(-0.5 * k * k * (sa2 + sb2)) * sinc(k * d), base * std::exp(-k * k * sb2)});
    }
  }
  return nodes;
}

inline std::vector<FieldNode> cavity_nodes(const DetectorSpec& A, const DetectorSpec& B, const FieldSpec& field,
                                           const QuadratureConfig& cfg) {
  const double L = field.cavity_length;
  for (const auto* det : {&A, &B}) {
    const double x = det->center[0];
    if (!(x > 0.0 && x < L)) throw ValidationError("cavity detectors must sit inside (0, L)");
  }
  long long J;
  if (cfg.cavity_jmax) {
    J = *cfg.cavity_jmax;
  } else {
    J = static_cast<long long>(std::ceil(smearing_k_max(A, B) * L / std::numbers::pi));
  }
  std::vector<FieldNode> nodes;
  nodes.reserve(static_cast<std::size_t>(J));
  const double sa2 = A.spatial_width * A.spatial_width, sb2 = B.spatial_width * B.spatial_width;
  for (long long j = 1; j <= J; ++j) {
    const double k = j * std::numbers::pi / L;
    const double w = field.omega(k);
    // Dirichlet mode sqrt(2/L) sin(k x), smeared by a unit Gaussian.
    const double cA = std::sqrt(2.0 / L) * std::exp(-0.5 * k * k * sa2) * std::sin(k * A.center[0]);
    const double cB = std::sqrt(2.0 / L) * std::exp(-0.5 * k * k * sb2) * std::sin(k * B.center[0]);
    const double inv = 1.0 / (2.0 * w);
    nodes.push_back({w, bose(field.beta, w), cA * cA * inv, cA * cB * inv, cB * cB * inv});
  }
  return nodes;
}

}  // namespace detail

/// Supported fields: dim 3 free space (regulator None or Mass), or dim 1 Dirichlet cavity.
inline HarvestElements compute_elements(const DetectorSpec& A, const DetectorSpec& B, const FieldSpec& field,
                                        const QuadratureConfig& cfg = {}, int workers = 1,
                                        const HarvestResolution& res = {}) {
  A.validate();
  B.validate();
  field.validate();
  cfg.validate();
  std::vector<detail::FieldNode> nodes;
  if (field.dim == 3 && field.regulator != Regulator::Cavity) {
    nodes = detail::continuum_nodes(A, B, field, res.k_refine);
  } else if (field.dim == 1 && field.regulator == Regulator::Cavity) {
    nodes = detail::cavity_nodes(A, B, field, cfg);
  } else {
    throw ValidationError("compute_elements supports dim-3 free space or a dim-1 cavity");
  }

  double wmax = 0.0;
  for (const auto& n : nodes) wmax = std::max(wmax, n.omega);
  const double fmax = wmax + std::max(A.gap, B.gap);
  const detail::OrderedTimeIntegral J(A, B, fmax, res.t_refine);

  const double lA = A.coupling, lB = B.coupling;
  std::vector<detail::NodeTerms> terms(nodes.size());
  parallel_for(nodes.size(), workers, [&](std::size_t idx) {
    const auto& n = nodes[idx];
    const double w = n.omega, np1 = 1.0 + n.occupation, nn = n.occupation;
    auto& t = terms[idx].v;
    const cplx xa_p = A.chi_hat(A.gap + w), xb_p = B.chi_hat(B.gap + w);
    const cplx xa_m = A.chi_hat(A.gap - w), xb_m = B.chi_hat(B.gap - w);
    t[0] = n.k_AA * (np1 * std::norm(xa_p) + nn * std::norm(xa_m));
    t[1] = n.k_AB * (np1 * xa_p * std::conj(xb_p) + nn * xa_m * std::conj(xb_m));
    t[2] = n.k_AB * (np1 * xb_p * std::conj(xa_p) + nn * xb_m * std::conj(xa_m));
    t[3] = n.k_BB * (np1 * std::norm(xb_p) + nn * std::norm(xb_m));
    if (!res.nonlocal) return;
    auto pair = [&](double s) {
      return J(0, 1, A.gap - s * w, B.gap + s * w) + J(1, 0, B.gap - s * w, A.gap + s * w);
    };
    cplx m = np1 * pair(1.0);
    cplx ka = np1 * J(0, 0, A.gap - w, A.gap + w);
    cplx kb = np1 * J(1, 1, B.gap - w, B.gap + w);
    if (nn > 0.0) {
      m += nn * pair(-1.0);
      ka += nn * J(0, 0, A.gap + w, A.gap - w);
      kb += nn * J(1, 1, B.gap + w, B.gap - w);
    }
    t[4] = n.k_AB * m;
    t[5] = n.k_AA * ka;
    t[6] = n.k_BB * kb;
  });
  const auto sum = quad::pairwise_sum(std::span<const detail::NodeTerms>(terms));
  HarvestElements e;
  e.L(0, 0) = lA * lA * sum.v[0];
  e.L(0, 1) = lA * lB * sum.v[1];
  e.L(1, 0) = lA * lB * sum.v[2];
  e.L(1, 1) = lB * lB * sum.v[3];
  e.M = -lA * lB * sum.v[4];
  e.K_A = -lA * lA * sum.v[5];
  e.K_B = -lB * lB * sum.v[6];
  return e;
}

// ---------------------------------------------------------------------------
// Final two-detector state to O(lambda^2, z).

struct TwoDetectorState {
  DetectorKind kind;
  Eigen::MatrixXcd rho;
};

/// Basis {|00>, |01>, |10>, |11>} (+ {|02>, |20>} for oscillators), |ab> = |a>_A |b>_B.
inline TwoDetectorState assemble_state(const HarvestElements& e, double zA, double zB, DetectorKind kind) {
  if (!(zA >= 0.0 && zA < 1.0) || !(zB >= 0.0 && zB < 1.0)) throw ValidationError("z must lie in [0, 1)");
  const int dim = kind == DetectorKind::Qubit ? 4 : 6;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx pa = e.L_AA() + zA, pb = e.L_BB() + zB;
  rho(0, 0) = 1.0 - pa - pb;
  rho(1, 1) = pb;
  rho(1, 2) = e.L_BA();
  rho(2, 1) = e.L_AB();
  rho(2, 2) = pa;
  rho(0, 3) = std::conj(e.M);
  rho(3, 0) = e.M;
  if (kind == DetectorKind::Oscillator) {
    rho(0, 4) = std::conj(e.K_B);
    rho(4, 0) = e.K_B;
    rho(0, 5) = std::conj(e.K_A);
    rho(5, 0) = e.K_A;
  }
  return {kind, rho};
}

/// Leading-order negativity max(-E_1, 0).
inline double negativity(const HarvestElements& e, double zA, double zB) {
  const double pa = e.L_AA().real() + zA, pb = e.L_BB().real() + zB;
  const double e1 = 0.5 * (pa + pb - std::sqrt((pa - pb) * (pa - pb) + 4.0 * std::norm(e.M)));
  return e1 < 0.0 ? -e1 : 0.0;
}

struct ThresholdResult {
  double z_c;           // = N^(2) at z = 0
  double lambda_ref;    // geometric mean coupling the elements were computed at
  bool harvesting;      // false when N^(2)_{z=0} = 0

  /// Critical coupling at equal mixedness z: lambda_ref * sqrt(z / z_c); +inf without harvesting.
  double lambda_c(double z) const {
    if (!(z >= 0.0)) throw ValidationError("lambda_c: z must be >= 0");
    if (!harvesting) return std::numeric_limits<double>::infinity();
    return lambda_ref * std::sqrt(z / z_c);
  }

  std::string description() const {
    if (!harvesting) return "no harvesting at any z for this geometry";
    return "lambda_c(z) = lambda_ref * sqrt(z / z_c)";
  }
};

inline ThresholdResult threshold(const HarvestElements& e, double lambda_ref) {
  const double n0 = negativity(e, 0.0, 0.0);
  return {n0, lambda_ref, n0 > 0.0};
}

/// Negativity from an explicit partial transpose on B and a dense eigensolver.
inline double pt_negativity_oracle(const TwoDetectorState& s) {
  const int levels = s.kind == DetectorKind::Qubit ? 2 : 3;
  static constexpr int kA[6] = {0, 0, 1, 1, 0, 2};
  static constexpr int kB[6] = {0, 1, 0, 1, 2, 0};
  const int n = levels * levels;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < s.rho.rows(); ++r)
    for (int c = 0; c < s.rho.cols(); ++c) full(kA[r] * levels + kB[r], kA[c] * levels + kB[c]) = s.rho(r, c);
  Eigen::MatrixXcd pt(n, n);
  for (int a = 0; a < levels; ++a)
    for (int b = 0; b < levels; ++b)
      for (int a2 = 0; a2 < levels; ++a2)
        for (int b2 = 0; b2 < levels; ++b2) pt(a * levels + b, a2 * levels + b2) = full(a * levels + b2, a2 * levels + b);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt, Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (int i = 0; i < n; ++i) neg += std::max(-es.eigenvalues()(i), 0.0);
  return neg;
}

}  // namespace mixedness
