#pragma once

// Independent cross-check for the harvesting elements: two qubits coupled to a
// 1+1D Dirichlet cavity, Fock space truncated to <= 2 quanta, Dyson series to
// second order by direct time quadrature. Shares nothing with harvesting.hpp
// beyond the physical setup (no closed-form Fourier transforms, no k-kernels).

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace mixedness::oracle {

using cplx = std::complex<double>;

struct CavitySetup {
  double length = 20.0;
  int n_modes = 40;
  double mass = 0.0;
  double x_a = 7.5;
  double x_b = 12.5;
  double sigma = 1.0;       // spatial Gaussian width (both detectors)
  double gap = 1.0;         // both detectors
  double switch_width = 1.0;
  double switch_center = 0.0;
  double coupling = 1.0;
  int time_steps = 8000;    // uniform grid over +-10 switch widths
  int space_points = 20000; // trapezoid grid for the mode projections
};

struct CavityResult {
  double L_AA;
  double L_BB;
  cplx L_AB;
  cplx M;
};

namespace detail {

// Fock basis with at most two quanta in n modes: vacuum, |j>, |j k> (j <= k).
class FockBasis {
 public:
  explicit FockBasis(int n) : n_(n) {
    pair_index_.assign(static_cast<std::size_t>(n) * n, -1);
    int idx = 1 + n;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        pair_index_[j * n + k] = pair_index_[k * n + j] = idx++;
      }
    size_ = idx;
    // Ladder tables: (target, amplitude) or target = -1.
    create_.assign(static_cast<std::size_t>(size_) * n, {-1, 0.0});
    annihilate_.assign(static_cast<std::size_t>(size_) * n, {-1, 0.0});
    for (int j = 0; j < n; ++j) {
      create_[0 * n + j] = {1 + j, 1.0};
      annihilate_[(1 + j) * n + j] = {0, 1.0};
      for (int k = 0; k < n; ++k) {
        const double amp = (j == k) ? std::sqrt(2.0) : 1.0;
        create_[(1 + j) * n + k] = {pair_index_[j * n + k], amp};
        // a_k |j k> = sqrt(n_k) |j>
        annihilate_[pair_index_[j * n + k] * n + k] = {1 + j, amp};
      }
    }
  }
  int size() const { return size_; }
  struct Ladder {
    int target;
    double amp;
  };
  const Ladder& create(int state, int mode) const { return create_[state * n_ + mode]; }
  const Ladder& annihilate(int state, int mode) const { return annihilate_[state * n_ + mode]; }

 private:
  int n_;
  int size_;
  std::vector<int> pair_index_;
  std::vector<Ladder> create_, annihilate_;
};

}  // namespace detail

inline CavityResult run_cavity_oracle(const CavitySetup& s) {
  if (s.n_modes < 1 || s.time_steps < 4 || s.space_points < 4) throw ValidationError("oracle: bad resolution");
  const int n = s.n_modes;
  const double pi = std::numbers::pi;
  std::vector<double> omega(n), proj_a(n), proj_b(n);
  const double dx = s.length / (s.space_points - 1);
  for (int j = 0; j < n; ++j) {
    const double k = (j + 1) * pi / s.length;
    omega[j] = std::sqrt(k * k + s.mass * s.mass);
    double pa = 0.0, pb = 0.0;
    for (int i = 0; i < s.space_points; ++i) {
      const double x = i * dx;
      const double wt = (i == 0 || i == s.space_points - 1) ? 0.5 * dx : dx;
      const double mode = std::sqrt(2.0 / s.length) * std::sin(k * x);
      const double ga = std::exp(-0.5 * (x - s.x_a) * (x - s.x_a) / (s.sigma * s.sigma));
      const double gb = std::exp(-0.5 * (x - s.x_b) * (x - s.x_b) / (s.sigma * s.sigma));
      pa += wt * ga * mode;
      pb += wt * gb * mode;
    }
    const double norm = 1.0 / (std::sqrt(2.0 * pi) * s.sigma);
    proj_a[j] = pa * norm / std::sqrt(2.0 * omega[j]);
    proj_b[j] = pb * norm / std::sqrt(2.0 * omega[j]);
  }

  const detail::FockBasis basis(n);
  const int D = basis.size();
  const int total = 4 * D;  // qubit index q = 2 a + b
  using State = std::vector<cplx>;

  auto chi = [&](double t) {
    const double u = (t - s.switch_center) / s.switch_width;
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * pi) * s.switch_width);
  };

  std::vector<cplx> phase_minus(n), phase_plus(n);
  auto apply_h = [&](double t, const State& in, State& out) {
    std::fill(out.begin(), out.end(), cplx{});
    const double c = s.coupling * chi(t);
    for (int j = 0; j < n; ++j) {
      phase_minus[j] = std::polar(1.0, -omega[j] * t);
      phase_plus[j] = std::polar(1.0, omega[j] * t);
    }
    const cplx up = std::polar(c, s.gap * t), down = std::polar(c, -s.gap * t);
    for (int q = 0; q < 4; ++q) {
      for (int f = 0; f < D; ++f) {
        const cplx amp = in[q * D + f];
        if (amp == cplx{}) continue;
        for (int det = 0; det < 2; ++det) {
          const int bit = det == 0 ? 2 : 1;
          const int q2 = q ^ bit;
          const cplx mu = (q & bit) ? down : up;  // sigma^- or sigma^+
          const std::vector<double>& proj = det == 0 ? proj_a : proj_b;
          for (int j = 0; j < n; ++j) {
            const auto& a = basis.annihilate(f, j);
            if (a.target >= 0) out[q2 * D + a.target] += amp * mu * proj[j] * a.amp * phase_minus[j];
            const auto& cr = basis.create(f, j);
            if (cr.target >= 0) out[q2 * D + cr.target] += amp * mu * proj[j] * cr.amp * phase_plus[j];
          }
        }
      }
    }
  };

  State psi0(total, cplx{});
  psi0[0] = 1.0;
  State psi1(total, cplx{}), psi2(total, cplx{}), cumulative(total, cplx{});
  State h_prev(total), h_cur(total), tmp(total);
  const double t_lo = s.switch_center - 10.0 * s.switch_width;
  const double h = 20.0 * s.switch_width / s.time_steps;
  const cplx minus_i(0.0, -1.0);
  for (int step = 0; step <= s.time_steps; ++step) {
    const double t = t_lo + step * h;
    const double w = (step == 0 || step == s.time_steps) ? 0.5 * h : h;
    apply_h(t, psi0, h_cur);
    if (step > 0) {
      for (int i = 0; i < total; ++i) cumulative[i] += 0.5 * h * (h_prev[i] + h_cur[i]);
    }
    for (int i = 0; i < total; ++i) psi1[i] += minus_i * w * h_cur[i];
    // second order: -int dt H(t) int_{-inf}^t dt' H(t') psi0
    apply_h(t, cumulative, tmp);
    for (int i = 0; i < total; ++i) psi2[i] -= w * tmp[i];
    std::swap(h_prev, h_cur);
  }

  CavityResult r{};
  cplx lab{};
  for (int f = 0; f < D; ++f) {
    r.L_AA += std::norm(psi1[2 * D + f]);
    r.L_BB += std::norm(psi1[1 * D + f]);
    lab += psi1[2 * D + f] * std::conj(psi1[1 * D + f]);
  }
  r.L_AB = lab;
  r.M = psi2[3 * D + 0];
  return r;
}

}  // namespace mixedness::oracle
