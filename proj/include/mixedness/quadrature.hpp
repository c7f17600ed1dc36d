#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace mixedness::quad {

/// Fixed N-point Gauss-Legendre rule on [-1, 1], full (not half) node set.
template <int N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    int i = 0;
    // Boost stores the non-negative half; node 0 is the centre when N is odd.
    for (std::size_t j = x.size(); j-- > 0;) {
      if (x[j] == 0.0) continue;
      nodes[i] = -x[j];
      weights[i] = w[j];
      ++i;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      nodes[i] = x[j];
      weights[i] = w[j];
      ++i;
    }
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }

  /// Integral of f over [a, b].
  template <class F>
  auto integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    decltype(f(a)) acc{};
    for (int i = 0; i < N; ++i) acc += weights[i] * f(mid + half * nodes[i]);
    return acc * half;
  }
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Pairwise (tree) reduction; the order depends only on the length.
template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 8) {
    T acc{};
    for (const auto& x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace mixedness::quad
