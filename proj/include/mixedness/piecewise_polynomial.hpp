#pragma once

// Piecewise polynomials on unit-spaced integer knots with exact convolution.
// Each piece is stored in its local coordinate u = x - knot, u in [0, 1].

#include <cmath>
#include <cstddef>
#include <vector>

namespace mixedness {

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  double operator()(double u) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * u + c_[i];
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
  }

  /// p(u) -> p(u + 1).
  Polynomial shifted_by_one() const {
    std::vector<double> out(c_.size(), 0.0);
    for (std::size_t j = 0; j < c_.size(); ++j) {
      double binom = 1.0;
      for (std::size_t l = 0; l <= j; ++l) {
        out[l] += c_[j] * binom;
        binom = binom * static_cast<double>(j - l) / static_cast<double>(l + 1);
      }
    }
    return Polynomial(std::move(out));
  }

  /// p(u) / u, assuming p(0) == 0 (the constant term is discarded).
  Polynomial divided_by_u() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    return Polynomial(std::vector<double>(c_.begin() + 1, c_.end()));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }

  Polynomial operator*(double s) const {
    Polynomial r = *this;
    for (auto& x : r.c_) x *= s;
    return r;
  }

 private:
  std::vector<double> c_;
};

namespace detail {

// int_0^s p(u) q(s - u) du as a polynomial in s.
inline Polynomial lower_triangle_convolution(const Polynomial& p, const Polynomial& q) {
  const auto& a = p.coeffs();
  const auto& b = q.coeffs();
  std::vector<double> out(a.size() + b.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      // Beta(i+1, j+1) = i! j! / (i+j+1)!
      double beta = 1.0 / static_cast<double>(i + j + 1);
      for (std::size_t t = 1; t <= j; ++t) beta *= static_cast<double>(t) / static_cast<double>(i + t);
      out[i + j + 1] += a[i] * b[j] * beta;
    }
  }
  return Polynomial(std::move(out));
}

// int_0^1 p(u) q(s - u) du as a polynomial in s.
inline Polynomial full_window_convolution(const Polynomial& p, const Polynomial& q) {
  const auto& a = p.coeffs();
  const auto& c = q.coeffs();
  std::vector<double> out(c.size(), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    double binom = 1.0;  // C(j, l)
    for (std::size_t l = 0; l <= j; ++l) {
      const std::size_t r = j - l;
      double moment = 0.0;  // int_0^1 p(u) u^r du
      for (std::size_t i = 0; i < a.size(); ++i) moment += a[i] / static_cast<double>(i + r + 1);
      const double sign = (r % 2 == 0) ? 1.0 : -1.0;
      out[l] += c[j] * binom * sign * moment;
      binom = binom * static_cast<double>(j - l) / static_cast<double>(l + 1);
    }
  }
  return Polynomial(std::move(out));
}

}  // namespace detail

class UnitPiecewise {
 public:
  UnitPiecewise(int first_knot, std::vector<Polynomial> pieces)
      : first_(first_knot), pieces_(std::move(pieces)) {}

  int first_knot() const { return first_; }
  int last_knot() const { return first_ + static_cast<int>(pieces_.size()); }
  const std::vector<Polynomial>& pieces() const { return pieces_; }

  double operator()(double x) const {
    if (!(x >= first_) || !(x < last_knot())) return 0.0;
    const double shifted = x - first_;
    auto idx = static_cast<std::size_t>(std::floor(shifted));
    if (idx >= pieces_.size()) idx = pieces_.size() - 1;
    return pieces_[idx](shifted - static_cast<double>(idx));
  }

  UnitPiecewise derivative() const {
    std::vector<Polynomial> d;
    d.reserve(pieces_.size());
    for (const auto& p : pieces_) d.push_back(p.derivative());
    return UnitPiecewise(first_, std::move(d));
  }

  /// Exact convolution (f * g)(x) = int f(t) g(x - t) dt.
  friend UnitPiecewise convolve(const UnitPiecewise& f, const UnitPiecewise& g) {
    const std::size_t n_out = f.pieces_.size() + g.pieces_.size();
    std::vector<Polynomial> out(n_out, Polynomial({0.0}));
    for (std::size_t i = 0; i < f.pieces_.size(); ++i) {
      for (std::size_t j = 0; j < g.pieces_.size(); ++j) {
        const auto& p = f.pieces_[i];
        const auto& q = g.pieces_[j];
        out[i + j] += detail::lower_triangle_convolution(p, q);
        // On the next unit interval: int_s^1 p(u) q(1 + s - u) du
        //   = int_0^1 p(u) q1(s - u) du - int_0^s p(u) q1(s - u) du, q1(v) = q(1 + v).
        const Polynomial q1 = q.shifted_by_one();
        Polynomial upper = detail::full_window_convolution(p, q1);
        upper += detail::lower_triangle_convolution(p, q1) * -1.0;
        out[i + j + 1] += upper;
      }
    }
    // A product of n and m pieces spans n + m unit intervals.
    out.resize(n_out);
    return UnitPiecewise(f.first_ + g.first_, std::move(out));
  }

 private:
  int first_;
  std::vector<Polynomial> pieces_;
};

}  // namespace mixedness
