#pragma once

// Gaussian phase-space toolkit: covariance matrices, symplectic forms,
// Williamson normal form, quadratic-Hamiltonian flows and Wigner functions.
//
// Conventions (hbar = 1): phase-space vectors are interleaved
// (q1, p1, q2, p2, ...). The covariance matrix is the symmetrised second
// moment Sigma^{mu nu} = <{Xi^mu - xi^mu, Xi^nu - xi^nu}>, so the vacuum of
// a single mode has Sigma = identity and every physical state has all
// symplectic eigenvalues >= 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "mixedness/errors.hpp"

namespace mixedness::symplectic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tolerance {
inline constexpr double kSymmetry = 1e-10;       // relative, max-norm
inline constexpr double kSymplecticity = 1e-10;  // relative, max-norm
inline constexpr double kPhysicality = 1e-9;     // absolute slack on nu >= 1
}  // namespace tolerance

/// Block-diagonal form with 2x2 blocks [[0,-1],[1,0]] (lower-index form).
inline Matrix symplectic_form(int n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    omega(2 * i, 2 * i + 1) = -1.0;
    omega(2 * i + 1, 2 * i) = 1.0;
  }
  return omega;
}

/// Block-diagonal form with 2x2 blocks [[0,1],[-1,0]]; [Xi^a, Xi^b] = i * this.
inline Matrix inverse_symplectic_form(int n_modes) { return -symplectic_form(n_modes); }

namespace detail {

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool nearly_symmetric(const Matrix& m, double rel_tol) {
  const double scale = std::max(max_abs(m), 1e-300);
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

inline void require_even_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty 2n x 2n matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace detail

inline bool is_symplectic(const Matrix& s, double rel_tol = tolerance::kSymplecticity) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) return false;
  const auto omega = symplectic_form(static_cast<int>(s.rows() / 2));
  const double scale = std::max(1.0, detail::max_abs(s) * detail::max_abs(s));
  return detail::max_abs(s * omega * s.transpose() - omega) <= rel_tol * scale;
}

/// Symmetric positive-definite 2n x 2n matrix of symmetrised second moments.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(const Matrix& sigma) {
    detail::require_even_square(sigma, "CovarianceMatrix");
    if (!detail::nearly_symmetric(sigma, tolerance::kSymmetry)) {
      throw ValidationError("CovarianceMatrix: matrix is not symmetric");
    }
    sigma_ = 0.5 * (sigma + sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_, Eigen::EigenvaluesOnly);
    const double lowest = eig.eigenvalues()(0);
    if (!(lowest > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "CovarianceMatrix: not positive definite (smallest eigenvalue " << lowest << ")";
      throw DomainError(os.str());
    }
  }

  static CovarianceMatrix vacuum(int n_modes) {
    return CovarianceMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }

  int n_modes() const { return static_cast<int>(sigma_.rows() / 2); }
  const Matrix& matrix() const { return sigma_; }

 private:
  Matrix sigma_;
};

struct GaussianState {
  Vector first_moments;
  CovarianceMatrix covariance;

  GaussianState(Vector xi0, CovarianceMatrix cov) : first_moments(std::move(xi0)), covariance(std::move(cov)) {
    if (first_moments.size() != covariance.matrix().rows()) {
      throw ValidationError("GaussianState: first-moment vector length does not match covariance");
    }
  }
};

/// H = 1/2 Xi^T F Xi + alpha^T Xi.
struct QuadraticGenerator {
  Matrix F;
  Vector alpha;

  QuadraticGenerator(Matrix f, Vector a) : F(std::move(f)), alpha(std::move(a)) {
    detail::require_even_square(F, "QuadraticGenerator");
    if (!detail::nearly_symmetric(F, tolerance::kSymmetry)) {
      throw ValidationError("QuadraticGenerator: F is not symmetric");
    }
    if (alpha.size() != F.rows()) throw ValidationError("QuadraticGenerator: alpha has wrong length");
    F = 0.5 * (F + F.transpose());
  }
};

namespace detail {

struct SqrtPair {
  Matrix root;
  Matrix inverse_root;
};

inline SqrtPair sqrt_pair(const Matrix& spd) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
  const Vector s = eig.eigenvalues().cwiseSqrt();
  const Matrix& u = eig.eigenvectors();
  return {u * s.asDiagonal() * u.transpose(), u * s.cwiseInverse().asDiagonal() * u.transpose()};
}

}  // namespace detail

/// Williamson symplectic eigenvalues, descending, one per mode.
inline std::vector<double> symplectic_spectrum(const CovarianceMatrix& cov) {
  const int n = cov.n_modes();
  const Matrix root = detail::sqrt_pair(cov.matrix()).root;
  // root * Omega^{-1} * root is antisymmetric and similar to Omega^{-1} Sigma;
  // its singular values are the nu_i, each appearing twice.
  const Matrix c = root * inverse_symplectic_form(n) * root;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c.transpose() * c, Eigen::EigenvaluesOnly);
  std::vector<double> nus(n);
  for (int i = 0; i < n; ++i) {
    const double a = std::max(eig.eigenvalues()(2 * i), 0.0);
    const double b = std::max(eig.eigenvalues()(2 * i + 1), 0.0);
    nus[i] = 0.5 * (std::sqrt(a) + std::sqrt(b));
  }
  std::sort(nus.begin(), nus.end(), std::greater<>());
  return nus;
}

struct WilliamsonForm {
  std::vector<double> nus;  // descending
  Matrix S;                 // S * Sigma * S^T = diag(nu_1, nu_1, nu_2, nu_2, ...), S Omega S^T = Omega
};

inline WilliamsonForm williamson(const CovarianceMatrix& cov) {
  const int n = cov.n_modes();
  const int dim = 2 * n;
  const auto roots = detail::sqrt_pair(cov.matrix());
  const Matrix a = roots.inverse_root * symplectic_form(n) * roots.inverse_root;

  // -A^2 is symmetric PSD with eigenvalues (1/nu_i)^2, each twice; ascending
  // order therefore yields nu in descending order.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  Matrix basis(dim, dim);
  std::vector<double> nus;
  int filled = 0;
  for (int col = 0; col < dim && filled < dim; ++col) {
    Vector e = eig.eigenvectors().col(col);
    for (int j = 0; j < filled; ++j) e -= basis.col(j).dot(e) * basis.col(j);
    if (e.norm() < 0.5) continue;
    e.normalize();
    Vector f = a * e;
    const double rate = f.norm();
    for (int j = 0; j < filled; ++j) f -= basis.col(j).dot(f) * basis.col(j);
    f -= e.dot(f) * e;
    f.normalize();
    basis.col(filled) = e;
    basis.col(filled + 1) = f;
    filled += 2;
    nus.push_back(1.0 / rate);
  }
  if (filled != dim) throw DomainError("williamson: failed to build a symplectic basis");

  Vector d_sqrt(dim);
  for (int i = 0; i < n; ++i) d_sqrt(2 * i) = d_sqrt(2 * i + 1) = std::sqrt(nus[i]);
  Matrix s = d_sqrt.asDiagonal() * basis.transpose() * roots.inverse_root;
  return {std::move(nus), std::move(s)};
}

/// Symplectic eigenvalue of one mode from Sigma_VV, Sigma_WW and Sigma_VW.
inline double mode_nu(double vv, double ww, double vw_sym) {
  if (!(vv > 0.0) || !(ww > 0.0)) throw DomainError("mode_nu: diagonal moments must be positive");
  const double det = vv * ww - vw_sym * vw_sym;
  if (det < 0.0) throw DomainError("mode_nu: unphysical moments (vv*ww < vw^2)");
  return std::sqrt(det);
}

/// Purity of a Gaussian state: product of 1/nu_i.
inline double purity_from_spectrum(std::span<const double> nus) {
  double purity = 1.0;
  for (double nu : nus) {
    if (!(nu >= 1.0 - tolerance::kPhysicality)) {
      std::ostringstream os;
      os.precision(17);
      os << "purity_from_spectrum: symplectic eigenvalue " << nu << " < 1 violates the uncertainty bound";
      throw DomainError(os.str());
    }
    purity /= nu;
  }
  return std::min(purity, 1.0);
}

struct AffineMap {
  Matrix S;
  Vector d;
};

/// Heisenberg flow of a quadratic Hamiltonian: Xi(t) = S(t) Xi + d(t).
///
/// d(t) = (S - 1)(Omega^{-1} F)^{-1} Omega^{-1} alpha is read off the exponential
/// of the augmented generator [[A t, b t], [0, 0]], which stays finite when A
/// is singular.
inline AffineMap evolve(const QuadraticGenerator& gen, double t) {
  if (!std::isfinite(t)) throw ValidationError("evolve: time must be finite");
  const int dim = static_cast<int>(gen.F.rows());
  const int n = dim / 2;
  const Matrix a = inverse_symplectic_form(n) * gen.F;
  const Vector b = inverse_symplectic_form(n) * gen.alpha;

  Matrix aug = Matrix::Zero(dim + 1, dim + 1);
  aug.topLeftCorner(dim, dim) = a * t;
  aug.topRightCorner(dim, 1) = b * t;
  const Matrix e = aug.exp();
  return {e.topLeftCorner(dim, dim), e.topRightCorner(dim, 1)};
}

inline GaussianState transform_state(const GaussianState& state, const Matrix& s, const Vector& d) {
  const auto dim = state.first_moments.size();
  if (s.rows() != dim || s.cols() != dim || d.size() != dim) {
    throw ValidationError("transform_state: dimension mismatch");
  }
  if (!is_symplectic(s)) throw ValidationError("transform_state: S is not symplectic");
  const Matrix sigma = s * state.covariance.matrix() * s.transpose();
  return GaussianState(s * state.first_moments + d, CovarianceMatrix(0.5 * (sigma + sigma.transpose())));
}

/// Gaussian Wigner function 1/(pi^n sqrt(det Sigma)) exp(-(x-x0)^T Sigma^{-1} (x-x0)).
inline double wigner(const GaussianState& state, const Vector& point) {
  const Matrix& sigma = state.covariance.matrix();
  if (point.size() != sigma.rows()) throw ValidationError("wigner: point has wrong dimension");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw DomainError("wigner: covariance is singular");
  const double det = llt.matrixL().toDenseMatrix().diagonal().prod();  // sqrt(det Sigma)
  if (!(det > 0.0) || !std::isfinite(1.0 / det)) throw DomainError("wigner: covariance is singular");
  const Vector delta = point - state.first_moments;
  const double quad = delta.dot(llt.solve(delta));
  const int n = state.covariance.n_modes();
  return std::exp(-quad) / (std::pow(std::numbers::pi, n) * det);
}

}  // namespace mixedness::symplectic
