#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "errors.hpp"

namespace mixedness {

enum class Regulator { None, Mass, Cavity };

inline const char* regulator_name(Regulator r) {
  switch (r) {
    case Regulator::None: return "None";
    case Regulator::Mass: return "Mass";
    case Regulator::Cavity: return "Cavity";
  }
  return "?";
}

inline Regulator parse_regulator(const std::string& s) {
  if (s == "None" || s == "none") return Regulator::None;
  if (s == "Mass" || s == "mass") return Regulator::Mass;
  if (s == "Cavity" || s == "cavity") return Regulator::Cavity;
  throw ValidationError("unknown regulator '" + s + "'");
}

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

/// Free scalar field in n spatial dimensions, omega_k = sqrt(k^2 + M^2).
struct FieldSpec {
  int dim = 1;
  double mass = 0.0;
  double beta = kInfiniteBeta;
  Regulator regulator = Regulator::None;
  double cavity_length = 0.0;  // Cavity only

  void validate() const {
    if (dim < 1 || dim > 3) throw ValidationError("field dim must be 1, 2 or 3");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw ValidationError("field mass must be >= 0");
    if (!(beta > 0.0)) throw ValidationError("field beta must be > 0 (use infinity for vacuum)");
    if (regulator == Regulator::Mass && !(mass > 0.0))
      throw ValidationError("Mass regulator requires mass > 0");
    if (regulator == Regulator::Cavity) {
      if (dim != 1) throw ValidationError("Cavity regulator requires dim = 1");
      if (!(cavity_length > 0.0) || !std::isfinite(cavity_length))
        throw ValidationError("Cavity regulator requires a positive length");
    }
  }

  double omega(double k) const { return std::sqrt(k * k + mass * mass); }
  bool vacuum() const { return std::isinf(beta); }

  /// T = 0 maps to beta = infinity.
  static double beta_from_temperature(double temperature) {
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
    return temperature == 0.0 ? kInfiniteBeta : 1.0 / temperature;
  }
};

struct QuadratureConfig {
  double rel_tol = 1e-8;
  /// Explicit UV cutoff as a multiple of 1/ell (k_max * ell); automatic tail bound when empty.
  std::optional<double> uv_cutoff_kl;
  /// Explicit highest cavity mode index; automatic tail bound when empty.
  std::optional<long long> cavity_jmax;

  void validate() const {
    if (!(rel_tol > 1e-14 && rel_tol < 1e-2)) throw ValidationError("rel_tol must lie in (1e-14, 1e-2)");
    if (uv_cutoff_kl && !(*uv_cutoff_kl > 0.0)) throw ValidationError("uv_cutoff_kl must be > 0");
    if (cavity_jmax && *cavity_jmax < 1) throw ValidationError("cavity_jmax must be >= 1");
  }
};

/// coth(beta * omega / 2), saturating for large and small arguments.
inline double coth_half(double beta, double omega) {
  if (std::isinf(beta)) return 1.0;
  const double y = beta * omega;
  if (y > 50.0) return 1.0;
  if (y < 1e-6) return 2.0 / y + y / 6.0;
  return 1.0 / std::tanh(0.5 * y);
}

}  // namespace mixedness
