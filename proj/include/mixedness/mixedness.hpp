#pragma once

#include "errors.hpp"
#include "field.hpp"
#include "fock_oracle.hpp"
#include "harvesting.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "piecewise_polynomial.hpp"
#include "profiles.hpp"
#include "quadrature.hpp"
#include "symplectic.hpp"
#include "thermal_purity.hpp"
#include "units.hpp"

namespace mixedness {
inline constexpr const char* kVersion = "0.1.0";
}
