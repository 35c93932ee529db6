#include "porelec/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "porelec/errors.hpp"

namespace porelec {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(name) + " must be positive and finite, got " +
                         std::to_string(value));
  }
}

double clamp_exponent(double x) noexcept {
  return std::clamp(x, -kMaxExponent, kMaxExponent);
}

}  // namespace

SourceCoefficients derive_coefficients(double s, double j0, double faraday,
                                       double gas_constant, double temperature) {
  require_positive(s, "specific surface area s");
  require_positive(j0, "exchange current density j0");
  require_positive(faraday, "Faraday constant F");
  require_positive(gas_constant, "gas constant R");
  require_positive(temperature, "temperature T");
  return {2.0 * s * j0, 0.5 * faraday / (gas_constant * temperature)};
}

PhysicalParams::PhysicalParams(const PhysicalInputs& inputs)
    : in_(inputs),
      coeff_(derive_coefficients(inputs.s, inputs.j0, inputs.F, inputs.R, inputs.T)) {
  require_positive(in_.sigma_ref, "sigma_ref");
  require_positive(in_.kappa_ref, "kappa_ref");
  if (in_.alpha != 0.5) {
    throw ParameterError("only the symmetric transfer coefficient alpha = 0.5 is supported");
  }
  if (!std::isfinite(in_.E_eq)) throw ParameterError("E_eq must be finite");
}

double overpotential(double phi_e, double phi_l, double E_eq) noexcept {
  return phi_e - phi_l - E_eq;
}

double bv_source(double eta, double a, double b) noexcept {
  return a * std::sinh(clamp_exponent(b * eta));
}

double bv_source_derivative(double eta, double a, double b) noexcept {
  return a * b * std::cosh(clamp_exponent(b * eta));
}

double reaction_current(double eta, double j0, double b) noexcept {
  return 2.0 * j0 * std::sinh(clamp_exponent(b * eta));
}

SourceEval evaluate_source(double eta, double a, double b) noexcept {
  const double x = b * eta;
  const double xc = clamp_exponent(x);
  return {a * std::sinh(xc), a * b * std::cosh(xc), xc != x};
}

void validate_mode(const OperatingMode& mode) {
  auto check = [](double j, const char* name) {
    if (!std::isfinite(j) || j < 0.0) {
      throw ParameterError(std::string(name) + " must be a non-negative current density");
    }
  };
  if (const auto* g = std::get_if<Galvanostatic>(&mode)) check(g->j_applied, "j_applied");
  if (const auto* n = std::get_if<PotentiostaticNeumann>(&mode)) check(n->j_sweep, "j_sweep");
  if (const auto* d = std::get_if<PotentiostaticDirichlet>(&mode)) {
    if (!std::isfinite(d->V_applied) || !std::isfinite(d->V_sweep)) {
      throw ParameterError("potentiostatic potentials must be finite");
    }
  }
}

}  // namespace porelec
