#pragma once

#include <variant>

namespace porelec {

/// Arguments of sinh/cosh are clamped to |b*eta| <= kMaxExponent.
inline constexpr double kMaxExponent = 300.0;

struct SourceCoefficients {
  double a;  ///< source amplitude, A/m^3
  double b;  ///< exponent coefficient, 1/V
};

/// a = 2 s j0, b = 0.5 F / (R T). Throws ParameterError on non-positive input.
SourceCoefficients derive_coefficients(double s, double j0, double faraday,
                                       double gas_constant, double temperature);

/// Raw electrochemical inputs. Defaults are the reference cell used throughout
/// the examples and tests.
struct PhysicalInputs {
  double sigma_ref = 103.1891;  // S/m, electrode conductivity
  double kappa_ref = 5.9514;    // S/m, electrolyte conductivity
  double s = 1.64e4;            // 1/m, specific surface area
  double j0 = 2.7657;           // A/m^2, exchange current density
  double alpha = 0.5;           // transfer coefficient, only 0.5 is supported
  double E_eq = -0.1609;        // V, equilibrium potential
  double F = 96485.0;           // C/mol
  double R = 8.314;             // J/(mol K)
  double T = 298.15;            // K
};

/// Validated parameter set with the derived source coefficients. Immutable.
class PhysicalParams {
 public:
  PhysicalParams() : PhysicalParams(PhysicalInputs{}) {}
  explicit PhysicalParams(const PhysicalInputs& inputs);

  const PhysicalInputs& inputs() const noexcept { return in_; }
  double sigma_ref() const noexcept { return in_.sigma_ref; }
  double kappa_ref() const noexcept { return in_.kappa_ref; }
  double s() const noexcept { return in_.s; }
  double j0() const noexcept { return in_.j0; }
  double alpha() const noexcept { return in_.alpha; }
  double E_eq() const noexcept { return in_.E_eq; }
  double a() const noexcept { return coeff_.a; }
  double b() const noexcept { return coeff_.b; }

 private:
  PhysicalInputs in_;
  SourceCoefficients coeff_;
};

double overpotential(double phi_e, double phi_l, double E_eq) noexcept;

/// a sinh(b eta), with the exponent clamped.
double bv_source(double eta, double a, double b) noexcept;

/// d/d(eta) of bv_source: a b cosh(b eta), with the exponent clamped.
double bv_source_derivative(double eta, double a, double b) noexcept;

/// Reaction current density 2 j0 sinh(b eta); s * reaction_current == bv_source.
double reaction_current(double eta, double j0, double b) noexcept;

struct SourceEval {
  double value;
  double derivative;
  bool clamped;
};

/// Source value and derivative in one pass, reporting whether clamping fired.
SourceEval evaluate_source(double eta, double a, double b) noexcept;

struct Galvanostatic {
  double j_applied = 0.0;  // A/m^2, non-negative
};

struct PotentiostaticDirichlet {
  double V_applied = 0.0;  // V at electrode x = 0
  double V_sweep = 0.0;    // V at electrolyte x = W
};

struct PotentiostaticNeumann {
  double V_applied = 0.0;  // V at electrode x = 0
  double j_sweep = 0.0;    // A/m^2 at electrolyte x = W, non-negative
};

using OperatingMode =
    std::variant<Galvanostatic, PotentiostaticDirichlet, PotentiostaticNeumann>;

/// Throws ParameterError when a current density is negative or non-finite.
void validate_mode(const OperatingMode& mode);

}  // namespace porelec
