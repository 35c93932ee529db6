#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "porelec/errors.hpp"
#include "porelec/model.hpp"

using namespace porelec;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// 50-digit evaluation, independent of std::sinh.
double big_sinh(double x) { return static_cast<double>(boost::multiprecision::sinh(Big(x))); }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("derived coefficients match the reference cell") {
  const SourceCoefficients c = derive_coefficients(1.64e4, 2.7657, 96485.0, 8.314, 298.15);
  const Big a = Big(2) * Big("1.64e4") * Big("2.7657");
  const Big b = Big("0.5") * Big(96485) / (Big("8.314") * Big("298.15"));
  CHECK(c.a == doctest::Approx(static_cast<double>(a)).epsilon(1e-12));
  CHECK(c.b == doctest::Approx(static_cast<double>(b)).epsilon(1e-12));
  CHECK(c.a == doctest::Approx(9.071496e4).epsilon(1e-6));
  CHECK(c.b == doctest::Approx(19.4619).epsilon(1e-5));

  const SourceCoefficients unit = derive_coefficients(1.0, 0.5, 96485.0, 8.314, 298.15);
  CHECK(unit.a == 1.0);
}

TEST_CASE("non-positive inputs are rejected") {
  CHECK_THROWS_AS(derive_coefficients(1.64e4, 0.0, 96485.0, 8.314, 298.15), ParameterError);
  CHECK_THROWS_AS(derive_coefficients(-1.0, 1.0, 96485.0, 8.314, 298.15), ParameterError);
  CHECK_THROWS_AS(derive_coefficients(1.0, 1.0, 96485.0, 8.314, 0.0), ParameterError);

  PhysicalInputs in;
  in.alpha = 0.4;
  CHECK_THROWS_AS(PhysicalParams{in}, ParameterError);
  in = {};
  in.kappa_ref = 0.0;
  CHECK_THROWS_AS(PhysicalParams{in}, ParameterError);
  in = {};
  in.j0 = 0.0;
  CHECK_THROWS_AS(PhysicalParams{in}, ParameterError);
}

TEST_CASE("params expose a = 2 s j0 and b = 0.5 F / (R T)") {
  const PhysicalParams p;
  CHECK(p.a() == doctest::Approx(2.0 * p.s() * p.j0()).epsilon(1e-15));
  CHECK(p.b() == doctest::Approx(0.5 * 96485.0 / (8.314 * 298.15)).epsilon(1e-15));
  CHECK(p.alpha() == 0.5);
}

TEST_CASE("overpotential") {
  CHECK(overpotential(0.0, 0.0, 0.0) == 0.0);
  CHECK(overpotential(0.0, 0.1609, -0.1609) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(overpotential(0.05, 0.20, -0.1609) == doctest::Approx(0.0109).epsilon(1e-12));
}

TEST_CASE("source against a 50-digit evaluator") {
  const PhysicalParams p;
  CHECK(bv_source(0.0, p.a(), p.b()) == 0.0);
  const double f = bv_source(-0.05, p.a(), p.b());
  CHECK(f == doctest::Approx(p.a() * big_sinh(-0.05 * p.b())).epsilon(1e-14));
  CHECK(f == doctest::Approx(-1.0289e5).epsilon(1e-4));

  for (double eta : {-0.3, -0.07, -1e-4, 2e-3, 0.11, 0.4}) {
    CAPTURE(eta);
    CHECK(bv_source(eta, p.a(), p.b()) ==
          doctest::Approx(p.a() * big_sinh(p.b() * eta)).epsilon(1e-13));
  }
}

TEST_CASE("source is odd and strictly increasing") {
  const PhysicalParams p;
  for (double eta = -0.5; eta <= 0.5; eta += 0.0125) {
    CAPTURE(eta);
    CHECK(bv_source(-eta, p.a(), p.b()) == -bv_source(eta, p.a(), p.b()));
    const double h = 1e-7;
    const double fd = (bv_source(eta + h, p.a(), p.b()) - bv_source(eta - h, p.a(), p.b())) / (2 * h);
    CHECK(fd > 0.0);
    CHECK(fd == doctest::Approx(bv_source_derivative(eta, p.a(), p.b())).epsilon(1e-6));
  }
}

TEST_CASE("reaction current") {
  const PhysicalParams p;
  CHECK(reaction_current(0.0, p.j0(), p.b()) == 0.0);
  // The often-quoted -6.2738 is off in the fourth digit; 2 j0 sinh(-0.97310) = -6.2732.
  const double j = reaction_current(-0.05, p.j0(), p.b());
  CHECK(j == doctest::Approx(2.0 * p.j0() * big_sinh(-0.05 * p.b())).epsilon(1e-14));
  CHECK(j == doctest::Approx(-6.2732).epsilon(1e-4));
  for (double eta : {-0.2, -0.01, 0.03, 0.25}) {
    CHECK(p.s() * reaction_current(eta, p.j0(), p.b()) ==
          doctest::Approx(bv_source(eta, p.a(), p.b())).epsilon(1e-14));
  }
}

TEST_CASE("exponent clamp keeps values finite and reports itself") {
  const PhysicalParams p;
  const SourceEval e = evaluate_source(100.0, p.a(), p.b());
  CHECK(e.clamped);
  CHECK(std::isfinite(e.value));
  CHECK(std::isfinite(e.derivative));
  CHECK(e.value == doctest::Approx(p.a() * std::sinh(kMaxExponent)));
  CHECK_FALSE(evaluate_source(0.1, p.a(), p.b()).clamped);
}

TEST_CASE("operating modes reject negative currents") {
  CHECK_THROWS_AS(validate_mode(Galvanostatic{-1.0}), ParameterError);
  CHECK_THROWS_AS(validate_mode(PotentiostaticNeumann{0.0, -5.0}), ParameterError);
  CHECK_NOTHROW(validate_mode(Galvanostatic{0.0}));
  CHECK_NOTHROW(validate_mode(PotentiostaticDirichlet{0.0, 0.3}));
}

}  // TEST_SUITE
