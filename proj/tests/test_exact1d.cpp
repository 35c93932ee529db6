#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "porelec/errors.hpp"
#include "porelec/exact1d.hpp"

using namespace porelec;

namespace {

constexpr double kW = 5e-3;

ExactProblem reference_problem(double j) {
  const PhysicalParams p;
  return ExactProblem::galvanostatic(p, p.sigma_ref(), p.kappa_ref(), kW, j);
}

// Adaptive Dormand-Prince integration of eta'' = c' sinh(b eta), independent of
// the library's fixed-step integrator.
std::array<double, 2> odeint_end(const ExactProblem& p, double eta0, double q1) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  State s{eta0, q1};
  const double cp = p.c_prime();
  auto rhs = [&](const State& y, State& dy, double) {
    dy[0] = y[1];
    dy[1] = cp * std::sinh(p.b * y[0]);
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs,
                          s, 0.0, p.W, p.W / 1000);
  return s;
}

}  // namespace

TEST_SUITE("exact1d") {

TEST_CASE("coefficients and boundary slopes") {
  const PhysicalParams params;
  const ExactProblem p = reference_problem(500.0);
  CHECK(p.c_prime() == doctest::Approx(params.a() / 103.1891 + params.a() / 5.9514).epsilon(1e-14));
  CHECK(p.q1 == doctest::Approx(500.0 / 103.1891).epsilon(1e-14));
  CHECK(p.q2 == doctest::Approx(-500.0 / 5.9514).epsilon(1e-14));
  const ExactProblem c = ExactProblem::current_driven(params, 103.1891, 5.9514, kW, -10.0);
  CHECK(c.q1 == doctest::Approx(10.0 * 5.9514 / 103.1891).epsilon(1e-14));
  CHECK_THROWS_AS(ExactProblem::galvanostatic(params, 0.0, 5.9514, kW, 500.0), ParameterError);
}

TEST_CASE("zero current is equilibrium") {
  const ShootingResult r = shoot_eta0(reference_problem(0.0));
  CHECK(r.eta0 == 0.0);
  CHECK(std::all_of(r.eta.begin(), r.eta.end(), [](double e) { return e == 0.0; }));
}

TEST_CASE("shot trajectory matches an adaptive integrator") {
  for (double j : {100.0, 500.0, 1000.0}) {
    const ExactProblem p = reference_problem(j);
    const ShootingResult r = shoot_eta0(p);
    CHECK(std::abs(r.deta.back() - p.q2) <= 1e-10);
    const auto end = odeint_end(p, r.eta0, p.q1);
    CHECK(end[0] == doctest::Approx(r.eta.back()).epsilon(1e-9));
    CHECK(end[1] == doctest::Approx(p.q2).epsilon(1e-7));
  }
}

TEST_CASE("reduction profile at 500 A/m^2") {
  const ExactProblem p = reference_problem(500.0);
  const ShootingResult r = shoot_eta0(p);
  CHECK(r.eta0 < 0.0);
  CHECK(r.eta.back() < 0.0);
  // eta'' = c' sinh(b eta) < 0 while eta < 0: concave, rising from x = 0 and
  // falling into x = W.
  int convex = 0;
  for (std::size_t k = 1; k + 1 < r.eta.size(); ++k) {
    if (r.eta[k + 1] - 2 * r.eta[k] + r.eta[k - 1] >= 0.0) ++convex;
  }
  CHECK(convex == 0);
  CHECK(std::abs(r.eta.back()) > std::abs(r.eta0));
  // First integral 0.5 eta'^2 - (c'/b) cosh(b eta) is constant.
  CHECK(r.first_integral_drift <= 1e-8 * std::abs(r.first_integral));
}

TEST_CASE("negating the boundary slopes negates the profile") {
  ExactProblem p = reference_problem(700.0);
  const ShootingResult r = shoot_eta0(p);
  p.q1 = -p.q1;
  p.q2 = -p.q2;
  const ShootingResult m = shoot_eta0(p);
  REQUIRE(m.eta.size() == r.eta.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < r.eta.size(); ++k) worst = std::max(worst, std::abs(m.eta[k] + r.eta[k]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("seeded rerun is a fixed point") {
  const ExactProblem p = reference_problem(500.0);
  const ShootingResult r = shoot_eta0(p);
  ShootingOptions o;
  o.seed = r.eta0;
  const ShootingResult again = shoot_eta0(p, o);
  CHECK(again.iterations <= 2);
  CHECK(again.eta0 == doctest::Approx(r.eta0).epsilon(1e-12));
}

TEST_CASE("fourth order in the step size") {
  const ExactProblem p = reference_problem(1000.0);
  std::vector<double> eta_w;
  for (int steps : {25, 50, 100}) {
    ShootingOptions o;
    o.ode_steps = steps;
    o.tol = 1e-13;
    eta_w.push_back(shoot_eta0(p, o).eta0);
  }
  const double ratio = (eta_w[0] - eta_w[1]) / (eta_w[1] - eta_w[2]);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("profile sampling") {
  const ExactProblem p = reference_problem(500.0);
  const ShootingResult r = shoot_eta0(p);
  const std::vector<double> ends{0.0, kW};
  const std::vector<double> v = eta_profile(r, ends);
  CHECK(v[0] == r.eta0);
  CHECK(v[1] == doctest::Approx(r.eta.back()).epsilon(1e-14));
  const std::vector<double> bad{kW * 1.01};
  CHECK_THROWS_AS(eta_profile(r, bad), ParameterError);
}

TEST_CASE("quadrature inversion recovers x") {
  const ExactProblem p = reference_problem(500.0);
  const ShootingResult r = shoot_eta0(p);
  const double cp = p.c_prime();
  // On the rising branch x = int_{eta0}^{eta(x)} d(eta) / sqrt(2 (C + (c'/b) cosh(b eta))).
  auto slope = [&](double e) { return std::sqrt(2.0 * (r.first_integral + cp / p.b * std::cosh(p.b * e))); };
  std::size_t peak = 0;
  while (peak + 1 < r.deta.size() && r.deta[peak + 1] > 0.0) ++peak;
  REQUIRE(peak > 10);
  int checked = 0;
  for (double frac : {0.1, 0.25, 0.4, 0.55, 0.7}) {
    const double x = frac * r.x[peak];
    const std::vector<double> xs{x};
    const double e = eta_profile(r, xs)[0];
    const double recovered = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return 1.0 / slope(t); }, r.eta0, e, 8, 1e-13);
    CHECK(std::abs(recovered - x) <= 1e-6 * kW);
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("shoot_slope hits both end values") {
  const ExactProblem p = reference_problem(0.0);
  const ShootingResult r = shoot_slope(p, -0.05, -0.12);
  CHECK(r.eta0 == -0.05);
  CHECK(std::abs(r.eta.back() + 0.12) <= 1e-10);
  const auto end = odeint_end(p, -0.05, r.q1);
  CHECK(end[0] == doctest::Approx(-0.12).epsilon(1e-8));
}

TEST_CASE("potential reconstruction") {
  const PhysicalParams params;
  SUBCASE("zero current") {
    const ExactProblem p = reference_problem(0.0);
    const Potentials1D pot = reconstruct_1d_potentials(shoot_eta0(p), p, 0.2);
    for (std::size_t k = 0; k < pot.x.size(); ++k) {
      CHECK(pot.phi_e[k] == 0.2);
      CHECK(pot.phi_l[k] == doctest::Approx(0.2 - params.E_eq()).epsilon(1e-15));
    }
  }
  SUBCASE("total current identity and drops") {
    const ExactProblem p = reference_problem(1000.0);
    const ShootingResult r = shoot_eta0(p);
    std::vector<double> xs;
    for (int k = 0; k < 20; ++k) xs.push_back(kW * (k + 0.5) / 20.0);
    const Potentials1D pot = reconstruct_1d_potentials(r, p, 0.0, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double total = p.sigma * pot.dphi_e[k] + p.kappa * pot.dphi_l[k];
      CHECK(total == doctest::Approx(1000.0).epsilon(1e-8));
    }
    const Potentials1D full = reconstruct_1d_potentials(r, p, 0.0);
    const double drop_e = std::abs(full.phi_e.back() - full.phi_e.front());
    const double drop_l = std::abs(full.phi_l.back() - full.phi_l.front());
    CHECK(drop_l > drop_e);
    // Electrode current leaves at x = 0 and the electrolyte current at x = W.
    CHECK(p.sigma * full.dphi_e.front() == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(p.kappa * full.dphi_l.back() == doctest::Approx(1000.0).epsilon(1e-8));
  }
}

}  // TEST_SUITE
