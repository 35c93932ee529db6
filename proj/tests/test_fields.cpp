#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "porelec/errors.hpp"
#include "porelec/fields.hpp"

using namespace porelec;

namespace {

double high_fraction(const PorosityField& f, double eps_high) {
  return static_cast<double>(std::count(f.eps.begin(), f.eps.end(), eps_high)) /
         static_cast<double>(f.eps.size());
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("bruggeman correction") {
  const auto [sigma, kappa] = bruggeman(0.78, 1000.0, 5.9514 / std::pow(0.78, 1.5));
  CHECK(std::abs(sigma - 103.1891) <= 1e-3 * 103.1891);
  CHECK(kappa == doctest::Approx(5.9514).epsilon(1e-12));
  const auto [s2, k2] = bruggeman(0.78, 1000.0, 8.6392);
  CHECK(k2 == doctest::Approx(5.9514).epsilon(1e-4));
  CHECK(s2 == sigma);
  const auto [s3, k3] = bruggeman(0.5, 1.0, 1.0);
  CHECK(s3 == doctest::Approx(0.35355339).epsilon(1e-8));
  CHECK(k3 == doctest::Approx(0.35355339).epsilon(1e-8));
  CHECK(FieldGenConfig{}.kappa_bulk == doctest::Approx(5.9514 / std::pow(0.78, 1.5)).epsilon(1e-14));
  for (double bad : {0.0, 1.0, -0.1, 1.5}) CHECK_THROWS_AS(bruggeman(bad, 1.0, 1.0), ParameterError);
}

TEST_CASE("config validation") {
  const StructuredGrid g(10, 10, 5e-3, 0.1, 0.1);
  FieldGenConfig c;
  c.eps_low = 0.9;
  CHECK_THROWS_AS(generate_bimodal(g, c), ParameterError);
  c = FieldGenConfig{};
  c.link_probability = 1.5;
  CHECK_THROWS_AS(generate_bimodal(g, c), ParameterError);
  c = FieldGenConfig{};
  c.p_branch = -0.1;
  CHECK_THROWS_AS(generate_channelized(g, c), ParameterError);
}

TEST_CASE("bimodal field") {
  const StructuredGrid g(50, 50, 5e-3, 0.1, 0.1);
  FieldGenConfig c;
  const PorosityField f = generate_bimodal(g, c);
  REQUIRE(f.eps.size() == g.size());
  const std::set<double> values(f.eps.begin(), f.eps.end());
  CHECK(values == std::set<double>{0.2, 0.8});
  const double frac = high_fraction(f, 0.8);
  CHECK(frac >= 0.1);
  CHECK(frac <= 0.6);
  CHECK(generate_bimodal(g, c).eps == f.eps);
  c.seed += 1;
  CHECK(generate_bimodal(g, c).eps != f.eps);

  SUBCASE("no patches and no links give the base field") {
    FieldGenConfig none;
    none.patch_fraction = 0.0;
    none.link_probability = 0.0;
    const PorosityField u = generate_bimodal(g, none);
    CHECK(std::all_of(u.eps.begin(), u.eps.end(), [](double e) { return e == 0.2; }));
  }
  SUBCASE("fraction holds over seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      FieldGenConfig s;
      s.seed = seed;
      const double fr = high_fraction(generate_bimodal(g, s), 0.8);
      CHECK(fr >= 0.1);
      CHECK(fr <= 0.6);
    }
  }
}

TEST_CASE("channelized field") {
  SUBCASE("degenerate walk is a straight row") {
    const StructuredGrid g(30, 20, 5e-3, 0.1, 0.1);
    FieldGenConfig c;
    c.kind = FieldKind::Channelized;
    c.n_channels_fraction = 0.05;  // one channel
    c.perturbation_limit = 0;
    c.p_branch = 0.0;
    const PorosityField f = generate_channelized(g, c);
    int full_rows = 0;
    int high_cells = 0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
      int row_high = 0;
      for (std::size_t i = 0; i < g.nx(); ++i) row_high += f.eps[g.index(i, j)] == c.eps_high;
      high_cells += row_high;
      full_rows += row_high == static_cast<int>(g.nx());
    }
    CHECK(full_rows == 1);
    CHECK(high_cells == static_cast<int>(g.nx()));
  }
  SUBCASE("spans x for 100 seeds") {
    const StructuredGrid g(50, 50, 5e-3, 0.1, 0.1);
    int spanning = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      FieldGenConfig c;
      c.kind = FieldKind::Channelized;
      c.seed = seed;
      const PorosityField f = generate_field(g, c);
      spanning += spans_x(f, g, c.eps_high);
      const std::set<double> values(f.eps.begin(), f.eps.end());
      CHECK(values.size() <= 2);
    }
    CHECK(spanning == 100);
  }
  SUBCASE("deterministic") {
    const StructuredGrid g(40, 25, 5e-3, 0.1, 0.1);
    FieldGenConfig c;
    c.kind = FieldKind::Channelized;
    c.seed = 77;
    CHECK(generate_channelized(g, c).eps == generate_channelized(g, c).eps);
  }
}

TEST_CASE("spanning check") {
  const StructuredGrid g(4, 3, 1.0, 1.0, 1.0);
  PorosityField f{std::vector<double>(12, 0.2)};
  CHECK_FALSE(spans_x(f, g, 0.8));
  // An L-shaped path: row 0 from x = W to i = 2, up to row 1, then left.
  for (std::size_t i : {3, 2}) f.eps[g.index(i, 0)] = 0.8;
  for (std::size_t i : {2, 1, 0}) f.eps[g.index(i, 1)] = 0.8;
  CHECK(spans_x(f, g, 0.8));
  f.eps[g.index(1, 1)] = 0.2;
  f.eps[g.index(1, 0)] = 0.8;  // diagonal contact only
  f.eps[g.index(2, 0)] = 0.2;
  CHECK_FALSE(spans_x(f, g, 0.8));
}

TEST_CASE("conductivity fields are positive and follow the phases") {
  const StructuredGrid g(20, 20, 5e-3, 0.1, 0.1);
  FieldGenConfig c;
  const PorosityField f = generate_bimodal(g, c);
  const ConductivityField k = conductivity_from_porosity(f, c.sigma_solid, c.kappa_bulk);
  k.validate(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [s, kk] = bruggeman(f.eps[i], c.sigma_solid, c.kappa_bulk);
    CHECK(k.sigma[i] == s);
    CHECK(k.kappa[i] == kk);
  }
}

}  // TEST_SUITE
