#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "porelec/app.hpp"
#include "porelec/errors.hpp"
#include "porelec/io.hpp"

using namespace porelec;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed on scope exit.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) {
    path = fs::temp_directory_path() / ("porelec_test_" + name);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

RunConfig small_config(const ScratchDir& dir) {
  RunConfig c;
  c.set("out_dir", dir.path.string());
  c.set("nx", "12");
  c.set("ny", "10");
  return c;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("field CSV round trip") {
  ScratchDir dir("fieldcsv");
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  FieldTable t;
  for (int k = 0; k < 50; ++k) {
    t.x.push_back(u(rng) * 1e-6);
    t.y.push_back(u(rng));
    t.phi_e.push_back(u(rng) * 1e-9);
    t.phi_l.push_back(u(rng));
    t.eta.push_back(u(rng) * 1e-12);
    t.j.push_back(u(rng) * 1e5);
  }
  write_field_csv(dir.file("f.csv"), t);
  CHECK(lines(dir.file("f.csv")).front() == "x,y,phi_e,phi_l,eta,j");
  const FieldTable r = read_field_csv(dir.file("f.csv"));
  REQUIRE(r.x.size() == t.x.size());
  auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-12 * std::abs(a[i])) return false;
    }
    return true;
  };
  CHECK(close(t.x, r.x));
  CHECK(close(t.phi_e, r.phi_e));
  CHECK(close(t.eta, r.eta));
  CHECK(close(t.j, r.j));
}

TEST_CASE("field table layout is y-major") {
  const StructuredGrid g(3, 2, 3.0, 2.0, 1.0);
  SolutionState s;
  for (int k = 0; k < 6; ++k) {
    s.phi_e.push_back(k);
    s.phi_l.push_back(-k);
    s.eta.push_back(2.0 * k);
    s.j.push_back(0.5 * k);
  }
  const FieldTable t = field_table(g, s);
  CHECK(t.x == std::vector<double>{0.5, 1.5, 2.5, 0.5, 1.5, 2.5});
  CHECK(t.y == std::vector<double>{0.5, 0.5, 0.5, 1.5, 1.5, 1.5});
  CHECK(t.eta[4] == 8.0);
}

TEST_CASE("matrix CSV round trip and errors") {
  ScratchDir dir("matrix");
  const StructuredGrid g(4, 3, 1.0, 1.0, 1.0);
  std::vector<double> v(12);
  for (int k = 0; k < 12; ++k) v[k] = 0.1 * k + 1e-7;
  write_matrix_csv(dir.file("m.csv"), g, v, "seed=5");
  CHECK(lines(dir.file("m.csv")).front() == "# seed=5");
  std::size_t nx = 0, ny = 0;
  const std::vector<double> r = read_matrix_csv(dir.file("m.csv"), nx, ny);
  CHECK(nx == 4);
  CHECK(ny == 3);
  for (int k = 0; k < 12; ++k) CHECK(r[k] == doctest::Approx(v[k]).epsilon(1e-15));
  CHECK_THROWS_AS(read_matrix_csv(dir.file("missing.csv"), nx, ny), IoError);
  std::ofstream(dir.file("ragged.csv")) << "1,2,3\n4,5\n";
  CHECK_THROWS_AS(read_matrix_csv(dir.file("ragged.csv"), nx, ny), IoError);
  CHECK_THROWS_AS(write_table_csv(dir.file("no/such/dir/t.csv"), {"a"}, {}), IoError);
}

TEST_CASE("number formatting keeps 17 significant digits") {
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(-1.5e-300).find('e') != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("defaults describe the reference cell") {
  const RunConfig c;
  const PhysicalParams p = c.physical_params();
  CHECK(p.sigma_ref() == 103.1891);
  CHECK(p.kappa_ref() == 5.9514);
  CHECK(p.E_eq() == -0.1609);
  const StructuredGrid g = c.grid();
  CHECK(g.width() == 5e-3);
  CHECK(g.height() == 0.1);
  CHECK(c.solver().newton_tol == 1e-6);
  CHECK(c.solver().linear.ilu_drop_replacement == 1e-3);
  CHECK(std::get<Galvanostatic>(c.mode()).j_applied == 500.0);
  // documented_defaults is itself a valid config reproducing the defaults.
  const RunConfig again = RunConfig::from_string(RunConfig::documented_defaults());
  CHECK(again.raw("nx") == c.raw("nx"));
  CHECK(again.raw("nx_list") == c.raw("nx_list"));
  CHECK(RunConfig::documented_defaults().find("S/m") != std::string::npos);
}

TEST_CASE("parse errors name the key and line") {
  try {
    RunConfig::from_string("nx = 10\n# comment\nbogus = 3\n", "run.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "bogus");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig::from_string("nx 10\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("nx = 10\nnx = 12\n"), ConfigError);
  const RunConfig bad = RunConfig::from_string("\n\nnx = ten  # cells\n", "a.cfg");
  try {
    (void)bad.grid();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "nx");
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/porelec.cfg"), IoError);
}

TEST_CASE("overrides and typed values") {
  RunConfig c;
  c.apply_override("strategy=DSM");
  c.apply_override("j_applied = 250");
  CHECK(c.reference().strategy == Strategy::Dsm);
  CHECK(std::get<Galvanostatic>(c.mode()).j_applied == 250.0);
  CHECK_THROWS_AS(c.apply_override("nope=1"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("nx"), ConfigError);
  c.set("strategy", "diagonal");
  CHECK_THROWS_AS(c.reference(), ConfigError);
  c.set("nx_list", "16, 32,64");
  CHECK(c.numbers("nx_list") == std::vector<double>{16, 32, 64});
  c.set("j_applied", "-1");
  CHECK_THROWS_AS(c.mode(), ConfigError);
  c.set("j_applied", "nan");
  CHECK_THROWS_AS(c.number("j_applied"), ConfigError);
}

TEST_CASE("reference and mode settings") {
  RunConfig c;
  c.set("nx", "8");
  c.set("ny", "6");
  c.set("constraint_cells", "0:1;0:4");
  c.set("constraint_value", "0.05");
  const ReferenceSpec r = c.reference();
  const StructuredGrid g = c.grid();
  CHECK(r.constraint_cells == std::vector<std::size_t>{g.index(0, 1), g.index(0, 4)});
  c.set("constraint_cells", "9:1");
  CHECK_THROWS_AS(c.reference(), ConfigError);
  c.set("mode", "potentiostatic_neumann");
  c.set("j_sweep", "300");
  CHECK(std::get<PotentiostaticNeumann>(c.mode()).j_sweep == 300.0);
  c.set("mode", "sideways");
  CHECK_THROWS_AS(c.mode(), ConfigError);
}

TEST_CASE("solve command") {
  ScratchDir dir("solve");
  SUBCASE("converged run writes fields, residuals and summary") {
    RunConfig c = small_config(dir);
    std::ostringstream log;
    CHECK(cmd_solve(c, log) == kExitOk);
    const std::vector<std::string> f = lines(dir.file("run_fields.csv"));
    CHECK(f.size() == 1 + 120);
    CHECK(lines(dir.file("run_residuals.csv")).front() == "iter,residual");
    const std::string summary = slurp(dir.file("run_summary.json"));
    CHECK(summary.find("\"converged\": true") != std::string::npos);
    CHECK(summary.find("\"strategy\": \"lcm\"") != std::string::npos);
  }
  SUBCASE("zero current gives zero eta") {
    RunConfig c = small_config(dir);
    c.set("j_applied", "0");
    // The default tolerance bounds sinh(b eta) by 1e-6, i.e. |eta| ~ 5e-8 V.
    c.set("newton_tol", "1e-12");
    std::ostringstream log;
    REQUIRE(cmd_solve(c, log) == kExitOk);
    const FieldTable t = read_field_csv(dir.file("run_fields.csv"));
    double worst = 0.0;
    for (double e : t.eta) worst = std::max(worst, std::abs(e));
    CHECK(worst <= 1e-12);
  }
  SUBCASE("iteration cap maps to exit 2") {
    RunConfig c = small_config(dir);
    c.set("newton_max_iter", "1");
    std::ostringstream log, err;
    CHECK(run_command("solve", c, log, err) == kExitNotConverged);
  }
  SUBCASE("decoupled run also writes the objective trace") {
    RunConfig c = small_config(dir);
    c.set("scheme", "decoupled");
    c.set("strategy", "dsm");
    c.set("j_applied", "500");
    std::ostringstream log;
    CHECK(cmd_solve(c, log) == kExitOk);
    CHECK(fs::exists(dir.file("run_objective_trace.csv")));
  }
  SUBCASE("config errors map to exit 3") {
    RunConfig c = small_config(dir);
    c.set("scheme", "sometimes");
    std::ostringstream log, err;
    CHECK(run_command("solve", c, log, err) == kExitConfig);
    CHECK(err.str().find("scheme") != std::string::npos);
    CHECK(run_command("frobnicate", c, log, err) == kExitConfig);
  }
  SUBCASE("unwritable output maps to exit 4") {
    RunConfig c = small_config(dir);
    std::ofstream(dir.file("blocker")) << "x";
    c.set("out_dir", (dir.path / "blocker" / "sub").string());
    std::ostringstream log, err;
    CHECK(run_command("solve", c, log, err) == kExitIo);
  }
}

TEST_CASE("genfield command is reproducible") {
  ScratchDir dir("genfield");
  RunConfig c = small_config(dir);
  c.set("field", "bimodal");
  c.set("seed", "42");
  std::ostringstream log;
  REQUIRE(cmd_genfield(c, log) == kExitOk);
  const std::string first = slurp(dir.file("run_sigma.csv"));
  REQUIRE(cmd_genfield(c, log) == kExitOk);
  CHECK(slurp(dir.file("run_sigma.csv")) == first);
  CHECK(first.find("seed=42") != std::string::npos);

  std::size_t nx = 0, ny = 0;
  const std::vector<double> sigma = read_matrix_csv(dir.file("run_sigma.csv"), nx, ny);
  const FieldGenConfig fc = c.field_config();
  const double lo = bruggeman(0.2, fc.sigma_solid, fc.kappa_bulk).first;
  const double hi = bruggeman(0.8, fc.sigma_solid, fc.kappa_bulk).first;
  for (double s : sigma) CHECK((s == doctest::Approx(lo).epsilon(1e-15) || s == doctest::Approx(hi).epsilon(1e-15)));

  // The generated porosity feeds a solve.
  RunConfig solve = small_config(dir);
  solve.set("field", "file");
  solve.set("porosity_file", dir.file("run_porosity.csv"));
  solve.set("stem", "hetero");
  CHECK(cmd_solve(solve, log) == kExitOk);
  solve.set("nx", "13");
  std::ostringstream err;
  CHECK(run_command("solve", solve, log, err) == kExitConfig);
}

TEST_CASE("objective-scan command") {
  ScratchDir dir("scan");
  RunConfig c = small_config(dir);
  c.set("scheme", "decoupled");
  c.set("strategy", "dsm");
  c.set("j_applied", "100");
  c.set("n_points", "1");
  std::ostringstream log;
  REQUIRE(cmd_objective_scan(c, log) == kExitOk);
  CHECK(lines(dir.file("run_objective.csv")).size() == 2);

  // Minimum row of a bracketing scan sits within one spacing of the searched reference.
  const SolutionState s = solve_galvanostatic(c.problem(), c.reference(), c.solver());
  c.set("n_points", "21");
  REQUIRE(cmd_objective_scan(c, log) == kExitOk);
  const std::vector<std::string> rows = lines(dir.file("run_objective.csv"));
  REQUIRE(rows.size() == 22);
  double best_c = 0.0, best = INFINITY;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto comma = rows[k].find(',');
    const double cl = std::stod(rows[k].substr(0, comma));
    const double j = std::stod(rows[k].substr(comma + 1));
    if (j < best) {
      best = j;
      best_c = cl;
    }
  }
  CHECK(std::abs(best_c - s.c_l) <= (0.8 - -0.2) / 20.0 + 1e-12);
  c.set("n_points", "0");
  CHECK_THROWS_AS(cmd_objective_scan(c, log), ConfigError);
}

TEST_CASE("sweep command") {
  ScratchDir dir("sweep");
  RunConfig c = small_config(dir);
  c.set("ny", "2");
  std::ostringstream log;
  SUBCASE("empty list writes only the header") {
    c.set("sweep_values", "");
    REQUIRE(cmd_sweep(c, log) == kExitOk);
    CHECK(lines(dir.file("run_sweep.csv")) ==
          std::vector<std::string>{"sweep_value,total_current,mean_eta,converged"});
  }
  SUBCASE("neumann amperes are converted and reproduced") {
    c.set("sweep_mode", "neumann");
    c.set("sweep_values", "2,4,6,8,10");
    REQUIRE(cmd_sweep(c, log) == kExitOk);
    CHECK(log.str().find("j_sweep = 200 A/m^2") != std::string::npos);
    CHECK(log.str().find("j_sweep = 1000 A/m^2") != std::string::npos);
    const std::vector<std::string> rows = lines(dir.file("run_sweep.csv"));
    REQUIRE(rows.size() == 6);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      std::istringstream in(rows[k]);
      std::string a, b;
      std::getline(in, a, ',');
      std::getline(in, b, ',');
      CHECK(std::stod(b) == doctest::Approx(std::stod(a)).epsilon(1e-6));
    }
  }
  SUBCASE("dirichlet equilibrium point has zero current") {
    c.set("sweep_mode", "dirichlet");
    c.set("V_applied", "0");
    c.set("sweep_values", "0.1609");
    c.set("newton_tol", "1e-12");
    REQUIRE(cmd_sweep(c, log) == kExitOk);
    const std::vector<std::string> rows = lines(dir.file("run_sweep.csv"));
    REQUIRE(rows.size() == 2);
    std::istringstream in(rows[1]);
    std::string a, b;
    std::getline(in, a, ',');
    std::getline(in, b, ',');
    CHECK(std::abs(std::stod(b)) <= 1e-10);
  }
}

TEST_CASE("convergence command") {
  ScratchDir dir("conv");
  RunConfig c = small_config(dir);
  c.set("nx_list", "16,32");
  std::ostringstream log;
  REQUIRE(cmd_convergence(c, log) == kExitOk);
  const std::vector<std::string> rows = lines(dir.file("run_convergence.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "nx,L2_error,H1_error,L2_slope,H1_slope");
  CHECK(rows[1].find("nan") != std::string::npos);
  c.set("nx_list", "16,2.5");
  CHECK_THROWS_AS(cmd_convergence(c, log), ConfigError);
}

}  // TEST_SUITE
