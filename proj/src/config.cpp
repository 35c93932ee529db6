#include "porelec/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "porelec/errors.hpp"
#include "porelec/io.hpp"

namespace porelec {

namespace {

struct KeySpec {
  const char* key;
  const char* value;
  const char* doc;
};

// Order is the order of documented_defaults().
constexpr KeySpec kKeys[] = {
    {"nx", "50", "cells along x; x = 0 is the current collector, x = W the separator"},
    {"ny", "50", "cells along y"},
    {"W", "5e-3", "m, electrode width"},
    {"H", "0.1", "m, electrode height"},
    {"L", "0.1", "m, out-of-plane length (converts A to A/m^2 in sweeps)"},

    {"sigma_ref", "103.1891", "S/m, electrode conductivity of homogeneous runs"},
    {"kappa_ref", "5.9514", "S/m, electrolyte conductivity of homogeneous runs"},
    {"s", "1.64e4", "1/m, specific surface area"},
    {"j0", "2.7657", "A/m^2, exchange current density"},
    {"alpha", "0.5", "transfer coefficient; only 0.5 is accepted"},
    {"E_eq", "-0.1609", "V, equilibrium potential"},
    {"F", "96485", "C/mol"},
    {"R", "8.314", "J/(mol K)"},
    {"T", "298.15", "K"},

    {"mode", "galvanostatic", "galvanostatic | potentiostatic_dirichlet | potentiostatic_neumann"},
    {"j_applied", "500", "A/m^2, galvanostatic current density (>= 0)"},
    {"V_applied", "0", "V, electrode potential at x = 0 (potentiostatic)"},
    {"V_sweep", "0.3", "V, electrolyte potential at x = W (potentiostatic_dirichlet)"},
    {"j_sweep", "500", "A/m^2, electrolyte current density at x = W (potentiostatic_neumann)"},

    {"strategy", "lcm", "lcm | dsm | gcm"},
    {"constraint_cells", "", "LCM pinned cells as i:j;i:j (empty: 0:ny/2)"},
    {"constraint_value", "0", "V, LCM pinned electrode potential"},
    {"phi_ref", "0", "V, DSM Dirichlet value and GCM post-processing constant"},
    {"dsm_side", "xmin", "xmin | xmax | ymin | ymax, electrode side made Dirichlet by DSM"},
    {"gcm_x0", "", "GCM post-processing cell i:j (empty: 0:ny/2)"},

    {"scheme", "coupled", "coupled | decoupled"},
    {"newton_tol", "1e-6", "scaled residual max|R_i|/(V_i a)"},
    {"newton_max_iter", "50", ""},
    {"picard_tol", "1e-8", "relative 2-norm change of the source field"},
    {"picard_max_iter", "2000", ""},
    {"init", "zeros", "zeros | phi_l_eq (phi_l = -E_eq)"},
    {"step_clamp", "0", "V, largest Newton update per cell; 0 disables"},
    {"linear_method", "bicgstab_ilu", "bicgstab_ilu | minres | lstr | pinv"},
    {"linear_tol", "1e-10", "relative linear residual"},
    {"linear_max_iter", "5000", ""},
    {"ilu_drop", "1e-3", "value substituted for zero ILU pivots"},
    {"lambda_T", "1e-8", "Tikhonov damping of lstr"},
    {"lambda_shift", "0", "Schur shift of the minimum-residual path"},
    {"dense_cap", "2000", "largest system handed to the dense SVD"},
    {"gmres_restart", "0", "0 = unrestarted"},
    {"lstr_ilu", "true", "right ILU(0) preconditioning inside lstr"},
    {"gcm_method", "lstr", "minres | lstr | pinv, solver of the singular GCM Jacobian"},

    {"beta0", "0", "initial line-search step; <= 0 selects 2J/|grad J|^2"},
    {"rho", "0.5", "backtracking factor"},
    {"c_armijo", "1e-4", "sufficient-decrease constant"},
    {"delta_fd", "1e-6", "V, finite-difference step of the objective gradient"},
    {"fd_mode", "central", "central | forward"},
    {"outer_tol", "1e-12", "objective target relative to (j_applied H)^2"},
    {"outer_max_iter", "100", ""},
    {"picard_iters_per_eval", "0", "Picard sweeps per objective evaluation; 0 = to convergence"},

    {"field", "homogeneous", "homogeneous | bimodal | channelized | file"},
    {"porosity_file", "", "porosity CSV (ny rows of nx values) when field = file"},
    {"eps_low", "0.2", "porosity of the low phase"},
    {"eps_high", "0.8", "porosity of the high phase"},
    {"tile_target_size", "8", "cells, bimodal patch edge"},
    {"patch_fraction", "0.3", "target area share of bimodal patches"},
    {"link_probability", "0.5", "chance of linking two nearby patches"},
    {"n_channels_fraction", "0.1", "channel walkers per row of cells"},
    {"forward_step", "1", "cells per walker advance toward x = 0"},
    {"perturbation_limit", "2", "cells, max vertical jitter per advance"},
    {"p_branch", "0.05", "branching probability per advance"},
    {"sigma_solid", "1000", "S/m, solid conductivity before the Bruggeman factor"},
    {"kappa_bulk", "8.639273770523266", "S/m, bulk electrolyte conductivity"},
    {"seed", "12345", "field generator seed"},

    {"nx_list", "16,32,64,128,256", "convergence study grids (nx x 1)"},
    {"oracle_steps", "10000", "RK4 steps of the 1D oracle"},
    {"oracle_tol", "1e-10", "V/m, oracle boundary mismatch"},

    {"cl_min", "-0.2", "V, objective scan start"},
    {"cl_max", "0.8", "V, objective scan end"},
    {"n_points", "41", "objective scan samples"},

    {"sweep_mode", "neumann", "dirichlet | neumann"},
    {"sweep_values", "", "V (dirichlet) or A (neumann, divided by H L)"},

    {"out_dir", ".", "output directory"},
    {"stem", "run", "output file-name stem"},
};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool known(const std::string& key) {
  return std::any_of(std::begin(kKeys), std::end(kKeys),
                     [&](const KeySpec& k) { return key == k.key; });
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  for (const KeySpec& k : kKeys) entries_[k.key] = Entry{k.value, "default", 0};
}

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + line + "'", {}, line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known(key)) throw ConfigError(where + ": unknown key '" + key + "'", key, line_no);
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + ": key '" + key + "' already set on line " +
                            std::to_string(it->second),
                        key, line_no);
    }
    seen[key] = line_no;
    cfg.entries_[key] = Entry{trim(line.substr(eq + 1)), where, line_no};
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("--set: unknown key '" + key + "'", key);
  entries_[key] = Entry{trim(value), "--set", 0};
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::fail(const std::string& key, const std::string& what) const {
  const Entry& e = entries_.at(key);
  throw ConfigError(e.origin + ": key '" + key + "': " + what, key, e.line);
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown key '" + key + "'", key);
  return it->second.value;
}

double RunConfig::number(const std::string& key) const {
  const std::string& v = raw(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    fail(key, "expected a finite number, got '" + v + "'");
  }
  return out;
}

long RunConfig::integer(const std::string& key) const {
  const std::string& v = raw(key);
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const std::string& v = raw(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool RunConfig::boolean(const std::string& key) const {
  const std::string v = lower(raw(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "expected true or false, got '" + raw(key) + "'");
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split(raw(key), ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v)) {
      fail(key, "expected a comma-separated list of numbers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::choice(const std::string& key,
                              const std::vector<std::string>& allowed) const {
  const std::string v = lower(raw(key));
  if (std::find(allowed.begin(), allowed.end(), v) != allowed.end()) return v;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(key, "expected one of " + list + ", got '" + raw(key) + "'");
}

PhysicalParams RunConfig::physical_params() const {
  PhysicalInputs in;
  in.sigma_ref = number("sigma_ref");
  in.kappa_ref = number("kappa_ref");
  in.s = number("s");
  in.j0 = number("j0");
  in.alpha = number("alpha");
  in.E_eq = number("E_eq");
  in.F = number("F");
  in.R = number("R");
  in.T = number("T");
  try {
    return PhysicalParams(in);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("physical parameters: ") + e.what());
  }
}

StructuredGrid RunConfig::grid() const {
  const long nx = integer("nx");
  const long ny = integer("ny");
  if (nx < 2) fail("nx", "must be at least 2");
  if (ny < 1) fail("ny", "must be at least 1");
  try {
    return StructuredGrid(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                          number("W"), number("H"), number("L"));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

OperatingMode RunConfig::mode() const {
  const std::string m =
      choice("mode", {"galvanostatic", "potentiostatic_dirichlet", "potentiostatic_neumann"});
  if (m == "galvanostatic") {
    if (number("j_applied") < 0.0) fail("j_applied", "must be non-negative");
    return Galvanostatic{number("j_applied")};
  }
  if (m == "potentiostatic_dirichlet") {
    return PotentiostaticDirichlet{number("V_applied"), number("V_sweep")};
  }
  if (number("j_sweep") < 0.0) fail("j_sweep", "must be non-negative");
  return PotentiostaticNeumann{number("V_applied"), number("j_sweep")};
}

namespace {

std::size_t parse_cell(const std::string& item, const StructuredGrid& grid, bool& ok) {
  const auto colon = item.find(':');
  ok = false;
  if (colon == std::string::npos) return 0;
  std::size_t i = 0;
  std::size_t j = 0;
  const std::string a = trim(item.substr(0, colon));
  const std::string b = trim(item.substr(colon + 1));
  auto r1 = std::from_chars(a.data(), a.data() + a.size(), i);
  auto r2 = std::from_chars(b.data(), b.data() + b.size(), j);
  if (r1.ec != std::errc{} || r1.ptr != a.data() + a.size() || r2.ec != std::errc{} ||
      r2.ptr != b.data() + b.size() || i >= grid.nx() || j >= grid.ny()) {
    return 0;
  }
  ok = true;
  return grid.index(i, j);
}

}  // namespace

ReferenceSpec RunConfig::reference() const {
  const std::string s = choice("strategy", {"lcm", "dsm", "gcm"});
  const StructuredGrid g = grid();
  ReferenceSpec ref;
  if (s == "lcm") ref = ReferenceSpec::lcm(number("constraint_value"));
  if (s == "dsm") ref = ReferenceSpec::dsm(number("phi_ref"));
  if (s == "gcm") ref = ReferenceSpec::gcm(number("phi_ref"));
  for (const std::string& item : split(raw("constraint_cells"), ';')) {
    bool ok = false;
    ref.constraint_cells.push_back(parse_cell(item, g, ok));
    if (!ok) fail("constraint_cells", "expected i:j inside the grid, got '" + item + "'");
  }
  if (!ref.constraint_cells.empty()) {
    ref.constraint_values.assign(ref.constraint_cells.size(), number("constraint_value"));
  }
  const std::string side = choice("dsm_side", {"xmin", "xmax", "ymin", "ymax"});
  ref.dsm_side = side == "xmin"   ? Side::XMin
                 : side == "xmax" ? Side::XMax
                 : side == "ymin" ? Side::YMin
                                  : Side::YMax;
  if (!raw("gcm_x0").empty()) {
    bool ok = false;
    ref.x0 = parse_cell(raw("gcm_x0"), g, ok);
    if (!ok) fail("gcm_x0", "expected i:j inside the grid, got '" + raw("gcm_x0") + "'");
  }
  return ref;
}

namespace {

LinearMethod method_from(const std::string& m) {
  if (m == "bicgstab_ilu") return LinearMethod::BicgstabIlu;
  if (m == "minres") return LinearMethod::MinimumResidual;
  if (m == "lstr") return LinearMethod::Lstr;
  return LinearMethod::Pseudoinverse;
}

}  // namespace

SolverConfig RunConfig::solver() const {
  SolverConfig c;
  c.scheme = choice("scheme", {"coupled", "decoupled"}) == "coupled" ? Scheme::Coupled
                                                                      : Scheme::Decoupled;
  c.newton_tol = number("newton_tol");
  c.newton_max_iter = static_cast<int>(integer("newton_max_iter"));
  c.picard_tol = number("picard_tol");
  c.picard_max_iter = static_cast<int>(integer("picard_max_iter"));
  c.init = choice("init", {"zeros", "phi_l_eq"}) == "zeros" ? InitStrategy::Zeros
                                                           : InitStrategy::PhiLEqMinusEeq;
  c.step_clamp = number("step_clamp");
  c.linear.method = method_from(choice("linear_method", {"bicgstab_ilu", "minres", "lstr", "pinv"}));
  c.linear.tol = number("linear_tol");
  c.linear.max_iter = static_cast<int>(integer("linear_max_iter"));
  c.linear.ilu_drop_replacement = number("ilu_drop");
  c.linear.lambda_T = number("lambda_T");
  c.linear.lambda_shift = number("lambda_shift");
  c.linear.dense_cap = static_cast<std::size_t>(unsigned_integer("dense_cap"));
  c.linear.gmres_restart = static_cast<int>(integer("gmres_restart"));
  c.linear.lstr_ilu = boolean("lstr_ilu");
  c.gcm_method = method_from(choice("gcm_method", {"minres", "lstr", "pinv"}));

  LineSearchConfig& ls = c.linesearch;
  ls.beta0 = number("beta0");
  ls.rho = number("rho");
  ls.c_armijo = number("c_armijo");
  ls.delta_fd = number("delta_fd");
  ls.fd_mode = choice("fd_mode", {"central", "forward"}) == "central" ? FdMode::Central
                                                                      : FdMode::Forward;
  ls.outer_tol = number("outer_tol");
  ls.outer_max_iter = static_cast<int>(integer("outer_max_iter"));
  ls.picard_iters_per_eval = static_cast<int>(integer("picard_iters_per_eval"));
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("solver settings: ") + e.what());
  }
  return c;
}

FieldGenConfig RunConfig::field_config() const {
  FieldGenConfig f;
  const std::string kind = choice("field", {"homogeneous", "bimodal", "channelized", "file"});
  f.kind = kind == "channelized" ? FieldKind::Channelized : FieldKind::Bimodal;
  f.eps_low = number("eps_low");
  f.eps_high = number("eps_high");
  f.tile_target_size = number("tile_target_size");
  f.patch_fraction = number("patch_fraction");
  f.link_probability = number("link_probability");
  f.n_channels_fraction = number("n_channels_fraction");
  f.forward_step = static_cast<int>(integer("forward_step"));
  f.perturbation_limit = static_cast<int>(integer("perturbation_limit"));
  f.p_branch = number("p_branch");
  f.sigma_solid = number("sigma_solid");
  f.kappa_bulk = number("kappa_bulk");
  f.seed = unsigned_integer("seed");
  try {
    f.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("field settings: ") + e.what());
  }
  return f;
}

ConvergenceSetup RunConfig::convergence_setup() const {
  ConvergenceSetup s;
  s.params = physical_params();
  s.W = number("W");
  s.H = number("H");
  s.L = number("L");
  s.j_applied = number("j_applied");
  if (s.j_applied < 0.0) fail("j_applied", "must be non-negative");
  s.reference = reference();
  s.reference.constraint_cells.clear();
  s.reference.constraint_values.clear();
  s.reference.x0.reset();
  s.solver = solver();
  s.shooting.ode_steps = static_cast<int>(integer("oracle_steps"));
  s.shooting.tol = number("oracle_tol");
  if (s.shooting.ode_steps < 1) fail("oracle_steps", "must be positive");
  if (!(s.shooting.tol > 0.0)) fail("oracle_tol", "must be positive");
  return s;
}

Problem RunConfig::problem() const {
  const StructuredGrid g = grid();
  const PhysicalParams params = physical_params();
  const OperatingMode m = mode();
  const std::string kind = choice("field", {"homogeneous", "bimodal", "channelized", "file"});
  if (kind == "homogeneous") return Problem::homogeneous(g, params, m);

  const FieldGenConfig fc = field_config();
  PorosityField eps;
  if (kind == "file") {
    if (raw("porosity_file").empty()) fail("porosity_file", "required when field = file");
    std::size_t nx = 0;
    std::size_t ny = 0;
    eps.eps = read_matrix_csv(raw("porosity_file"), nx, ny);
    if (nx != g.nx() || ny != g.ny()) {
      fail("porosity_file", "field is " + std::to_string(nx) + "x" + std::to_string(ny) +
                                ", grid is " + std::to_string(g.nx()) + "x" +
                                std::to_string(g.ny()));
    }
  } else {
    eps = generate_field(g, fc);
  }
  return Problem{g, conductivity_from_porosity(eps, fc.sigma_solid, fc.kappa_bulk), params, m};
}

std::string RunConfig::output_path(const std::string& suffix) const {
  std::string dir = raw("out_dir");
  if (dir.empty()) dir = ".";
  if (dir.back() != '/') dir += '/';
  return dir + raw("stem") + suffix;
}

std::string RunConfig::documented_defaults() {
  std::ostringstream out;
  for (const KeySpec& k : kKeys) {
    out << k.key << " = " << k.value;
    if (*k.doc) out << "  # " << k.doc;
    out << '\n';
  }
  return out.str();
}

}  // namespace porelec
