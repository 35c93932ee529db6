#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "porelec/app.hpp"
#include "porelec/errors.hpp"

namespace {

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled electrode/electrolyte potential solver"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool print_defaults = false;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--set", overrides, "override one key, k=v (repeatable)")->take_all();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "field generator seed");
  app.add_flag("--print-defaults", print_defaults, "print every config key with its default");

  app.add_subcommand("solve", "solve one problem, write fields and a summary");

  auto* conv = app.add_subcommand("convergence", "grid study against the 1D exact solution");
  std::vector<double> nx_list;
  conv->add_option("--nx", nx_list, "grid sizes (nx x 1)")->delimiter(',');

  auto* scan = app.add_subcommand("objective-scan", "sample the decoupled objective over c_l");
  std::optional<double> cl_min;
  std::optional<double> cl_max;
  std::optional<long> n_points;
  scan->add_option("--cl-min", cl_min, "V");
  scan->add_option("--cl-max", cl_max, "V");
  scan->add_option("--n-points", n_points);

  app.add_subcommand("genfield", "generate porosity and conductivity fields");

  auto* sweep = app.add_subcommand("sweep", "potentiostatic polarization sweep");
  std::string sweep_mode;
  std::vector<double> sweep_values;
  bool empty_sweep = false;
  sweep->add_option("--mode", sweep_mode, "dirichlet (V) or neumann (A)");
  sweep->add_option("--values", sweep_values, "sweep values")->delimiter(',');
  sweep->add_flag("--empty", empty_sweep, "sweep no values (header-only output)");

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << porelec::RunConfig::documented_defaults();
    return porelec::kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return porelec::kExitConfig;
  }

  porelec::RunConfig config;
  try {
    if (!config_path.empty()) config = porelec::RunConfig::from_file(config_path);
    for (const std::string& o : overrides) config.apply_override(o);
    if (!out_dir.empty()) config.set("out_dir", out_dir);
    if (seed) config.set("seed", std::to_string(*seed));
    if (!nx_list.empty()) config.set("nx_list", join(nx_list));
    if (cl_min) config.set("cl_min", join({*cl_min}));
    if (cl_max) config.set("cl_max", join({*cl_max}));
    if (n_points) config.set("n_points", std::to_string(*n_points));
    if (!sweep_mode.empty()) config.set("sweep_mode", sweep_mode);
    if (!sweep_values.empty()) config.set("sweep_values", join(sweep_values));
    if (empty_sweep) config.set("sweep_values", "");
  } catch (const porelec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return porelec::kExitConfig;
  } catch (const porelec::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return porelec::kExitIo;
  }

  return porelec::run_command(app.get_subcommands().front()->get_name(), config, std::cout,
                              std::cerr);
}
