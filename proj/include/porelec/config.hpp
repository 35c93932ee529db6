#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "porelec/convergence.hpp"
#include "porelec/fields.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

/// Flat `key = value` run configuration. Lines starting with '#' and trailing
/// `# ...` are comments. Every key has a default; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text, const std::string& origin = "<string>");

  /// `key=value` override. Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& assignment);

  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Lower-cased value checked against `allowed`.
  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const;

  PhysicalParams physical_params() const;
  StructuredGrid grid() const;
  OperatingMode mode() const;
  ReferenceSpec reference() const;
  SolverConfig solver() const;
  FieldGenConfig field_config() const;
  ConvergenceSetup convergence_setup() const;
  /// Grid, conductivities (homogeneous, generated or read from `porosity_file`),
  /// parameters and mode.
  Problem problem() const;

  std::string output_path(const std::string& suffix) const;

  /// Annotated listing of every key with its default.
  static std::string documented_defaults();

 private:
  struct Entry {
    std::string value;
    std::string origin;  // "path:line", "--set" or "default"
    int line = 0;
  };
  std::map<std::string, Entry> entries_;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

}  // namespace porelec
