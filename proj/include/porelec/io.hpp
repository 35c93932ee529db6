#pragma once

#include <string>
#include <vector>

#include "porelec/grid.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

/// Columns of the per-cell field CSV (`x,y,phi_e,phi_l,eta,j`), y-major.
struct FieldTable {
  std::vector<double> x, y, phi_e, phi_l, eta, j;
};

FieldTable field_table(const StructuredGrid& grid, const SolutionState& state);
void write_field_csv(const std::string& path, const FieldTable& table);
FieldTable read_field_csv(const std::string& path);

/// ny rows of nx values; row j holds cells (0..nx-1, j). Comment lines start with '#'.
void write_matrix_csv(const std::string& path, const StructuredGrid& grid,
                      const std::vector<double>& values, const std::string& comment = {});
/// Returns the values y-major and sets nx, ny.
std::vector<double> read_matrix_csv(const std::string& path, std::size_t& nx, std::size_t& ny);

/// Generic numeric table with a header row. NaN is written as `nan`.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// %.16e formatting.
std::string format_number(double v);

}  // namespace porelec
