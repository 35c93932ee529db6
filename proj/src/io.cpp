#include "porelec/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "porelec/errors.hpp"

namespace porelec {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::vector<double> split_numbers(const std::string& line, const std::string& path,
                                  std::size_t line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

FieldTable field_table(const StructuredGrid& grid, const SolutionState& state) {
  FieldTable t;
  const std::size_t n = grid.size();
  if (state.phi_e.size() != n || state.eta.size() != n || state.j.size() != n) {
    throw ParameterError("state does not match the grid");
  }
  for (std::size_t c = 0; c < n; ++c) {
    t.x.push_back(grid.x_center(grid.column(c)));
    t.y.push_back(grid.y_center(grid.row(c)));
  }
  t.phi_e = state.phi_e;
  t.phi_l = state.phi_l;
  t.eta = state.eta;
  t.j = state.j;
  return t;
}

void write_field_csv(const std::string& path, const FieldTable& t) {
  std::ofstream out = open_out(path);
  out << "x,y,phi_e,phi_l,eta,j\n";
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    out << format_number(t.x[i]) << ',' << format_number(t.y[i]) << ','
        << format_number(t.phi_e[i]) << ',' << format_number(t.phi_l[i]) << ','
        << format_number(t.eta[i]) << ',' << format_number(t.j[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

FieldTable read_field_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,phi_e,phi_l,eta,j") {
    throw IoError(path + ": missing field CSV header");
  }
  FieldTable t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<double> v = split_numbers(line, path, line_no);
    if (v.size() != 6) throw IoError(path + ":" + std::to_string(line_no) + ": expected 6 columns");
    t.x.push_back(v[0]);
    t.y.push_back(v[1]);
    t.phi_e.push_back(v[2]);
    t.phi_l.push_back(v[3]);
    t.eta.push_back(v[4]);
    t.j.push_back(v[5]);
  }
  return t;
}

void write_matrix_csv(const std::string& path, const StructuredGrid& grid,
                      const std::vector<double>& values, const std::string& comment) {
  if (values.size() != grid.size()) throw ParameterError("values do not match the grid");
  std::ofstream out = open_out(path);
  if (!comment.empty()) out << "# " << comment << '\n';
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      if (i) out << ',';
      out << format_number(values[grid.index(i, j)]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<double> read_matrix_csv(const std::string& path, std::size_t& nx, std::size_t& ny) {
  std::ifstream in = open_in(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  nx = 0;
  ny = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<double> row = split_numbers(line, path, line_no);
    if (nx == 0) nx = row.size();
    if (row.size() != nx) throw IoError(path + ":" + std::to_string(line_no) + ": ragged row");
    values.insert(values.end(), row.begin(), row.end());
    ++ny;
  }
  if (nx == 0) throw IoError(path + ": no data rows");
  return values;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace porelec
