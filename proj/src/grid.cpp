#include "porelec/grid.hpp"

#include <cmath>
#include <string>

#include "porelec/errors.hpp"

namespace porelec {

StructuredGrid::StructuredGrid(std::size_t nx, std::size_t ny, double width, double height,
                               double length)
    : nx_(nx), ny_(ny), width_(width), height_(height), length_(length) {
  if (nx < 2 || ny < 1) throw ParameterError("grid needs nx >= 2 and ny >= 1");
  if (!(width > 0.0) || !(height > 0.0) || !(length > 0.0)) {
    throw ParameterError("grid extents W, H, L must be positive");
  }
}

double StructuredGrid::side_length(Side side) const noexcept {
  return (side == Side::XMin || side == Side::XMax) ? height_ : width_;
}

double StructuredGrid::face_area(Side side) const noexcept {
  return (side == Side::XMin || side == Side::XMax) ? dy() : dx();
}

std::vector<std::size_t> StructuredGrid::boundary_cells(Side side) const {
  std::vector<std::size_t> cells;
  switch (side) {
    case Side::XMin:
    case Side::XMax: {
      const std::size_t i = side == Side::XMin ? 0 : nx_ - 1;
      for (std::size_t j = 0; j < ny_; ++j) cells.push_back(index(i, j));
      break;
    }
    case Side::YMin:
    case Side::YMax: {
      const std::size_t j = side == Side::YMin ? 0 : ny_ - 1;
      for (std::size_t i = 0; i < nx_; ++i) cells.push_back(index(i, j));
      break;
    }
  }
  return cells;
}

ConductivityField ConductivityField::homogeneous(const StructuredGrid& grid, double sigma,
                                                 double kappa) {
  return {std::vector<double>(grid.size(), sigma), std::vector<double>(grid.size(), kappa)};
}

void ConductivityField::validate(const StructuredGrid& grid) const {
  auto check = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != grid.size()) {
      throw AssemblyError(std::string(name) + " field has " + std::to_string(v.size()) +
                          " entries, grid has " + std::to_string(grid.size()));
    }
    for (double c : v) {
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw AssemblyError(std::string(name) + " field must be positive and finite");
      }
    }
  };
  check(sigma, "sigma");
  check(kappa, "kappa");
}

bool DomainBoundary::all_neumann() const noexcept {
  for (const auto& bc : sides) {
    if (bc.is_dirichlet()) return false;
  }
  return true;
}

BoundarySpec BoundarySpec::galvanostatic(double j_applied) {
  BoundarySpec spec;
  spec.electrode[Side::XMin] = BoundaryCondition::neumann(-j_applied);
  spec.electrolyte[Side::XMax] = BoundaryCondition::neumann(j_applied);
  return spec;
}

double face_transmissibility(double c1, double c2, double d1, double d2, double area) noexcept {
  // Series resistance of the two half cells.
  return area / (0.5 * d1 / c1 + 0.5 * d2 / c2);
}

DiscreteOperator assemble_diffusion(const StructuredGrid& grid,
                                    std::span<const double> conductivity,
                                    const DomainBoundary& boundary) {
  const std::size_t n = grid.size();
  if (conductivity.size() != n) {
    throw AssemblyError("conductivity length does not match the grid");
  }
  for (double c : conductivity) {
    if (!(c > 0.0) || !std::isfinite(c)) throw AssemblyError("conductivity must be positive");
  }

  const double dx = grid.dx();
  const double dy = grid.dy();
  std::vector<Triplet> t;
  t.reserve(5 * n);
  std::vector<double> diag(n, 0.0);
  std::vector<double> rhs(n, 0.0);

  auto couple = [&](std::size_t p, std::size_t q, double trans) {
    diag[p] += trans;
    diag[q] += trans;
    t.push_back({p, q, -trans});
    t.push_back({q, p, -trans});
  };

  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
      const std::size_t p = grid.index(i, j);
      const std::size_t q = grid.index(i + 1, j);
      couple(p, q, face_transmissibility(conductivity[p], conductivity[q], dx, dx, dy));
    }
  }
  for (std::size_t j = 0; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t p = grid.index(i, j);
      const std::size_t q = grid.index(i, j + 1);
      couple(p, q, face_transmissibility(conductivity[p], conductivity[q], dy, dy, dx));
    }
  }

  for (Side side : kAllSides) {
    const BoundaryCondition& bc = boundary[side];
    const double area = grid.face_area(side);
    const double width = (side == Side::XMin || side == Side::XMax) ? dx : dy;
    for (std::size_t cell : grid.boundary_cells(side)) {
      if (bc.is_dirichlet()) {
        const double trans = 2.0 * conductivity[cell] * area / width;
        diag[cell] += trans;
        rhs[cell] += trans * bc.value;
      } else {
        rhs[cell] += bc.value * area;
      }
    }
  }

  for (std::size_t p = 0; p < n; ++p) t.push_back({p, p, diag[p]});
  return {CsrMatrix(n, n, std::move(t)), std::move(rhs),
          std::vector<double>(n, grid.cell_volume())};
}

double integrate_cells(std::span<const double> field, const StructuredGrid& grid) {
  if (field.size() != grid.size()) {
    throw ParameterError("field length does not match the grid");
  }
  double sum = 0.0;
  for (double v : field) sum += v;
  return sum * grid.cell_volume();
}

std::optional<double> boundary_flux_total(const DomainBoundary& boundary, Side side,
                                          const StructuredGrid& grid) {
  const BoundaryCondition& bc = boundary[side];
  if (bc.is_dirichlet()) return std::nullopt;
  return bc.value * grid.side_length(side);
}

double reconstruct_boundary_flux(std::span<const double> field,
                                 std::span<const double> conductivity,
                                 const StructuredGrid& grid, Side side, double boundary_value) {
  const double area = grid.face_area(side);
  const double width = (side == Side::XMin || side == Side::XMax) ? grid.dx() : grid.dy();
  double total = 0.0;
  for (std::size_t cell : grid.boundary_cells(side)) {
    total += 2.0 * conductivity[cell] * area / width * (boundary_value - field[cell]);
  }
  return total;
}

}  // namespace porelec
