#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "porelec/sparse.hpp"

namespace porelec {

enum class Side { XMin = 0, XMax = 1, YMin = 2, YMax = 3 };

inline constexpr std::array<Side, 4> kAllSides{Side::XMin, Side::XMax, Side::YMin, Side::YMax};

/// Cell-centred structured mesh on [0, W] x [0, H]. The out-of-plane length L
/// only converts applied currents (A) to current densities (A/m^2); all fluxes
/// and integrals are per unit out-of-plane length.
///
/// Cells are numbered y-major: index = j * nx + i.
class StructuredGrid {
 public:
  StructuredGrid(std::size_t nx, std::size_t ny, double width, double height, double length);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return width_ / static_cast<double>(nx_); }
  double dy() const noexcept { return height_ / static_cast<double>(ny_); }
  double cell_volume() const noexcept { return dx() * dy(); }

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
  std::size_t column(std::size_t cell) const noexcept { return cell % nx_; }
  std::size_t row(std::size_t cell) const noexcept { return cell / nx_; }
  double x_center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx(); }
  double y_center(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dy(); }

  /// Length of a domain side (per unit out-of-plane length this is its area).
  double side_length(Side side) const noexcept;
  /// Area of one boundary face on the given side.
  double face_area(Side side) const noexcept;
  /// Cell indices adjacent to a side, in increasing order.
  std::vector<std::size_t> boundary_cells(Side side) const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double width_;
  double height_;
  double length_;
};

/// Per-cell conductivities of both continua, S/m.
struct ConductivityField {
  std::vector<double> sigma;
  std::vector<double> kappa;

  static ConductivityField homogeneous(const StructuredGrid& grid, double sigma, double kappa);
  /// Throws AssemblyError unless both arrays have grid.size() positive finite entries.
  void validate(const StructuredGrid& grid) const;
};

struct BoundaryCondition {
  enum class Kind { Neumann, Dirichlet };
  Kind kind = Kind::Neumann;
  /// Neumann: prescribed outward-normal flux conductivity * d(phi)/dn (A/m^2).
  /// Dirichlet: prescribed potential (V).
  double value = 0.0;

  static BoundaryCondition neumann(double flux) { return {Kind::Neumann, flux}; }
  static BoundaryCondition dirichlet(double potential) { return {Kind::Dirichlet, potential}; }
  bool is_dirichlet() const noexcept { return kind == Kind::Dirichlet; }
};

/// One condition per side, indexed by Side.
struct DomainBoundary {
  std::array<BoundaryCondition, 4> sides{};

  BoundaryCondition& operator[](Side s) { return sides[static_cast<std::size_t>(s)]; }
  const BoundaryCondition& operator[](Side s) const { return sides[static_cast<std::size_t>(s)]; }
  bool all_neumann() const noexcept;
};

struct BoundarySpec {
  DomainBoundary electrode;
  DomainBoundary electrolyte;

  /// Electrode: -j at x = 0; electrolyte: +j at x = W; zero flux elsewhere.
  static BoundarySpec galvanostatic(double j_applied);
};

/// A * phi = b_bc + (cell sources) * cell_volumes
struct DiscreteOperator {
  CsrMatrix A;
  std::vector<double> b_bc;
  std::vector<double> cell_volumes;
};

/// Two-point flux finite-volume diffusion operator with harmonic-mean face
/// transmissibilities. Dirichlet sides use a half-cell transmissibility folded
/// into the diagonal, so A stays symmetric.
DiscreteOperator assemble_diffusion(const StructuredGrid& grid,
                                    std::span<const double> conductivity,
                                    const DomainBoundary& boundary);

/// Transmissibility of the face shared by two cells of widths d1, d2 with
/// conductivities c1, c2 and face area `area`.
double face_transmissibility(double c1, double c2, double d1, double d2, double area) noexcept;

/// Sum of field * dx * dy over cells.
double integrate_cells(std::span<const double> field, const StructuredGrid& grid);

/// g * side_length for a Neumann side; std::nullopt for a Dirichlet side.
std::optional<double> boundary_flux_total(const DomainBoundary& boundary, Side side,
                                          const StructuredGrid& grid);

/// Discrete conductivity * d(phi)/dn integrated over a side, using the
/// half-cell transmissibility against `boundary_value`.
double reconstruct_boundary_flux(std::span<const double> field,
                                 std::span<const double> conductivity,
                                 const StructuredGrid& grid, Side side, double boundary_value);

}  // namespace porelec
