#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "porelec/grid.hpp"

namespace porelec {

enum class FieldKind { Bimodal, Channelized };

struct FieldGenConfig {
  FieldKind kind = FieldKind::Bimodal;
  double eps_low = 0.2;
  double eps_high = 0.8;
  // Bimodal.
  double tile_target_size = 8.0;  // patch edge, cells
  double patch_fraction = 0.3;    // target area share of patches; 0 places none
  double link_probability = 0.5;
  // Channelized.
  double n_channels_fraction = 0.1;
  int forward_step = 1;        // cells per advance toward x = 0
  int perturbation_limit = 2;  // max vertical jitter per advance, cells
  double p_branch = 0.05;
  // Conductivity conversion.
  double sigma_solid = 1000.0;           // S/m
  double kappa_bulk = 8.639273770523266; // S/m, gives 5.9514 at eps = 0.78
  std::uint64_t seed = 12345;

  void validate() const;
};

struct PorosityField {
  std::vector<double> eps;
};

PorosityField generate_bimodal(const StructuredGrid& grid, const FieldGenConfig& config);
PorosityField generate_channelized(const StructuredGrid& grid, const FieldGenConfig& config);
PorosityField generate_field(const StructuredGrid& grid, const FieldGenConfig& config);

/// sigma_solid (1 - eps)^1.5 and kappa_bulk eps^1.5.
std::pair<double, double> bruggeman(double eps, double sigma_solid, double kappa_bulk);

ConductivityField conductivity_from_porosity(const PorosityField& field, double sigma_solid,
                                             double kappa_bulk);

/// True when cells with eps >= threshold connect x = W to x = 0 (4-connectivity).
bool spans_x(const PorosityField& field, const StructuredGrid& grid, double threshold);

}  // namespace porelec
