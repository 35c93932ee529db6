#include "porelec/fields.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <string>

#include "porelec/errors.hpp"

namespace porelec {

namespace {

// Portable draws on top of mt19937_64 (std distributions differ across libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  long integer(long lo, long hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long>(gen_() % span);
  }

 private:
  std::mt19937_64 gen_;
};

struct Canvas {
  const StructuredGrid& grid;
  std::vector<double>& eps;
  double high;

  void set(long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(grid.nx()) || j >= static_cast<long>(grid.ny())) {
      return;
    }
    eps[grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = high;
  }
  // 4-connected staircase from (i0, j0) to (i1, j1).
  void line(long i0, long j0, long i1, long j1) {
    const long steps = std::abs(i1 - i0) + std::abs(j1 - j0);
    long i = i0, j = j0;
    set(i, j);
    for (long s = 0; s < steps; ++s) {
      // Step along the axis that lags the straight line the most.
      const double t = static_cast<double>(s + 1) / static_cast<double>(steps);
      const double ti = i0 + t * static_cast<double>(i1 - i0);
      const double tj = j0 + t * static_cast<double>(j1 - j0);
      if (i != i1 && (j == j1 || std::abs(ti - i) >= std::abs(tj - j))) {
        i += i1 > i ? 1 : -1;
      } else {
        j += j1 > j ? 1 : -1;
      }
      set(i, j);
    }
  }
};

void check_grid(const StructuredGrid& grid) {
  if (grid.nx() < 2 || grid.ny() < 1) throw ParameterError("degenerate grid for field generation");
}

double high_fraction(const std::vector<double>& eps, double high) {
  return static_cast<double>(std::count(eps.begin(), eps.end(), high)) /
         static_cast<double>(eps.size());
}

std::vector<char> reached_from_right(const PorosityField& f, const StructuredGrid& grid,
                                     double threshold) {
  const std::size_t nx = grid.nx(), ny = grid.ny();
  std::vector<char> seen(grid.size(), 0);
  std::queue<std::size_t> q;
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t c = grid.index(nx - 1, j);
    if (f.eps[c] >= threshold) {
      seen[c] = 1;
      q.push(c);
    }
  }
  while (!q.empty()) {
    const std::size_t c = q.front();
    q.pop();
    const std::size_t i = grid.column(c), j = grid.row(c);
    auto visit = [&](std::size_t n) {
      if (!seen[n] && f.eps[n] >= threshold) {
        seen[n] = 1;
        q.push(n);
      }
    };
    if (i > 0) visit(c - 1);
    if (i + 1 < nx) visit(c + 1);
    if (j > 0) visit(c - nx);
    if (j + 1 < ny) visit(c + nx);
  }
  return seen;
}

}  // namespace

void FieldGenConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low < eps_high && eps_high < 1.0)) {
    throw ParameterError("porosities must satisfy 0 < eps_low < eps_high < 1");
  }
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
  };
  prob(link_probability, "link_probability");
  prob(p_branch, "p_branch");
  prob(patch_fraction, "patch_fraction");
  prob(n_channels_fraction, "n_channels_fraction");
  if (!(tile_target_size >= 1.0)) throw ParameterError("tile_target_size must be >= 1 cell");
  if (forward_step < 1) throw ParameterError("forward_step must be >= 1");
  if (perturbation_limit < 0) throw ParameterError("perturbation_limit must be >= 0");
  if (!(sigma_solid > 0.0) || !(kappa_bulk > 0.0)) {
    throw ParameterError("sigma_solid and kappa_bulk must be positive");
  }
}

PorosityField generate_bimodal(const StructuredGrid& grid, const FieldGenConfig& config) {
  config.validate();
  check_grid(grid);
  PorosityField field{std::vector<double>(grid.size(), config.eps_low)};
  if (config.patch_fraction == 0.0) return field;

  Rng rng(config.seed);
  Canvas canvas{grid, field.eps, config.eps_high};
  const long nx = static_cast<long>(grid.nx()), ny = static_cast<long>(grid.ny());
  struct Patch {
    long ci, cj;
  };
  std::vector<Patch> patches;
  const double tile = config.tile_target_size;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    if (high_fraction(field.eps, config.eps_high) >= config.patch_fraction) break;
    const long w = std::max(1L, std::lround(tile * (0.5 + rng.uniform())));
    const long h = std::max(1L, std::lround(tile * (0.5 + rng.uniform())));
    const long i0 = rng.integer(0, nx - 1) - w / 2;
    const long j0 = rng.integer(0, ny - 1) - h / 2;
    // Rectangle with its corners cut off by triangles of random size.
    const long cut = static_cast<long>(std::floor(rng.uniform() * static_cast<double>(std::min(w, h)) / 2.0));
    for (long dj = 0; dj < h; ++dj) {
      for (long di = 0; di < w; ++di) {
        const long ei = std::min(di, w - 1 - di);
        const long ej = std::min(dj, h - 1 - dj);
        if (ei + ej < cut) continue;
        canvas.set(i0 + di, j0 + dj);
      }
    }
    patches.push_back({i0 + w / 2, j0 + h / 2});
  }

  // Link neighbouring patches (centres within two tile sizes).
  const double reach = 2.0 * tile;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (std::size_t q = p + 1; q < patches.size(); ++q) {
      const double d = std::hypot(static_cast<double>(patches[p].ci - patches[q].ci),
                                  static_cast<double>(patches[p].cj - patches[q].cj));
      if (d <= reach && rng.bernoulli(config.link_probability)) {
        canvas.line(patches[p].ci, patches[p].cj, patches[q].ci, patches[q].cj);
      }
    }
  }
  return field;
}

PorosityField generate_channelized(const StructuredGrid& grid, const FieldGenConfig& config) {
  config.validate();
  check_grid(grid);
  PorosityField field{std::vector<double>(grid.size(), config.eps_low)};
  Rng rng(config.seed);
  Canvas canvas{grid, field.eps, config.eps_high};
  const long nx = static_cast<long>(grid.nx()), ny = static_cast<long>(grid.ny());

  const auto n_channels = static_cast<long>(
      std::ceil(config.n_channels_fraction * static_cast<double>(ny) - 1e-12));
  struct Walker {
    long i, j;
  };
  std::vector<Walker> walkers;
  for (long c = 0; c < n_channels; ++c) walkers.push_back({nx - 1, rng.integer(0, ny - 1)});
  const std::size_t max_walkers = static_cast<std::size_t>(4 * n_channels + ny);

  for (std::size_t w = 0; w < walkers.size(); ++w) {
    long i = walkers[w].i, j = walkers[w].j;
    canvas.set(i, j);
    while (i > 0) {
      for (int s = 0; s < config.forward_step && i > 0; ++s) canvas.set(--i, j);
      if (i == 0) break;
      const long jitter = config.perturbation_limit > 0
                              ? rng.integer(-config.perturbation_limit, config.perturbation_limit)
                              : 0;
      const long target = std::clamp(j + jitter, 0L, ny - 1);
      canvas.line(i, j, i, target);
      j = target;
      if (config.p_branch > 0.0 && walkers.size() < max_walkers && rng.bernoulli(config.p_branch)) {
        walkers.push_back({i, j});
      }
    }
  }

  // Link any high-porosity component that the right boundary cannot reach.
  if (n_channels > 0) {
    std::vector<char> seen = reached_from_right(field, grid, config.eps_high);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (field.eps[c] == config.eps_high && !seen[c]) {
        const long ci = static_cast<long>(grid.column(c)), cj = static_cast<long>(grid.row(c));
        long stop = ci;
        while (stop + 1 < nx && !seen[grid.index(static_cast<std::size_t>(stop + 1), static_cast<std::size_t>(cj))]) ++stop;
        canvas.line(ci, cj, std::min(stop + 1, nx - 1), cj);
        seen = reached_from_right(field, grid, config.eps_high);
      }
    }
  }
  return field;
}

PorosityField generate_field(const StructuredGrid& grid, const FieldGenConfig& config) {
  return config.kind == FieldKind::Bimodal ? generate_bimodal(grid, config)
                                           : generate_channelized(grid, config);
}

std::pair<double, double> bruggeman(double eps, double sigma_solid, double kappa_bulk) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("porosity must lie in (0, 1)");
  return {sigma_solid * std::pow(1.0 - eps, 1.5), kappa_bulk * std::pow(eps, 1.5)};
}

ConductivityField conductivity_from_porosity(const PorosityField& field, double sigma_solid,
                                             double kappa_bulk) {
  ConductivityField out;
  out.sigma.reserve(field.eps.size());
  out.kappa.reserve(field.eps.size());
  for (double e : field.eps) {
    const auto [s, k] = bruggeman(e, sigma_solid, kappa_bulk);
    out.sigma.push_back(s);
    out.kappa.push_back(k);
  }
  return out;
}

bool spans_x(const PorosityField& field, const StructuredGrid& grid, double threshold) {
  if (field.eps.size() != grid.size()) throw ParameterError("field does not match the grid");
  const std::vector<char> seen = reached_from_right(field, grid, threshold);
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    if (seen[grid.index(0, j)]) return true;
  }
  return false;
}

}  // namespace porelec
