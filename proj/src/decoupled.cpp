#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "porelec/errors.hpp"
#include "porelec/nonlinear.hpp"

namespace porelec {

namespace {

// One continuum of the staggered scheme, solved in its own potential with the
// other potential frozen. sign = +1 for the electrode (eta = x - y - E_eq,
// residual A x - b + f V), -1 for the electrolyte (eta = y - x - E_eq,
// residual A x - b - f V). Both Jacobians are A + a b cosh(b eta) V.
struct Continuum {
  DiscreteOperator op;
  std::vector<std::size_t> cells;
  std::vector<double> values;
  double sign = 1.0;
};

struct Staggered {
  const Problem* problem = nullptr;
  Continuum electrode;
  Continuum electrolyte;
  BoundarySpec boundary;  // boundary used for the final conservation report
  double a = 0.0;
  double b = 0.0;
  double e_eq = 0.0;

  double eta(const Continuum& c, double x, double y) const {
    return c.sign > 0.0 ? x - y - e_eq : y - x - e_eq;
  }
};

struct PicardState {
  std::vector<double> phi_e;
  std::vector<double> phi_l;
  std::vector<double> lambda_e;
  std::vector<double> lambda_l;
  std::vector<double> f;
  bool fresh = true;
  std::vector<double> changes;
  int iterations = 0;
  long linear_iterations = 0;
  bool linear_failure = false;
};

std::size_t mid_cell(const StructuredGrid& grid, std::size_t i) {
  return grid.index(i, grid.ny() / 2);
}

Staggered build_staggered(const Problem& problem, const ReferenceSpec& reference, double c_l) {
  if (!std::holds_alternative<Galvanostatic>(problem.mode)) {
    throw ParameterError("the decoupled scheme solves galvanostatic problems only");
  }
  problem.validate();
  const StructuredGrid& grid = problem.grid;
  Staggered s;
  s.problem = &problem;
  s.a = problem.params.a();
  s.b = problem.params.b();
  s.e_eq = problem.params.E_eq();
  s.boundary = problem.boundary();
  BoundarySpec bc = s.boundary;
  switch (reference.strategy) {
    case Strategy::Lcm: {
      s.electrode.cells = reference.constraint_cells;
      if (s.electrode.cells.empty()) s.electrode.cells.push_back(mid_cell(grid, 0));
      s.electrode.values = reference.constraint_values;
      if (s.electrode.values.empty()) s.electrode.values.assign(s.electrode.cells.size(), 0.0);
      if (s.electrode.values.size() == 1 && s.electrode.cells.size() > 1) {
        s.electrode.values.assign(s.electrode.cells.size(), s.electrode.values.front());
      }
      if (s.electrode.values.size() != s.electrode.cells.size()) {
        throw ParameterError("constraint cells and values differ in length");
      }
      for (std::size_t c : s.electrode.cells) {
        if (c >= grid.size()) throw ParameterError("constraint cell outside the grid");
      }
      s.electrolyte.cells = {mid_cell(grid, grid.nx() - 1)};
      s.electrolyte.values = {c_l};
      break;
    }
    case Strategy::Dsm:
      bc.electrode[reference.dsm_side] = BoundaryCondition::dirichlet(reference.phi_ref);
      bc.electrolyte[Side::XMax] = BoundaryCondition::dirichlet(c_l);
      break;
    case Strategy::Gcm:
      throw ParameterError("GCM is available with the coupled scheme only");
  }
  s.electrode.op = assemble_diffusion(grid, problem.conductivity.sigma, bc.electrode);
  s.electrolyte.op = assemble_diffusion(grid, problem.conductivity.kappa, bc.electrolyte);
  s.electrode.sign = 1.0;
  s.electrolyte.sign = -1.0;
  return s;
}

double reference_value(const ReferenceSpec& reference) {
  if (reference.strategy == Strategy::Dsm) return reference.phi_ref;
  return reference.constraint_values.empty() ? 0.0 : reference.constraint_values.front();
}

// Solves one continuum. With `explicit_f` the source is the given vector and
// the problem is linear; otherwise Newton in x with y frozen.
void solve_continuum(const Staggered& s, const Continuum& c, std::span<const double> other,
                     const std::vector<double>* explicit_f, std::vector<double>& x,
                     std::vector<double>& lambda, const SolverConfig& config, PicardState& ps) {
  const std::size_t n = x.size();
  const std::size_t m = c.cells.size();
  const auto& vol = c.op.cell_volumes;
  lambda.resize(m, 0.0);
  const int max_newton = explicit_f ? 1 : 50;
  for (int it = 0; it < max_newton; ++it) {
    std::vector<double> r(n + m);
    c.op.A.multiply(x, std::span<double>(r.data(), n));
    std::vector<Triplet> t;
    t.reserve(c.op.A.nonzeros() + n + 2 * m);
    const auto rp = c.op.A.row_offsets();
    const auto ci = c.op.A.col_indices();
    const auto va = c.op.A.values();
    for (std::size_t row = 0; row < n; ++row) {
      for (std::size_t k = rp[row]; k < rp[row + 1]; ++k) t.push_back({row, ci[k], va[k]});
    }
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      if (explicit_f) {
        f = (*explicit_f)[i];
      } else {
        const SourceEval e = evaluate_source(s.eta(c, x[i], other[i]), s.a, s.b);
        f = e.value;
        t.push_back({i, i, e.derivative * vol[i]});
      }
      r[i] += c.sign * f * vol[i] - c.op.b_bc[i];
    }
    for (std::size_t k = 0; k < m; ++k) {
      r[c.cells[k]] += lambda[k];
      r[n + k] = x[c.cells[k]] - c.values[k];
      t.push_back({c.cells[k], n + k, 1.0});
      t.push_back({n + k, c.cells[k], 1.0});
    }
    double rnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) rnorm = std::max(rnorm, std::abs(r[i]) / (vol[i] * s.a));
    for (std::size_t k = 0; k < m; ++k) rnorm = std::max(rnorm, std::abs(r[n + k]));
    if (!std::isfinite(rnorm)) throw ConvergenceError("decoupled sub-solve became non-finite");
    if (!explicit_f && rnorm <= 1e-13) break;

    for (double& v : r) v = -v;
    const CsrMatrix jac(n + m, n + m, std::move(t));
    SolveReport rep;
    std::vector<double> step;
    if (m > 0) {
      const ScaledSaddle scaled = rescale_saddle(jac, n);
      rep = solve_linear(scaled.matrix, scaled.scale_rhs(r), config.linear);
      step = scaled.unscale_solution(rep.x);
    } else {
      rep = solve_linear(jac, r, config.linear);
      step = std::move(rep.x);
    }
    ps.linear_iterations += rep.iterations;
    if (!rep.converged) ps.linear_failure = true;
    for (std::size_t i = 0; i < n; ++i) x[i] += step[i];
    for (std::size_t k = 0; k < m; ++k) lambda[k] += step[n + k];
    if (!explicit_f && norm_inf(std::span<const double>(step.data(), n)) <= 1e-14) break;
  }
}

std::vector<double> source_field(const Staggered& s, std::span<const double> phi_e,
                                 std::span<const double> phi_l) {
  std::vector<double> f(phi_e.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = bv_source(overpotential(phi_e[i], phi_l[i], s.e_eq), s.a, s.b);
  }
  return f;
}

double relative_change(std::span<const double> next, std::span<const double> prev) {
  double num = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) num += (next[i] - prev[i]) * (next[i] - prev[i]);
  const double den = norm2(next);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

// Runs up to `max_iters` staggered sweeps (Gauss-Seidel: the electrolyte
// solve sees the freshly updated phi_e). Returns true when the f-change
// dropped below tol.
bool run_picard(const Staggered& s, PicardState& ps, int max_iters, const SolverConfig& config) {
  const Problem& problem = *s.problem;
  const std::size_t n = problem.grid.size();
  for (int k = 0; k < max_iters; ++k) {
    if (ps.fresh) {
      // First sweep: explicit with the average source that balances the applied current.
      const std::vector<double> f0(n, -problem.applied_current_density() / problem.grid.width());
      ps.phi_e.assign(n, 0.0);
      ps.phi_l.assign(n, 0.0);
      solve_continuum(s, s.electrode, ps.phi_l, &f0, ps.phi_e, ps.lambda_e, config, ps);
      solve_continuum(s, s.electrolyte, ps.phi_e, &f0, ps.phi_l, ps.lambda_l, config, ps);
      ps.f = source_field(s, ps.phi_e, ps.phi_l);
      ps.changes.push_back(relative_change(ps.f, f0));
      ps.fresh = false;
    } else {
      std::vector<double> next_e = ps.phi_e;
      std::vector<double> next_l = ps.phi_l;
      solve_continuum(s, s.electrode, ps.phi_l, nullptr, next_e, ps.lambda_e, config, ps);
      solve_continuum(s, s.electrolyte, next_e, nullptr, next_l, ps.lambda_l, config, ps);
      ps.phi_e = std::move(next_e);
      ps.phi_l = std::move(next_l);
      std::vector<double> f = source_field(s, ps.phi_e, ps.phi_l);
      ps.changes.push_back(relative_change(f, ps.f));
      ps.f = std::move(f);
    }
    ++ps.iterations;
    if (ps.changes.back() <= config.picard_tol) return true;
  }
  return false;
}

double objective_of(const Staggered& s, const PicardState& ps) {
  const double r = integrate_cells(ps.f, s.problem->grid) + s.problem->applied_current();
  return r * r;
}

double absolute_outer_tol(const Problem& problem, const LineSearchConfig& ls) {
  const double current = problem.applied_current();
  return std::max(ls.outer_tol * current * current, 1e-300);
}

}  // namespace

SearchResult reference_search(const std::function<double(double)>& objective, double c0,
                              double tolerance, const LineSearchConfig& config,
                              const std::function<void(double)>& accept,
                              bool refresh_current) {
  config.validate();
  SearchResult res;
  auto eval = [&](double c) {
    ++res.evaluations;
    const double v = objective(c);
    if (!std::isfinite(v)) throw ConvergenceError("objective is not finite", res.trace);
    return v;
  };
  res.c = c0;
  res.objective = eval(c0);
  if (accept) accept(c0);
  res.trace.push_back(res.objective);

  const double h = config.delta_fd;
  for (;;) {
    if (refresh_current && res.iterations > 0) {
      res.objective = eval(res.c);
      if (accept) accept(res.c);
    }
    if (res.objective <= tolerance) break;
    if (res.iterations >= config.outer_max_iter) {
      throw ConvergenceError("reference search hit its iteration cap", res.trace);
    }
    const double grad = config.fd_mode == FdMode::Central
                            ? (eval(res.c + h) - eval(res.c - h)) / (2.0 * h)
                            : (eval(res.c + h) - res.objective) / h;
    if (grad == 0.0 || !std::isfinite(grad)) {
      throw ConvergenceError("reference search stagnated: zero gradient", res.trace);
    }
    const double g2 = grad * grad;
    const double beta_initial = config.beta0 > 0.0 ? config.beta0 : 2.0 * res.objective / g2;
    double beta = beta_initial;
    for (;;) {
      const double trial = res.c - beta * grad;
      const double value = eval(trial);
      if (value <= res.objective - config.c_armijo * beta * g2) {
        res.c = trial;
        res.objective = value;
        break;
      }
      beta *= config.rho;
      if (beta < 1e-12 * beta_initial) {
        throw ConvergenceError("reference search stagnated: step underflow", res.trace);
      }
    }
    if (accept) accept(res.c);
    ++res.iterations;
    res.trace.push_back(res.objective);
  }
  return res;
}

SolutionState picard_decoupled(const Problem& problem, const ReferenceSpec& reference,
                               const SolverConfig& config) {
  config.validate();
  if (reference.strategy == Strategy::Gcm) {
    throw ParameterError("GCM is available with the coupled scheme only");
  }
  const LineSearchConfig& ls = config.linesearch;
  const double tol = absolute_outer_tol(problem, ls);
  const int per_eval = ls.picard_iters_per_eval;

  PicardState base;
  PicardState last;
  double last_c = std::numeric_limits<double>::quiet_NaN();
  int picard_total = 0;
  long linear_total = 0;
  bool linear_failure = false;

  auto objective = [&](double c_l) {
    const Staggered s = build_staggered(problem, reference, c_l);
    PicardState ps = base;  // fresh until the first accepted point
    ps.changes.clear();
    ps.iterations = 0;
    ps.linear_iterations = 0;
    const bool done = run_picard(s, ps, per_eval > 0 ? per_eval : config.picard_max_iter, config);
    picard_total += ps.iterations;
    linear_total += ps.linear_iterations;
    linear_failure = linear_failure || ps.linear_failure;
    if (per_eval == 0 && !done) {
      throw ConvergenceError("Picard iteration did not converge at c_l = " + std::to_string(c_l),
                             ps.changes);
    }
    last = std::move(ps);
    last_c = c_l;
    return objective_of(s, last);
  };
  double accepted_c = reference_value(reference) - problem.params.E_eq();
  auto accept = [&](double c_l) {
    if (c_l == last_c) base = last;
    accepted_c = c_l;
  };

  double c = reference_value(reference) - problem.params.E_eq();
  SearchResult total;
  PicardState final_state;
  bool converged = false;
  for (int round = 0; round < 50 && !converged; ++round) {
    try {
      const SearchResult r = reference_search(objective, c, tol, ls, accept, per_eval > 0);
      total.iterations += r.iterations;
      total.evaluations += r.evaluations;
      total.trace.insert(total.trace.end(), r.trace.begin(), r.trace.end());
    } catch (const ConvergenceError& e) {
      // Partial sweeps leave the objective noisy near the optimum; a stall
      // there is resolved by finishing the inner iteration below.
      if (per_eval == 0) throw;
      total.trace.insert(total.trace.end(), e.history().begin(), e.history().end());
    }
    c = accepted_c;
    if (per_eval == 0) {
      final_state = base;
      converged = true;
      break;
    }
    // Finish the inner iteration at the located reference and re-check.
    const Staggered s = build_staggered(problem, reference, c);
    PicardState ps = base;
    ps.changes.clear();
    ps.iterations = 0;
    if (!run_picard(s, ps, config.picard_max_iter, config)) {
      throw ConvergenceError("Picard iteration did not converge at the located reference",
                             ps.changes);
    }
    picard_total += ps.iterations;
    base = ps;
    final_state = ps;
    converged = objective_of(s, ps) <= tol;
  }

  const Staggered s = build_staggered(problem, reference, c);
  SolutionState state;
  state.phi_e = final_state.phi_e;
  state.phi_l = final_state.phi_l;
  state.lambda = final_state.lambda_e;
  state.lambda.insert(state.lambda.end(), final_state.lambda_l.begin(), final_state.lambda_l.end());
  state.history = final_state.changes;
  state.iterations = total.iterations;
  state.search_iterations = total.iterations;
  state.picard_iterations = picard_total;
  state.linear_iterations = linear_total;
  state.linear_failure = linear_failure;
  state.objective_trace = total.trace;
  state.c_l = c;
  refresh_derived(state, problem, s.boundary);
  state.converged = converged && state.objective <= tol;
  state.message = state.converged ? "decoupled scheme converged" : "decoupled scheme stalled";
  return state;
}

double objective_cl(const Problem& problem, double c_l, const ReferenceSpec& reference,
                    const SolverConfig& config) {
  config.validate();
  const Staggered s = build_staggered(problem, reference, c_l);
  PicardState ps;
  const int per_eval = config.linesearch.picard_iters_per_eval;
  const bool done = run_picard(s, ps, per_eval > 0 ? per_eval : config.picard_max_iter, config);
  if (per_eval == 0 && !done) {
    throw ConvergenceError("Picard iteration did not converge at c_l = " + std::to_string(c_l),
                           ps.changes);
  }
  return objective_of(s, ps);
}

std::vector<double> objective_scan(const Problem& problem, std::span<const double> c_values,
                                   const ReferenceSpec& reference, const SolverConfig& config) {
  std::vector<double> out;
  out.reserve(c_values.size());
  for (double c : c_values) {
    try {
      out.push_back(objective_cl(problem, c, reference, config));
    } catch (const std::runtime_error&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace porelec
