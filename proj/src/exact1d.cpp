#include "porelec/exact1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "porelec/errors.hpp"

namespace porelec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Trajectory {
  std::vector<double> eta;
  std::vector<double> deta;
  double eta_end = 0.0;
  double deta_end = 0.0;
  bool finite = true;
};

// Fixed-step RK4 on (eta, eta'). Stops early once the state is non-finite.
Trajectory integrate(const ExactProblem& p, double eta0, double q1, int steps, bool keep) {
  const double h = p.W / steps;
  const double cp = p.c_prime();
  auto accel = [&](double eta) { return bv_source(eta, cp, p.b); };
  Trajectory t;
  if (keep) {
    t.eta.reserve(static_cast<std::size_t>(steps) + 1);
    t.deta.reserve(static_cast<std::size_t>(steps) + 1);
    t.eta.push_back(eta0);
    t.deta.push_back(q1);
  }
  double y = eta0;
  double v = q1;
  for (int k = 0; k < steps; ++k) {
    const double k1y = v;
    const double k1v = accel(y);
    const double k2y = v + 0.5 * h * k1v;
    const double k2v = accel(y + 0.5 * h * k1y);
    const double k3y = v + 0.5 * h * k2v;
    const double k3v = accel(y + 0.5 * h * k2y);
    const double k4y = v + h * k3v;
    const double k4v = accel(y + h * k3y);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!std::isfinite(y) || !std::isfinite(v)) {
      t.finite = false;
      break;
    }
    if (keep) {
      t.eta.push_back(y);
      t.deta.push_back(v);
    }
  }
  t.eta_end = y;
  t.deta_end = v;
  return t;
}

struct Root {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

// Root of an increasing function: bracket outward from the guess, then secant
// steps safeguarded by bisection.
Root find_increasing_root(const std::function<double(double)>& f, double guess, double step,
                          double tol, int max_iter, const char* what) {
  Root r;
  auto eval = [&](double x) {
    ++r.evaluations;
    return f(x);
  };
  double x0 = guess;
  double f0 = eval(x0);
  if (std::abs(f0) <= tol) return {x0, f0, 0, r.evaluations};

  const double dir = f0 > 0.0 ? -1.0 : 1.0;
  double x1 = x0;
  double f1 = f0;
  bool bracketed = false;
  for (int k = 0; k < 80; ++k) {
    x1 = x0 + dir * step;
    f1 = eval(x1);
    if (std::abs(f1) <= tol) return {x1, f1, 0, r.evaluations};
    if ((f1 > 0.0) != (f0 > 0.0)) {
      bracketed = true;
      break;
    }
    x0 = x1;
    f0 = f1;
    step *= 2.0;
  }
  if (!bracketed) {
    throw ConvergenceError(std::string(what) + ": no sign change found up to " +
                           std::to_string(x1) + " (mismatch " + std::to_string(f1) + ")");
  }

  double lo = std::min(x0, x1), hi = std::max(x0, x1);
  double flo = lo == x0 ? f0 : f1, fhi = hi == x0 ? f0 : f1;
  // Secant pair: the two most recent finite evaluations.
  double xa = x0, fa = f0, xb = x1, fb = f1;
  double best = std::abs(flo) < std::abs(fhi) ? lo : hi;
  double fbest = std::min(std::abs(flo), std::abs(fhi));
  for (int it = 1; it <= max_iter; ++it) {
    double x = 0.5 * (lo + hi);
    if (std::isfinite(fa) && std::isfinite(fb) && fb != fa) {
      const double s = xb - fb * (xb - xa) / (fb - fa);
      if (s > lo && s < hi) x = s;
    }
    const double fx = eval(x);
    r.iterations = it;
    if (std::abs(fx) < fbest) {
      fbest = std::abs(fx);
      best = x;
    }
    if (std::abs(fx) <= tol) return {x, fx, it, r.evaluations};
    if (fx > 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    xa = xb;
    fa = fb;
    xb = x;
    fb = fx;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
      // Bracket collapsed to rounding level: the mismatch cannot be reduced further.
      return {best, fbest, it, r.evaluations};
    }
  }
  throw ConvergenceError(std::string(what) + ": secant did not converge in bracket [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

double mismatch_or_inf(const Trajectory& t, double value, double target) {
  if (!t.finite) return t.eta_end > 0.0 || (std::isnan(t.eta_end) && t.deta_end > 0.0) ? kInf : -kInf;
  return value - target;
}

ShootingResult finish(const ExactProblem& p, double eta0, double q1, const ShootingOptions& o,
                      const Root& root) {
  ShootingResult res;
  res.eta0 = eta0;
  res.q1 = q1;
  const Trajectory t = integrate(p, eta0, q1, o.ode_steps, true);
  const double h = p.W / o.ode_steps;
  res.x.resize(t.eta.size());
  for (std::size_t k = 0; k < res.x.size(); ++k) res.x[k] = std::min(p.W, h * static_cast<double>(k));
  res.eta = t.eta;
  res.deta = t.deta;
  const double cp = p.c_prime();
  auto integral = [&](double e, double de) {
    return 0.5 * de * de - cp / p.b * std::cosh(std::clamp(p.b * e, -kMaxExponent, kMaxExponent));
  };
  res.first_integral = integral(eta0, q1);
  for (std::size_t k = 0; k < res.eta.size(); ++k) {
    res.first_integral_drift =
        std::max(res.first_integral_drift, std::abs(integral(res.eta[k], res.deta[k]) - res.first_integral));
  }
  res.residual = std::abs(root.fx);
  res.iterations = root.iterations;
  res.evaluations = root.evaluations;
  return res;
}

void check_options(const ShootingOptions& o) {
  if (o.ode_steps < 1) throw ParameterError("ode_steps must be >= 1");
  if (!(o.tol > 0.0)) throw ParameterError("shooting tol must be positive");
  if (o.max_iter < 1) throw ParameterError("shooting max_iter must be >= 1");
}

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

std::size_t segment(std::span<const double> nodes, double x) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - nodes.begin() - 1, 0));
  return std::min(k, nodes.size() - 2);
}

}  // namespace

ExactProblem ExactProblem::galvanostatic(const PhysicalParams& params, double sigma, double kappa,
                                         double W, double j_applied) {
  ExactProblem p{params.a(), params.b(), sigma, kappa, W, j_applied / sigma, -j_applied / kappa,
                 params.E_eq(), j_applied};
  p.validate();
  return p;
}

ExactProblem ExactProblem::current_driven(const PhysicalParams& params, double sigma,
                                          double kappa, double W, double q2) {
  ExactProblem p{params.a(), params.b(), sigma, kappa, W, -(kappa / sigma) * q2, q2,
                 params.E_eq(), -kappa * q2};
  p.validate();
  return p;
}

void ExactProblem::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(sigma > 0.0) || !(kappa > 0.0) || !(W > 0.0)) {
    throw ParameterError("exact problem needs positive a, b, sigma, kappa, W");
  }
  if (!std::isfinite(q1) || !std::isfinite(q2)) throw ParameterError("q1, q2 must be finite");
}

ShootingResult shoot_eta0(const ExactProblem& p, const ShootingOptions& o) {
  p.validate();
  check_options(o);
  auto mismatch = [&](double eta0) {
    const Trajectory t = integrate(p, eta0, p.q1, o.ode_steps, false);
    return mismatch_or_inf(t, t.deta_end, p.q2);
  };
  // Mean-value estimate: q2 - q1 = c' W sinh(b eta_mean).
  const double guess =
      o.seed.value_or(std::asinh((p.q2 - p.q1) / (p.c_prime() * p.W)) / p.b);
  const Root root = find_increasing_root(mismatch, guess, 0.05, o.tol, o.max_iter, "shoot_eta0");
  return finish(p, root.x, p.q1, o, root);
}

ShootingResult shoot_slope(const ExactProblem& p, double eta0, double eta_w,
                           const ShootingOptions& o) {
  p.validate();
  check_options(o);
  auto mismatch = [&](double q1) {
    const Trajectory t = integrate(p, eta0, q1, o.ode_steps, false);
    return mismatch_or_inf(t, t.eta_end, eta_w);
  };
  const double guess = o.seed.value_or((eta_w - eta0) / p.W);
  const double step = std::max(std::abs(guess), 1.0);
  const Root root = find_increasing_root(mismatch, guess, step, o.tol, o.max_iter, "shoot_slope");
  return finish(p, eta0, root.x, o, root);
}

std::vector<double> eta_profile(const ShootingResult& r, std::span<const double> xs) {
  if (r.x.size() < 2) throw ParameterError("eta_profile needs a trajectory");
  const double w = r.x.back();
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!(x >= 0.0 && x <= w)) throw ParameterError("eta_profile: x outside [0, W]");
    const std::size_t k = segment(r.x, x);
    out.push_back(hermite(r.x[k], r.x[k + 1], r.eta[k], r.eta[k + 1], r.deta[k], r.deta[k + 1], x));
  }
  return out;
}

Potentials1D reconstruct_1d_potentials(const ShootingResult& r, const ExactProblem& p,
                                       double phi_e0, std::span<const double> xs) {
  p.validate();
  if (r.x.size() < 2) throw ParameterError("reconstruct_1d_potentials needs a trajectory");
  const int steps = static_cast<int>(r.x.size()) - 1;
  const double h = p.W / steps;
  const double cp = p.c_prime();
  const double ae = p.a / p.sigma;

  // Augmented state (eta, eta', phi_e, phi_e').
  using State = std::array<double, 4>;
  auto rhs = [&](const State& s) -> State {
    return {s[1], bv_source(s[0], cp, p.b), s[3], bv_source(s[0], ae, p.b)};
  };
  std::vector<double> pe(r.x.size()), dpe(r.x.size()), eta(r.x.size()), deta(r.x.size());
  State s{r.eta0, r.q1, phi_e0, p.j_applied / p.sigma};
  for (int k = 0;; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    eta[ku] = s[0];
    deta[ku] = s[1];
    pe[ku] = s[2];
    dpe[ku] = s[3];
    if (k == steps) break;
    const State k1 = rhs(s);
    State tmp;
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    const State k2 = rhs(tmp);
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    const State k3 = rhs(tmp);
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + h * k3[i];
    const State k4 = rhs(tmp);
    for (int i = 0; i < 4; ++i) s[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }

  Potentials1D out;
  const std::vector<double> nodes = r.x;
  if (xs.empty()) xs = nodes;
  for (double x : xs) {
    if (!(x >= 0.0 && x <= nodes.back())) {
      throw ParameterError("reconstruct_1d_potentials: x outside [0, W]");
    }
    const std::size_t k = segment(nodes, x);
    const double x0 = nodes[k], x1 = nodes[k + 1];
    // phi_e' has derivative (a/sigma) sinh(b eta); use it for the slope Hermite.
    const double ddpe0 = bv_source(eta[k], ae, p.b), ddpe1 = bv_source(eta[k + 1], ae, p.b);
    const double ddeta0 = bv_source(eta[k], cp, p.b), ddeta1 = bv_source(eta[k + 1], cp, p.b);
    const double e = hermite(x0, x1, eta[k], eta[k + 1], deta[k], deta[k + 1], x);
    const double de = hermite(x0, x1, deta[k], deta[k + 1], ddeta0, ddeta1, x);
    const double phe = hermite(x0, x1, pe[k], pe[k + 1], dpe[k], dpe[k + 1], x);
    const double dphe = hermite(x0, x1, dpe[k], dpe[k + 1], ddpe0, ddpe1, x);
    out.x.push_back(x);
    out.phi_e.push_back(phe);
    out.dphi_e.push_back(dphe);
    out.phi_l.push_back(phe - e - p.E_eq);
    out.dphi_l.push_back(dphe - de);
  }
  return out;
}

}  // namespace porelec
