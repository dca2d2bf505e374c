#include <monolab/heat.hpp>

#include <monolab/io.hpp>
#include <monolab/isotonic.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace monolab {

namespace {

// m[j] = min(0, (u[j+1]-u[j])/h) for the n-1 interior faces.
void face_slopes(const std::vector<double>& v, double h,
                 std::vector<double>& m) {
  const std::size_t n = v.size();
  m.resize(n >= 1 ? n - 1 : 0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    m[j] = std::min(0.0, (v[j + 1] - v[j]) / h);
  }
}

double linf(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

double prox_objective(const std::vector<double>& v,
                      const std::vector<double>& u, double h, double lambda) {
  double quad = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - u[i];
    quad += d * d;
  }
  double en = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    const double m = std::min(0.0, (v[j + 1] - v[j]) / h);
    en += m * m;
  }
  return 0.5 * h * quad + 0.5 * lambda * h * en;
}

// Solve (I + c * L_A) d = rhs where L_A is the graph Laplacian over the
// active faces (act[j] != 0 couples cells j and j+1). Thomas elimination;
// the matrix is strictly diagonally dominant for c >= 0.
void solve_active_tridiag(const std::vector<char>& act, double c,
                          std::vector<double>& rhs, std::vector<double>& diag,
                          std::vector<double>& lower) {
  const std::size_t n = rhs.size();
  diag.assign(n, 1.0);
  lower.assign(n >= 1 ? n - 1 : 0, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (act[j]) {
      diag[j] += c;
      diag[j + 1] += c;
      lower[j] = -c;
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * lower[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - lower[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace

HeatScheme heat_scheme_from_string(const std::string& s) {
  if (s == "explicit") return HeatScheme::explicit_flux;
  if (s == "implicit") return HeatScheme::implicit_prox;
  throw std::invalid_argument("unknown heat scheme: " + s);
}

std::string to_string(HeatScheme s) {
  switch (s) {
    case HeatScheme::explicit_flux:
      return "explicit";
    case HeatScheme::implicit_prox:
      return "implicit";
  }
  throw std::logic_error("unreachable heat scheme");
}

GridFunction1D step_explicit(const GridFunction1D& u, double dt) {
  const double cfl = 0.5 * u.h * u.h;
  if (!(dt > 0.0) || dt > cfl * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "step_explicit: need 0 < dt <= h^2/2, got dt = " + std::to_string(dt) +
        " with h^2/2 = " + std::to_string(cfl));
  }
  GridFunction1D v = u;
  if (u.n < 2) return v;
  const double r = dt / u.h;
  double left = 0.0;
  for (std::size_t i = 0; i + 1 < u.n; ++i) {
    const double right = std::min(0.0, (u.values[i + 1] - u.values[i]) / u.h);
    v.values[i] = u.values[i] + r * (right - left);
    left = right;
  }
  v.values[u.n - 1] = u.values[u.n - 1] + r * (0.0 - left);
  return v;
}

GridFunction1D step_implicit(const GridFunction1D& u, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("step_implicit: lambda must be positive");
  }
  GridFunction1D out = u;
  if (u.n < 2) return out;
  const std::size_t n = u.n;
  const double h = u.h;
  // The residual R = v - u - (lambda/h)(m_i - m_{i-1}) amplifies rounding in
  // v by lambda/h^2, so the reachable floor scales with that factor. The
  // corresponding gradient norm h*rmax stays below 1e-10 for any practical n.
  const double scale = std::max(1.0, linf(u.values));
  const double tol =
      scale * (1e-12 + 16.0 * std::numeric_limits<double>::epsilon() *
                           (lambda / (h * h)));

  std::vector<double>& v = out.values;
  std::vector<double> m, resid, step, diag, lower, trial;
  std::vector<char> act(n - 1, 0);

  for (int iter = 0; iter < 200; ++iter) {
    face_slopes(v, h, m);
    // Fixed-point residual (gradient of the objective divided by h):
    // R_i = v_i - u_i - (lambda/h)(m_i - m_{i-1}), boundary slopes zero.
    resid.assign(n, 0.0);
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mr = (i + 1 < n) ? m[i] : 0.0;
      const double ml = (i > 0) ? m[i - 1] : 0.0;
      resid[i] = v[i] - u.values[i] - (lambda / h) * (mr - ml);
      rmax = std::max(rmax, std::abs(resid[i]));
    }
    if (rmax <= tol) return out;

    for (std::size_t j = 0; j + 1 < n; ++j) act[j] = v[j + 1] < v[j] ? 1 : 0;
    step = resid;
    for (double& x : step) x = -x;
    solve_active_tridiag(act, lambda / (h * h), step, diag, lower);

    // Armijo backtracking on the true objective; the Newton direction is a
    // descent direction since the generalized Hessian is positive definite.
    const double f0 = prox_objective(v, u.values, h, lambda);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += h * resid[i] * step[i];
    double t = 1.0;
    while (t >= 1e-14) {
      trial = v;
      for (std::size_t i = 0; i < n; ++i) trial[i] += t * step[i];
      if (prox_objective(trial, u.values, h, lambda) <=
          f0 + 1e-4 * t * slope) {
        break;
      }
      t *= 0.5;
    }
    if (t < 1e-14) break;
    v.swap(trial);
  }

  face_slopes(v, h, m);
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mr = (i + 1 < n) ? m[i] : 0.0;
    const double ml = (i > 0) ? m[i - 1] : 0.0;
    rmax = std::max(rmax, std::abs(v[i] - u.values[i] - (lambda / h) * (mr - ml)));
  }
  throw std::runtime_error(
      "step_implicit: no convergence within the iteration cap; residual = " +
      format_double(rmax));
}

EvolutionTrace evolve(const GridFunction1D& u, double T, HeatScheme scheme,
                      double step) {
  if (!(T > 0.0)) throw std::invalid_argument("evolve: T must be positive");
  if (!(step > 0.0)) {
    throw std::invalid_argument("evolve: step size must be positive");
  }

  std::size_t nsteps = static_cast<std::size_t>(std::ceil(T / step - 1e-12));
  if (nsteps == 0) nsteps = 1;
  const std::size_t stride = (nsteps + 511) / 512;

  EvolutionTrace trace;
  auto record = [&trace](double t, const GridFunction1D& state) {
    trace.times.push_back(t);
    trace.states.push_back(state);
    trace.energies.push_back(directed_dirichlet_energy(state));
    trace.masses.push_back(mass(state));
  };

  GridFunction1D cur = u;
  record(0.0, cur);
  double t = 0.0;
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double target =
        (k == nsteps) ? T : std::min(static_cast<double>(k) * step, T);
    const double dt = target - t;
    if (dt > 0.0) {
      cur = (scheme == HeatScheme::explicit_flux) ? step_explicit(cur, dt)
                                                  : step_implicit(cur, dt);
    }
    t = target;
    if (k == nsteps || k % stride == 0) record(t, cur);
  }
  return trace;
}

EquilibriumResult monotone_equilibrium(const GridFunction1D& u,
                                       double tol_energy, double tol_change) {
  if (!(tol_energy > 0.0) || !(tol_change > 0.0)) {
    throw std::invalid_argument(
        "monotone_equilibrium: tolerances must be positive");
  }

  EquilibriumResult out;
  out.equilibrium = u;
  if (is_monotone(u)) {
    out.residual_energy = directed_dirichlet_energy(u);
    return out;
  }

  const double scale = std::max(1.0, linf(u.values));
  const double lambda_cap = 0.25;
  double lambda = std::min(lambda_cap, 0.5 * u.h * u.h);
  GridFunction1D cur = u;
  const std::size_t max_iter = 10000;

  for (std::size_t it = 1; it <= max_iter; ++it) {
    GridFunction1D next = step_implicit(cur, lambda);
    double change = 0.0;
    for (std::size_t i = 0; i < u.n; ++i) {
      change = std::max(change, std::abs(next.values[i] - cur.values[i]));
    }
    cur = std::move(next);
    out.iterations = it;

    const double energy = directed_dirichlet_energy(cur);
    if (energy < tol_energy && change <= tol_change * lambda * scale) {
      out.residual_energy = energy;
      double viol = 0.0;
      for (std::size_t j = 0; j + 1 < cur.n; ++j) {
        viol = std::max(viol, cur.values[j] - cur.values[j + 1]);
      }
      if (viol < std::sqrt(tol_energy)) {
        cur.values = pava_1d(cur.values, std::vector<double>(cur.n, 1.0));
        out.snapped = true;
      }
      out.equilibrium = std::move(cur);
      return out;
    }
    lambda = std::min(lambda_cap, 2.0 * lambda);
  }

  throw std::runtime_error(
      "monotone_equilibrium: no convergence within " +
      std::to_string(max_iter) + " iterations; residual energy = " +
      std::to_string(directed_dirichlet_energy(cur)));
}

double energy_decay_rate(const EvolutionTrace& trace) {
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.energies[k] > 1e-12) {
      ts.push_back(trace.times[k]);
      ys.push_back(std::log(trace.energies[k]));
    }
  }
  if (ts.size() < 10) {
    throw std::invalid_argument(
        "energy_decay_rate: need at least 10 samples with energy above "
        "1e-12, have " +
        std::to_string(ts.size()));
  }
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += ys[k];
  }
  mt /= static_cast<double>(ts.size());
  my /= static_cast<double>(ts.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    num += (ts[k] - mt) * (ys[k] - my);
    den += (ts[k] - mt) * (ts[k] - mt);
  }
  if (!(den > 0.0)) {
    throw std::invalid_argument("energy_decay_rate: degenerate time window");
  }
  return -num / den;
}

double spectral_decay_reference(std::size_t n) {
  if (n < 2) {
    throw std::invalid_argument(
        "spectral_decay_reference: need at least 2 cells");
  }
  const double pi = 3.14159265358979323846264338327950288;
  const double s = std::sin(pi / (2.0 * static_cast<double>(n)));
  return 8.0 * static_cast<double>(n) * static_cast<double>(n) * s * s;
}

std::string trace_csv(const EvolutionTrace& trace) {
  std::ostringstream os;
  os << "t,energy,mass,min,max\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const auto& vals = trace.states[k].values;
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    os << format_double(trace.times[k]) << ','
       << format_double(trace.energies[k]) << ','
       << format_double(trace.masses[k]) << ',' << format_double(*lo) << ','
       << format_double(*hi) << '\n';
  }
  return os.str();
}

}  // namespace monolab
