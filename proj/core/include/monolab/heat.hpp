#pragma once

#include <monolab/grid.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace monolab {

enum class HeatScheme {
  explicit_flux,  // forward Euler on the conservative flux form, CFL-limited
  implicit_prox,  // backward Euler: each step is the proximal map of the energy
};

HeatScheme heat_scheme_from_string(const std::string& s);
std::string to_string(HeatScheme s);

// Time series of one trajectory. All arrays share one length: states[k] is
// the grid function at times[k], energies[k] its directed Dirichlet energy,
// masses[k] its total mass h * sum(u). Long runs are subsampled to at most
// ~512 records; the initial and final states are always recorded.
struct EvolutionTrace {
  std::vector<double> times;
  std::vector<GridFunction1D> states;
  std::vector<double> energies;
  std::vector<double> masses;
};

struct EquilibriumResult {
  GridFunction1D equilibrium;
  std::size_t iterations = 0;
  // Directed energy of the converged state before any snap (the returned
  // equilibrium has exactly zero energy whenever snapped is true).
  double residual_energy = 0.0;
  bool snapped = false;
};

// One forward-Euler step of du/dt with interior fluxes
// F_{i+1/2} = min(0, (u[i+1]-u[i])/h) and zero flux through both boundary
// faces: u[i] += dt * (F_{i+1/2} - F_{i-1/2}) / h. Requires 0 < dt <= h^2/2;
// at that bound the update is an order-preserving scheme and the energy is
// nonincreasing. Total mass is conserved up to roundoff.
GridFunction1D step_explicit(const GridFunction1D& u, double dt);

// One backward-Euler step: the unique minimizer of
//   v |-> 1/2 sum (v_i - u_i)^2 h + lambda * E^-(v),
// solved by a semismooth Newton method (the objective is C^1 convex piecewise
// quadratic) to first-order residual <= 1e-12 * max(1, |u|_inf). Throws on
// lambda <= 0 and on non-convergence (with the residual in the message).
GridFunction1D step_implicit(const GridFunction1D& u, double lambda);

// Integrate from u to time T. For the explicit scheme `step` is dt (CFL
// checked per step); for the implicit scheme it is the per-step lambda. The
// final step is shortened so the trajectory lands on T exactly.
EvolutionTrace evolve(const GridFunction1D& u, double T, HeatScheme scheme,
                      double step);

// Iterate implicit steps with a doubling lambda schedule (from h^2/2 up to
// 1/4) until the directed energy falls below tol_energy and the per-step
// change per unit time falls below tol_change. If the residual decreasing
// increments are then smaller than sqrt(tol_energy), the state is snapped to
// the nearest monotone vector (uniform-weight pool-adjacent-violators) and
// snapped is set. Monotone input returns immediately with 0 iterations.
EquilibriumResult monotone_equilibrium(const GridFunction1D& u,
                                       double tol_energy = 1e-12,
                                       double tol_change = 1e-12);

// Least-squares slope of log(energy) against time over the samples with
// energy > 1e-12, negated so the result is the rate K in E(t) ~ E0 e^{-Kt}.
// Requires at least 10 such samples; throws on a degenerate window.
double energy_decay_rate(const EvolutionTrace& trace);

// Reference rate for the slowest decaying profile on an n-cell grid: twice
// the smallest eigenvalue of the second-difference operator with zero
// boundary values on the n-1 interior faces, 8 n^2 sin^2(pi / (2n)).
// (Differencing the flow shows decreasing data relaxes by linear diffusion
// of its face slopes, which vanish at the boundary.) Tends to 2 pi^2.
double spectral_decay_reference(std::size_t n);

// CSV export with header t,energy,mass,min,max; one row per record,
// byte-identical across runs for identical traces.
std::string trace_csv(const EvolutionTrace& trace);

}  // namespace monolab
