#pragma once

#include <monolab/grid.hpp>
#include <monolab/transport.hpp>

#include <cstddef>
#include <vector>

namespace monolab {

// Directed Hopf-Lax smoothing: for each cell x, the maximum of
// h(y) - |x-y|^2/(2t) over grid cells y >= x coordinatewise, with y = x
// included so the transform never falls below h.

struct HopfLaxResult {
  GridFunctionND transformed;
  double t = 0.0;
  // flat index of the first cell (in flat order) achieving each maximum
  std::vector<std::size_t> argmax_index;
};

// Brute force over the up-set of every cell, O(N^2 d) for N total cells;
// exact and simple at desk scale, so grids are capped at 4096 cells.
// t = 0 returns h with every cell its own maximizer; t < 0 is an error.
HopfLaxResult hopf_lax(const GridFunctionND& h, double t);

// The same maximum evaluated axis by axis (the quadratic penalty separates
// over coordinates), O(N n d). Agrees with hopf_lax up to the reordering
// of floating-point penalty subtractions.
GridFunctionND hopf_lax_separable(const GridFunctionND& h, double t);

// Integral of g against a measure whose atoms sit on cells of g's grid.
double integrate(const GridFunctionND& g, const DiscreteMeasure& mu);

// One-sided discrete Lipschitz constant: the maximum over comparable cell
// pairs x <= y, x != y of (h(y) - h(x))+ / |y - x|.
double directed_lipschitz(const GridFunctionND& h);

struct DualityGapResult {
  bool feasible = false;
  double lhs = 0.0;    // half the directed squared transport cost
  double rhs = 0.0;    // integral of h d(nu) minus integral of H_1 h d(mu)
  double slack = 0.0;  // lhs - rhs
};

// Transport lower bound via the Hopf-Lax transform: for every h,
// half of W2^2(mu -> nu) is at least int h dnu - int (H_1 h) dmu, so the slack
// is nonnegative up to rounding. An infeasible directed pair makes the
// bound vacuous: feasible is false, rhs is still reported, lhs and slack
// are zero.
DualityGapResult duality_gap(const GridFunctionND& h, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu);

// (H_t h - h)/t cellwise. Nonnegative exactly (y = x is a candidate), and
// at most M^2/2 for M the directed Lipschitz constant of h. Requires t > 0.
GridFunctionND hj_quotient(const GridFunctionND& h, double t);

// Recomputes the transform with candidates restricted to cells within
// distance sqrt(2Ct) of x, C = max h - min h, plus x itself, and reports
// whether the restricted transform equals the unrestricted one exactly.
// Cells at or beyond that radius score at most h(x), so they never matter.
bool restricted_radius_check(const GridFunctionND& h, double t);

}  // namespace monolab
