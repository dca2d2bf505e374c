#pragma once

#include <cstddef>
#include <vector>

#include "monolab/grid.hpp"

namespace monolab {

// L2 projection onto the cone of coordinatewise nondecreasing grid
// functions, with an optimality certificate.
struct IsotonicResult {
  GridFunctionND projection;  // exactly monotone along every axis
  double distance_sq = 0.0;   // sum (f - projection)^2 * h^d
  double kkt_residual = 0.0;  // max of primal, dual and complementarity violations
  std::size_t iterations = 0;
};

// Weighted pool-adjacent-violators. Returns the L2 projection of
// `values` onto nondecreasing sequences under the given positive
// weights; the output is exactly nondecreasing.
std::vector<double> pava_1d(const std::vector<double>& values,
                            const std::vector<double>& weights);

// Projection onto {g : g[c] <= g[c + e_i] for every axis i}. Uniform
// quadrature weights h^d. Dual block-coordinate (Dykstra) over the d
// per-axis cones, each solved exactly per line by PAVA; the correction
// vectors certify optimality through complementary slackness. Capped at
// 65536 cells.
IsotonicResult isotonic_nd(const GridFunctionND& f);

// L^p distance to the monotone cone, p in {1,2}. p=2 derives from
// isotonic_nd; p=1 uses median pooling in one dimension and exact
// threshold cuts on the grid DAG otherwise (capped at 1024 cells).
double dist_mono(const GridFunctionND& f, int p);

}  // namespace monolab
