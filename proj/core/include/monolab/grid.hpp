#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace monolab {

// Cell-centered grid function on [0,1]: n >= 2 cells of width h = 1/n,
// values[i] is the cell average over [i*h, (i+1)*h]. All integrals are
// cell sums scaled by h, so discrete identities (mass balance, summation
// by parts) hold exactly rather than up to quadrature error.
struct GridFunction1D {
  std::size_t n = 0;
  double h = 0.0;
  std::vector<double> values;
};

GridFunction1D make_grid1d(std::vector<double> values);

// Same on [0,1]^d with n cells per axis, row-major storage, last axis
// fastest. Axis k has stride n^(d-1-k).
struct GridFunctionND {
  std::size_t d = 0;
  std::size_t n = 0;
  double h = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::size_t stride(std::size_t axis) const;
};

GridFunctionND make_gridnd(std::size_t d, std::size_t n, std::vector<double> values);
GridFunctionND constant_gridnd(std::size_t d, std::size_t n, double c);

GridFunction1D to_1d(const GridFunctionND& f);  // requires d == 1
GridFunctionND to_nd(const GridFunction1D& u);

double mass(const GridFunction1D& u);  // h * sum(values)
double mass(const GridFunctionND& f);  // h^d * sum(values)
double mean(const GridFunction1D& u);
double mean(const GridFunctionND& f);
double l2_norm_sq(const GridFunctionND& f);
double l2_dist_sq(const GridFunctionND& f, const GridFunctionND& g);
double linf_dist(const GridFunctionND& f, const GridFunctionND& g);

double cell_center(std::size_t i, std::size_t n);
std::vector<double> cell_center_nd(std::size_t flat, std::size_t d, std::size_t n);

// One-sided (directed) gradient. Component along `axis` at cell c is
// min(0, (f[c + e_axis] - f[c]) / h); cells on the last slice get 0.
std::vector<GridFunctionND> directed_gradient_nd(const GridFunctionND& f);

// Integral of |grad^- f|^2: sum over axes and cells of the squared
// directed component times h^d.
double grad_minus_sq_integral(const GridFunctionND& f);

// Splitting u = up + down with up nondecreasing and down nonincreasing
// of zero mean. The down part cumulates the negative increments
// min(0, u[i+1]-u[i]) and is then shifted to zero mean; up := u - down.
// Among all splittings into a nondecreasing plus a nonincreasing part
// this one has the least H1 energy of the decreasing part.
struct Decomposition1D {
  GridFunction1D up;
  GridFunction1D down;
};
Decomposition1D canonical_decomposition(const GridFunction1D& u);

// E^-(u) = 1/2 * sum_i min(0, (u[i+1]-u[i])/h)^2 * h. Zero exactly on
// nondecreasing inputs.
double directed_dirichlet_energy(const GridFunction1D& u);

// Squared H1 seminorm: sum_i ((u[i+1]-u[i])/h)^2 * h.
double h1_seminorm(const GridFunction1D& u);

// max_i |u[i+1]-u[i]| / h.
double lipschitz_seminorm(const GridFunction1D& u);

bool is_monotone(const GridFunction1D& u, double tol = 0.0);
bool is_monotone_axis(const GridFunctionND& f, std::size_t axis, double tol = 0.0);
bool is_monotone(const GridFunctionND& f, double tol = 0.0);

// Visits every 1-D line along `axis` as (base offset, stride); cell j of
// the line lives at values[base + j*stride]. There are n^(d-1) lines.
void for_each_line(const GridFunctionND& f, std::size_t axis,
                   const std::function<void(std::size_t base, std::size_t stride)>& fn);

std::vector<double> extract_line(const GridFunctionND& f, std::size_t base, std::size_t stride);
void insert_line(GridFunctionND& f, std::size_t base, std::size_t stride,
                 const std::vector<double>& line);

// Continuum test function with an analytic gradient and a certified
// Lipschitz bound in the pointwise l2 sense: |grad F(x)|_2 <= lipschitz.
struct AnalyticFunction {
  std::size_t d = 0;
  double lipschitz = 0.0;
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

GridFunctionND sample_to_grid(const AnalyticFunction& F, std::size_t n);

enum class FamilyKind {
  random_trig,       // random cosine mixture, analytic gradient
  random_increment,  // separable random walk, grid-native only
  linear_lowerbound, // -eps*x_axis + (M/sqrt(d)) * sum of the other coords
  staircase,         // smoothed steps along a random nonnegative direction
  monotone_random,   // nonnegative mixture of coordinatewise ramps
};

FamilyKind family_kind_from_string(const std::string& s);
std::string to_string(FamilyKind k);

struct SyntheticFamilySpec {
  FamilyKind kind = FamilyKind::random_trig;
  double M = 1.0;          // target Lipschitz budget
  std::uint64_t seed = 0;
  // kind-specific knobs
  double eps = 0.25;       // linear_lowerbound: slope of the decreasing axis
  std::size_t axis = 0;    // linear_lowerbound: which axis decreases
  std::size_t modes = 4;   // random_trig: number of cosine terms
  std::size_t steps = 3;   // staircase / monotone_random: number of ramps
  double width = 0.15;     // staircase / monotone_random: ramp width
  double sign = -1.0;      // staircase: +1 monotone, -1 anti-monotone
};

// Deterministic in (spec, d, n). The reported Lipschitz bound of the
// underlying function is respected by the sampled grid, which tests
// verify through finite differences.
GridFunctionND generate(const SyntheticFamilySpec& spec, std::size_t d, std::size_t n);

// Continuum form of the same function. random_increment has none and throws.
AnalyticFunction generate_analytic(const SyntheticFamilySpec& spec, std::size_t d);

}  // namespace monolab
