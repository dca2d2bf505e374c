#include "monolab/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "compensated.hpp"

namespace monolab {

namespace {

constexpr std::size_t kMaxCells = 4096;

void require_desk_scale(const GridFunctionND& h, const char* who) {
  if (h.values.size() > kMaxCells) {
    throw std::invalid_argument(std::string(who) +
                                ": grid capped at 4096 cells");
  }
}

// integer multi-indices, decoded to match cell_center_nd (last axis fastest)
std::vector<std::size_t> cell_indices(const GridFunctionND& h) {
  const std::size_t N = h.values.size();
  std::vector<std::size_t> idx(N * h.d);
  for (std::size_t flat = 0; flat < N; ++flat) {
    std::size_t rest = flat;
    for (std::size_t k = h.d; k-- > 0;) {
      idx[flat * h.d + k] = rest % h.n;
      rest /= h.n;
    }
  }
  return idx;
}

bool leq_cells(const std::size_t* x, const std::size_t* y, std::size_t d) {
  for (std::size_t k = 0; k < d; ++k) {
    if (x[k] > y[k]) return false;
  }
  return true;
}

double dist_sq_cells(const std::size_t* x, const std::size_t* y, std::size_t d,
                     double h) {
  double sumsq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double delta = (static_cast<double>(y[k]) - static_cast<double>(x[k]));
    sumsq += delta * delta;
  }
  return h * h * sumsq;
}

}  // namespace

HopfLaxResult hopf_lax(const GridFunctionND& h, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("hopf_lax: t must be nonnegative");
  }
  require_desk_scale(h, "hopf_lax");
  const std::size_t N = h.values.size();
  HopfLaxResult res;
  res.t = t;
  res.transformed = h;
  res.argmax_index.resize(N);
  std::iota(res.argmax_index.begin(), res.argmax_index.end(), 0u);
  if (t == 0.0) return res;

  const auto idx = cell_indices(h);
  for (std::size_t x = 0; x < N; ++x) {
    const std::size_t* xi = idx.data() + x * h.d;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_y = x;
    for (std::size_t y = 0; y < N; ++y) {
      const std::size_t* yi = idx.data() + y * h.d;
      if (!leq_cells(xi, yi, h.d)) continue;
      const double val =
          h.values[y] - dist_sq_cells(xi, yi, h.d, h.h) / (2.0 * t);
      if (val > best) {
        best = val;
        best_y = y;
      }
    }
    res.transformed.values[x] = best;
    res.argmax_index[x] = best_y;
  }
  return res;
}

GridFunctionND hopf_lax_separable(const GridFunctionND& h, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("hopf_lax_separable: t must be nonnegative");
  }
  require_desk_scale(h, "hopf_lax_separable");
  if (t == 0.0) return h;
  GridFunctionND out = h;
  std::vector<double> line(h.n), best(h.n);
  for (std::size_t k = 0; k < h.d; ++k) {
    for_each_line(out, k, [&](std::size_t base, std::size_t stride) {
      for (std::size_t i = 0; i < h.n; ++i) {
        line[i] = out.values[base + i * stride];
      }
      for (std::size_t i = 0; i < h.n; ++i) {
        double b = line[i];
        for (std::size_t j = i + 1; j < h.n; ++j) {
          const double gap = static_cast<double>(j - i) * h.h;
          const double val = line[j] - (gap * gap) / (2.0 * t);
          if (val > b) b = val;
        }
        best[i] = b;
      }
      for (std::size_t i = 0; i < h.n; ++i) {
        out.values[base + i * stride] = best[i];
      }
    });
  }
  return out;
}

double integrate(const GridFunctionND& g, const DiscreteMeasure& mu) {
  if (mu.d != g.d) {
    throw std::invalid_argument("integrate: dimension mismatch");
  }
  detail::CompensatedAccumulator acc;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < g.d; ++k) {
      const double pos = mu.points[a][k];
      const auto cell = static_cast<long long>(std::llround(pos / g.h - 0.5));
      if (cell < 0 || cell >= static_cast<long long>(g.n) ||
          std::abs(pos - (static_cast<double>(cell) + 0.5) * g.h) > 1e-9) {
        throw std::invalid_argument("integrate: atom off the grid");
      }
      flat = flat * g.n + static_cast<std::size_t>(cell);
    }
    acc.add(g.values[flat] * mu.masses[a]);
  }
  return acc.total();
}

double directed_lipschitz(const GridFunctionND& h) {
  require_desk_scale(h, "directed_lipschitz");
  const std::size_t N = h.values.size();
  const auto idx = cell_indices(h);
  double worst = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    const std::size_t* xi = idx.data() + x * h.d;
    for (std::size_t y = 0; y < N; ++y) {
      if (y == x) continue;
      const std::size_t* yi = idx.data() + y * h.d;
      if (!leq_cells(xi, yi, h.d)) continue;
      const double rise = h.values[y] - h.values[x];
      if (rise <= 0.0) continue;
      worst = std::max(worst,
                       rise / std::sqrt(dist_sq_cells(xi, yi, h.d, h.h)));
    }
  }
  return worst;
}

DualityGapResult duality_gap(const GridFunctionND& h, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
  if (mu.d != h.d || nu.d != h.d) {
    throw std::invalid_argument("duality_gap: dimension mismatch");
  }
  DualityGapResult res;
  const auto transformed = hopf_lax(h, 1.0).transformed;
  res.rhs = integrate(h, nu) - integrate(transformed, mu);
  const auto ot = directed_w2_lp(mu, nu);
  if (ot.status != OTStatus::optimal) {
    res.feasible = false;
    return res;
  }
  res.feasible = true;
  res.lhs = 0.5 * ot.value;
  res.slack = res.lhs - res.rhs;
  return res;
}

GridFunctionND hj_quotient(const GridFunctionND& h, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("hj_quotient: t must be positive");
  }
  auto out = hopf_lax(h, t).transformed;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (out.values[i] - h.values[i]) / t;
  }
  return out;
}

bool restricted_radius_check(const GridFunctionND& h, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("restricted_radius_check: t must be >= 0");
  }
  require_desk_scale(h, "restricted_radius_check");
  const auto full = hopf_lax(h, t);
  if (t == 0.0) return full.transformed.values == h.values;

  const auto [lo, hi] =
      std::minmax_element(h.values.begin(), h.values.end());
  const double C = *hi - *lo;
  // The mathematical radius is open at 2Ct; the tiny inflation keeps any
  // float argmax whose penalty subtraction rounded across the boundary, and
  // admits only candidates scoring strictly below the y = x baseline.
  const double radius_sq = 2.0 * C * t * (1.0 + 1e-9);
  const std::size_t N = h.values.size();
  const auto idx = cell_indices(h);
  for (std::size_t x = 0; x < N; ++x) {
    const std::size_t* xi = idx.data() + x * h.d;
    double best = h.values[x];
    for (std::size_t y = 0; y < N; ++y) {
      if (y == x) continue;
      const std::size_t* yi = idx.data() + y * h.d;
      if (!leq_cells(xi, yi, h.d)) continue;
      const double d2 = dist_sq_cells(xi, yi, h.d, h.h);
      if (!(d2 < radius_sq)) continue;
      best = std::max(best, h.values[y] - d2 / (2.0 * t));
    }
    if (best != full.transformed.values[x]) return false;
  }
  return true;
}

}  // namespace monolab
