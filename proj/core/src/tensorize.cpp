#include "monolab/tensorize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "monolab/heat.hpp"
#include "monolab/isotonic.hpp"
#include "monolab/transport.hpp"

namespace monolab {

GridFunctionND apply_Mk(const GridFunctionND& f, std::size_t k) {
  if (k >= f.d) {
    throw std::invalid_argument("apply_Mk: axis out of range");
  }
  GridFunctionND out = f;
  std::size_t line_idx = 0;
  for_each_line(f, k, [&](std::size_t base, std::size_t stride) {
    GridFunction1D line;
    line.n = f.n;
    line.h = f.h;
    line.values = extract_line(f, base, stride);
    try {
      const auto eq = monotone_equilibrium(line);
      insert_line(out, base, stride, eq.equilibrium.values);
    } catch (const std::exception& e) {
      throw std::runtime_error("apply_Mk: axis " + std::to_string(k) +
                               ", line " + std::to_string(line_idx) + ": " +
                               e.what());
    }
    ++line_idx;
  });
  return out;
}

namespace {

// Largest cell-to-cell decrease along the axis, 0 if monotone.
double axis_violation(const GridFunctionND& f, std::size_t axis) {
  double worst = 0.0;
  for_each_line(f, axis, [&](std::size_t base, std::size_t stride) {
    for (std::size_t j = 0; j + 1 < f.n; ++j) {
      const double gap =
          f.values[base + j * stride] - f.values[base + (j + 1) * stride];
      worst = std::max(worst, gap);
    }
  });
  return worst;
}

// Re-snap every line along the axis with the pooling projection. Pooling is
// order preserving, so exact monotonicity of the other axes survives, and
// for a near-monotone input the values move by at most the violation.
void snap_axis(GridFunctionND& f, std::size_t axis) {
  const std::vector<double> unit(f.n, 1.0);
  for_each_line(f, axis, [&](std::size_t base, std::size_t stride) {
    insert_line(f, base, stride, pava_1d(extract_line(f, base, stride), unit));
  });
}

}  // namespace

GridFunctionND coordinatewise_equilibrium(const GridFunctionND& f) {
  GridFunctionND cur = f;
  for (std::size_t k = 0; k < f.d; ++k) {
    cur = apply_Mk(cur, k);
    // Each sweep leaves every previously relaxed axis monotone up to the
    // rounding dust of independently solved lines (the exact per-line maps
    // preserve the cross-line order). Snap that dust away in ascending axis
    // order; anything beyond dust is a genuine violation and a bug.
    for (std::size_t i = 0; i <= k; ++i) {
      const double viol = axis_violation(cur, i);
      if (viol > 1e-10) {
        throw std::logic_error(
            "coordinatewise_equilibrium: axis " + std::to_string(k) +
            " sweep broke monotonicity along axis " + std::to_string(i));
      }
      if (viol > 0.0) snap_axis(cur, i);
    }
    for (std::size_t i = 0; i <= k; ++i) {
      if (!is_monotone_axis(cur, i)) {
        throw std::logic_error(
            "coordinatewise_equilibrium: snap failed to restore axis " +
            std::to_string(i));
      }
    }
  }
  return cur;
}

double per_axis_energy(const GridFunctionND& f, std::size_t i) {
  if (i >= f.d) {
    throw std::invalid_argument("per_axis_energy: axis out of range");
  }
  const double transverse = std::pow(f.h, static_cast<double>(f.d - 1));
  double total = 0.0;
  for_each_line(f, i, [&](std::size_t base, std::size_t stride) {
    GridFunction1D line;
    line.n = f.n;
    line.h = f.h;
    line.values = extract_line(f, base, stride);
    total += directed_dirichlet_energy(line);
  });
  return total * transverse;
}

TensorizeReport transport_energy_check(const GridFunctionND& f, double a) {
  if (!(a > 0.0) || !(a < 1.0)) {
    throw std::invalid_argument("transport_energy_check: need 0 < a < 1");
  }
  for (const double v : f.values) {
    if (v < 1.0 - a - 1e-12 || v > 1.0 + a + 1e-12) {
      throw std::invalid_argument(
          "transport_energy_check: values must lie in [1-a, 1+a]");
    }
  }
  if (std::abs(mean(f) - 1.0) > 1e-9) {
    throw std::invalid_argument("transport_energy_check: mean must be 1");
  }
  if (f.values.size() > 512) {
    throw std::invalid_argument(
        "transport_energy_check: grid capped at 512 cells");
  }

  TensorizeReport report;
  report.per_axis_energy_before.resize(f.d);
  report.per_axis_energy_after.resize(f.d);
  for (std::size_t i = 0; i < f.d; ++i) {
    report.per_axis_energy_before[i] = per_axis_energy(f, i);
  }
  report.f_star = coordinatewise_equilibrium(f);
  for (std::size_t i = 0; i < f.d; ++i) {
    report.per_axis_energy_after[i] = per_axis_energy(report.f_star, i);
  }

  const auto mu = measure_from_grid(f);
  const auto nu = measure_from_grid(report.f_star);
  const auto ot = directed_w2_lp(mu, nu);
  if (ot.status != OTStatus::optimal) {
    // a bounded positive density always admits a coordinatewise-upward plan
    // onto its equilibrium; a failure here is a solver or construction bug
    throw std::runtime_error(
        "transport_energy_check: directed transport reported infeasible");
  }
  report.w2sq_directed = ot.value;
  report.grad_minus_sq_integral = grad_minus_sq_integral(f);
  report.ratio = (report.grad_minus_sq_integral > 0.0)
                     ? report.w2sq_directed / report.grad_minus_sq_integral
                     : 0.0;
  return report;
}

GridFunctionND transport_energy_trial(std::uint64_t seed, std::size_t d,
                                      std::size_t n, double a) {
  if (!(a > 0.0) || !(a < 1.0)) {
    throw std::invalid_argument("transport_energy_trial: need 0 < a < 1");
  }
  SyntheticFamilySpec family;
  family.kind = FamilyKind::random_trig;
  family.seed = seed;
  auto f = generate(family, d, n);
  // odd power keeps signs and order patterns while steepening the peaks
  for (double& x : f.values) {
    const double s = x * x;
    x *= s * s;
  }
  double sup0 = 0.0;
  for (const double x : f.values) sup0 = std::max(sup0, std::abs(x));
  const double half = 0.5 * static_cast<double>(d);
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    std::size_t rest = idx;
    double coord_sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      coord_sum += (static_cast<double>(rest % n) + 0.5) * f.h;
      rest /= n;
    }
    f.values[idx] -= 0.8 * sup0 * (coord_sum - half);
  }
  const double m = mean(f);
  double sup = 0.0;
  for (double& x : f.values) {
    x -= m;
    sup = std::max(sup, std::abs(x));
  }
  if (sup == 0.0) {
    for (double& x : f.values) x = 1.0;
    return f;
  }
  for (double& x : f.values) x = 1.0 + a * (x / sup);
  return f;
}

}  // namespace monolab
