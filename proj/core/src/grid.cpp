#include "monolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "compensated.hpp"
#include "monolab/rng.hpp"

namespace monolab {

namespace {

std::size_t checked_pow(std::size_t n, std::size_t d) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (r > (static_cast<std::size_t>(-1) / n)) {
      throw std::invalid_argument("grid size n^d overflows");
    }
    r *= n;
  }
  return r;
}

double accurate_sum(const std::vector<double>& v) {
  return detail::compensated_sum(v);
}

}  // namespace

GridFunction1D make_grid1d(std::vector<double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("grid function needs at least 2 cells");
  }
  GridFunction1D u;
  u.n = values.size();
  u.h = 1.0 / static_cast<double>(u.n);
  u.values = std::move(values);
  return u;
}

std::size_t GridFunctionND::stride(std::size_t axis) const {
  if (axis >= d) throw std::out_of_range("axis out of range");
  std::size_t s = 1;
  for (std::size_t k = axis + 1; k < d; ++k) s *= n;
  return s;
}

GridFunctionND make_gridnd(std::size_t d, std::size_t n, std::vector<double> values) {
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  if (n < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  if (values.size() != checked_pow(n, d)) {
    throw std::invalid_argument("value count does not match n^d");
  }
  GridFunctionND f;
  f.d = d;
  f.n = n;
  f.h = 1.0 / static_cast<double>(n);
  f.values = std::move(values);
  return f;
}

GridFunctionND constant_gridnd(std::size_t d, std::size_t n, double c) {
  return make_gridnd(d, n, std::vector<double>(checked_pow(n, d), c));
}

GridFunction1D to_1d(const GridFunctionND& f) {
  if (f.d != 1) throw std::invalid_argument("to_1d requires d == 1");
  return make_grid1d(f.values);
}

GridFunctionND to_nd(const GridFunction1D& u) { return make_gridnd(1, u.n, u.values); }

double mass(const GridFunction1D& u) { return u.h * accurate_sum(u.values); }

double mass(const GridFunctionND& f) {
  return std::pow(f.h, static_cast<double>(f.d)) * accurate_sum(f.values);
}

double mean(const GridFunction1D& u) {
  return accurate_sum(u.values) / static_cast<double>(u.n);
}

double mean(const GridFunctionND& f) {
  return accurate_sum(f.values) / static_cast<double>(f.values.size());
}

double l2_norm_sq(const GridFunctionND& f) {
  double s = 0.0;
  for (double x : f.values) s += x * x;
  return s * std::pow(f.h, static_cast<double>(f.d));
}

double l2_dist_sq(const GridFunctionND& f, const GridFunctionND& g) {
  if (f.d != g.d || f.n != g.n) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double e = f.values[i] - g.values[i];
    s += e * e;
  }
  return s * std::pow(f.h, static_cast<double>(f.d));
}

double linf_dist(const GridFunctionND& f, const GridFunctionND& g) {
  if (f.d != g.d || f.n != g.n) throw std::invalid_argument("grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    m = std::max(m, std::abs(f.values[i] - g.values[i]));
  }
  return m;
}

double cell_center(std::size_t i, std::size_t n) {
  return (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

std::vector<double> cell_center_nd(std::size_t flat, std::size_t d, std::size_t n) {
  std::vector<double> x(d);
  for (std::size_t k = d; k-- > 0;) {
    x[k] = cell_center(flat % n, n);
    flat /= n;
  }
  return x;
}

void for_each_line(const GridFunctionND& f, std::size_t axis,
                   const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t stride = f.stride(axis);
  const std::size_t block = stride * f.n;  // span of one axis-run
  const std::size_t total = f.values.size();
  for (std::size_t start = 0; start < total; start += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      fn(start + off, stride);
    }
  }
}

std::vector<double> extract_line(const GridFunctionND& f, std::size_t base, std::size_t stride) {
  std::vector<double> line(f.n);
  for (std::size_t j = 0; j < f.n; ++j) line[j] = f.values[base + j * stride];
  return line;
}

void insert_line(GridFunctionND& f, std::size_t base, std::size_t stride,
                 const std::vector<double>& line) {
  for (std::size_t j = 0; j < f.n; ++j) f.values[base + j * stride] = line[j];
}

std::vector<GridFunctionND> directed_gradient_nd(const GridFunctionND& f) {
  std::vector<GridFunctionND> out;
  out.reserve(f.d);
  for (std::size_t axis = 0; axis < f.d; ++axis) {
    GridFunctionND g = constant_gridnd(f.d, f.n, 0.0);
    const std::size_t stride = f.stride(axis);
    for_each_line(f, axis, [&](std::size_t base, std::size_t s) {
      for (std::size_t j = 0; j + 1 < f.n; ++j) {
        const std::size_t c = base + j * s;
        g.values[c] = std::min(0.0, (f.values[c + s] - f.values[c]) / f.h);
      }
    });
    (void)stride;
    out.push_back(std::move(g));
  }
  return out;
}

double grad_minus_sq_integral(const GridFunctionND& f) {
  double s = 0.0;
  for (std::size_t axis = 0; axis < f.d; ++axis) {
    for_each_line(f, axis, [&](std::size_t base, std::size_t stride) {
      for (std::size_t j = 0; j + 1 < f.n; ++j) {
        const std::size_t c = base + j * stride;
        const double g = std::min(0.0, (f.values[c + stride] - f.values[c]) / f.h);
        s += g * g;
      }
    });
  }
  return s * std::pow(f.h, static_cast<double>(f.d));
}

Decomposition1D canonical_decomposition(const GridFunction1D& u) {
  const std::size_t n = u.n;
  // Cumulate the signed increment parts separately. Each running sum is
  // monotone even in floating point (adding a one-signed term, then
  // rounding, preserves order), so the parts come out exactly monotone
  // and only the reconstruction carries rounding.
  std::vector<double> down(n, 0.0);
  std::vector<double> up(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double du = u.values[i + 1] - u.values[i];
    down[i + 1] = down[i] + std::min(0.0, du);
    up[i + 1] = up[i] + std::max(0.0, du);
  }
  const double shift = accurate_sum(down) / static_cast<double>(n);
  for (double& x : down) x -= shift;
  const double anchor = u.values[0] + shift;
  for (double& x : up) x += anchor;
  Decomposition1D dec;
  dec.down = make_grid1d(std::move(down));
  dec.up = make_grid1d(std::move(up));
  return dec;
}

double directed_dirichlet_energy(const GridFunction1D& u) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.n; ++i) {
    const double g = std::min(0.0, (u.values[i + 1] - u.values[i]) / u.h);
    s += g * g;
  }
  return 0.5 * s * u.h;
}

double h1_seminorm(const GridFunction1D& u) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.n; ++i) {
    const double g = (u.values[i + 1] - u.values[i]) / u.h;
    s += g * g;
  }
  return s * u.h;
}

double lipschitz_seminorm(const GridFunction1D& u) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < u.n; ++i) {
    m = std::max(m, std::abs(u.values[i + 1] - u.values[i]) / u.h);
  }
  return m;
}

bool is_monotone(const GridFunction1D& u, double tol) {
  for (std::size_t i = 0; i + 1 < u.n; ++i) {
    if (u.values[i + 1] < u.values[i] - tol) return false;
  }
  return true;
}

bool is_monotone_axis(const GridFunctionND& f, std::size_t axis, double tol) {
  bool ok = true;
  for_each_line(f, axis, [&](std::size_t base, std::size_t stride) {
    for (std::size_t j = 0; ok && j + 1 < f.n; ++j) {
      const std::size_t c = base + j * stride;
      if (f.values[c + stride] < f.values[c] - tol) ok = false;
    }
  });
  return ok;
}

bool is_monotone(const GridFunctionND& f, double tol) {
  for (std::size_t axis = 0; axis < f.d; ++axis) {
    if (!is_monotone_axis(f, axis, tol)) return false;
  }
  return true;
}

GridFunctionND sample_to_grid(const AnalyticFunction& F, std::size_t n) {
  const std::size_t total = checked_pow(n, F.d);
  std::vector<double> v(total);
  for (std::size_t c = 0; c < total; ++c) {
    v[c] = F.value(cell_center_nd(c, F.d, n));
  }
  return make_gridnd(F.d, n, std::move(v));
}

FamilyKind family_kind_from_string(const std::string& s) {
  if (s == "random-trig") return FamilyKind::random_trig;
  if (s == "random-increment") return FamilyKind::random_increment;
  if (s == "linear-lowerbound") return FamilyKind::linear_lowerbound;
  if (s == "staircase") return FamilyKind::staircase;
  if (s == "monotone-random") return FamilyKind::monotone_random;
  throw std::invalid_argument("unknown synthetic family: " + s);
}

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::random_trig: return "random-trig";
    case FamilyKind::random_increment: return "random-increment";
    case FamilyKind::linear_lowerbound: return "linear-lowerbound";
    case FamilyKind::staircase: return "staircase";
    case FamilyKind::monotone_random: return "monotone-random";
  }
  throw std::logic_error("unreachable");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// C1 ramp: 0 below, 1 above, 3t^2-2t^3 across a window of given width.
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}

double smoothstep_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 6.0 * t * (1.0 - t);
}

AnalyticFunction make_random_trig(const SyntheticFamilySpec& spec, std::size_t d) {
  Rng rng(spec.seed, 0, 0x7261746769ull);  // salt: family tag
  const std::size_t m = std::max<std::size_t>(1, spec.modes);
  std::vector<double> amp(m);
  std::vector<std::vector<double>> freq(m, std::vector<double>(d));
  std::vector<std::vector<double>> phase(m, std::vector<double>(d));
  double bound = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    amp[t] = rng.normal() / static_cast<double>(t + 1);
    double k2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      freq[t][i] = static_cast<double>(rng.uniform_index(4));
      phase[t][i] = rng.uniform(0.0, 2.0 * kPi);
      k2 += freq[t][i] * freq[t][i];
    }
    if (k2 == 0.0) {
      freq[t][rng.uniform_index(d)] = 1.0;
      k2 = 1.0;
    }
    bound += std::abs(amp[t]) * kPi * std::sqrt(k2);
  }
  const double scale = (bound > 0.0) ? 0.95 * spec.M / bound : 0.0;
  for (double& a : amp) a *= scale;

  AnalyticFunction F;
  F.d = d;
  F.lipschitz = 0.95 * spec.M;
  F.value = [amp, freq, phase, d](const std::vector<double>& x) {
    double v = 0.0;
    for (std::size_t t = 0; t < amp.size(); ++t) {
      double p = 1.0;
      for (std::size_t i = 0; i < d; ++i) p *= std::cos(kPi * freq[t][i] * x[i] + phase[t][i]);
      v += amp[t] * p;
    }
    return v;
  };
  F.gradient = [amp, freq, phase, d](const std::vector<double>& x) {
    std::vector<double> g(d, 0.0);
    for (std::size_t t = 0; t < amp.size(); ++t) {
      for (std::size_t i = 0; i < d; ++i) {
        double p = -amp[t] * kPi * freq[t][i] * std::sin(kPi * freq[t][i] * x[i] + phase[t][i]);
        for (std::size_t j = 0; j < d; ++j) {
          if (j != i) p *= std::cos(kPi * freq[t][j] * x[j] + phase[t][j]);
        }
        g[i] += p;
      }
    }
    return g;
  };
  return F;
}

AnalyticFunction make_linear_lowerbound(const SyntheticFamilySpec& spec, std::size_t d) {
  if (spec.axis >= d) throw std::invalid_argument("linear_lowerbound axis out of range");
  if (!(spec.eps <= 1.0 && 1.0 <= spec.M)) {
    throw std::invalid_argument("linear_lowerbound requires eps <= 1 <= M");
  }
  const double eps = spec.eps;
  const double slope = spec.M / std::sqrt(static_cast<double>(d));
  const std::size_t axis = spec.axis;
  AnalyticFunction F;
  F.d = d;
  F.lipschitz = std::sqrt(eps * eps + static_cast<double>(d - 1) * slope * slope);
  F.value = [eps, slope, axis, d](const std::vector<double>& x) {
    double v = -eps * x[axis];
    for (std::size_t j = 0; j < d; ++j) {
      if (j != axis) v += slope * x[j];
    }
    return v;
  };
  F.gradient = [eps, slope, axis, d](const std::vector<double>&) {
    std::vector<double> g(d, slope);
    g[axis] = -eps;
    return g;
  };
  return F;
}

AnalyticFunction make_staircase(const SyntheticFamilySpec& spec, std::size_t d) {
  Rng rng(spec.seed, 0, 0x737461697273ull);
  const std::size_t r = std::max<std::size_t>(1, spec.steps);
  const double width = std::max(1e-3, spec.width);
  std::vector<double> dir(d);
  double norm = 0.0;
  for (auto& w : dir) {
    w = rng.uniform(0.2, 1.0);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (auto& w : dir) w /= norm;
  std::vector<double> height(r), loc(r);
  double hsum = 0.0;
  for (std::size_t t = 0; t < r; ++t) {
    height[t] = rng.uniform(0.5, 1.5);
    hsum += height[t];
    loc[t] = rng.uniform(0.15, 0.85) * std::sqrt(static_cast<double>(d));
  }
  // |grad| <= sum_t height_t * 1.5 / width, since |dir|_2 = 1
  const double scale = 0.95 * spec.M * width / (1.5 * hsum);
  const double sgn = (spec.sign < 0.0) ? -1.0 : 1.0;
  for (double& ht : height) ht *= scale * sgn;

  AnalyticFunction F;
  F.d = d;
  F.lipschitz = 0.95 * spec.M;
  F.value = [dir, height, loc, width, d](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += dir[i] * x[i];
    double v = 0.0;
    for (std::size_t t = 0; t < height.size(); ++t) {
      v += height[t] * smoothstep((s - loc[t]) / width);
    }
    return v;
  };
  F.gradient = [dir, height, loc, width, d](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += dir[i] * x[i];
    double dv = 0.0;
    for (std::size_t t = 0; t < height.size(); ++t) {
      dv += height[t] * smoothstep_deriv((s - loc[t]) / width) / width;
    }
    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) g[i] = dv * dir[i];
    return g;
  };
  return F;
}

AnalyticFunction make_monotone_random(const SyntheticFamilySpec& spec, std::size_t d) {
  Rng rng(spec.seed, 0, 0x6d6f6e6f746full);
  const std::size_t r = std::max<std::size_t>(1, spec.steps);
  const double width = std::max(1e-3, spec.width);
  std::vector<double> amp(r);
  std::vector<std::vector<double>> loc(r, std::vector<double>(d));
  double asum = 0.0;
  for (std::size_t t = 0; t < r; ++t) {
    amp[t] = rng.uniform(0.2, 1.0);
    asum += amp[t];
    for (std::size_t i = 0; i < d; ++i) loc[t][i] = rng.uniform(-0.2, 0.8);
  }
  // per-axis slope <= sum_t amp_t * 1.5/width, so |grad|_2 <= that * sqrt(d)
  const double scale = 0.95 * spec.M * width / (1.5 * asum * std::sqrt(static_cast<double>(d)));
  for (double& a : amp) a *= scale;

  AnalyticFunction F;
  F.d = d;
  F.lipschitz = 0.95 * spec.M;
  F.value = [amp, loc, width, d](const std::vector<double>& x) {
    double v = 0.0;
    for (std::size_t t = 0; t < amp.size(); ++t) {
      double p = 1.0;
      for (std::size_t i = 0; i < d; ++i) p *= smoothstep((x[i] - loc[t][i]) / width);
      v += amp[t] * p;
    }
    return v;
  };
  F.gradient = [amp, loc, width, d](const std::vector<double>& x) {
    std::vector<double> g(d, 0.0);
    for (std::size_t t = 0; t < amp.size(); ++t) {
      for (std::size_t i = 0; i < d; ++i) {
        double p = amp[t] * smoothstep_deriv((x[i] - loc[t][i]) / width) / width;
        for (std::size_t j = 0; j < d; ++j) {
          if (j != i) p *= smoothstep((x[j] - loc[t][j]) / width);
        }
        g[i] += p;
      }
    }
    return g;
  };
  return F;
}

GridFunctionND make_random_increment(const SyntheticFamilySpec& spec, std::size_t d,
                                     std::size_t n) {
  Rng rng(spec.seed, 0, 0x696e6372ull);
  const double per_axis = spec.M / std::sqrt(static_cast<double>(d));
  const double h = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> walk(d, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    walk[i][0] = rng.uniform(-0.5, 0.5);
    for (std::size_t j = 1; j < n; ++j) {
      walk[i][j] = walk[i][j - 1] + h * rng.uniform(-per_axis, per_axis);
    }
  }
  const std::size_t total = checked_pow(n, d);
  std::vector<double> v(total, 0.0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    double s = 0.0;
    for (std::size_t k = d; k-- > 0;) {
      s += walk[k][rem % n];
      rem /= n;
    }
    v[c] = s;
  }
  return make_gridnd(d, n, std::move(v));
}

}  // namespace

AnalyticFunction generate_analytic(const SyntheticFamilySpec& spec, std::size_t d) {
  switch (spec.kind) {
    case FamilyKind::random_trig: return make_random_trig(spec, d);
    case FamilyKind::linear_lowerbound: return make_linear_lowerbound(spec, d);
    case FamilyKind::staircase: return make_staircase(spec, d);
    case FamilyKind::monotone_random: return make_monotone_random(spec, d);
    case FamilyKind::random_increment:
      throw std::invalid_argument("random-increment is grid-native and has no analytic form");
  }
  throw std::logic_error("unreachable");
}

GridFunctionND generate(const SyntheticFamilySpec& spec, std::size_t d, std::size_t n) {
  if (spec.kind == FamilyKind::random_increment) {
    return make_random_increment(spec, d, n);
  }
  return sample_to_grid(generate_analytic(spec, d), n);
}

}  // namespace monolab
