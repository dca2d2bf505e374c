#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "monolab/grid.hpp"
#include "monolab/heat.hpp"
#include "monolab/rng.hpp"

using namespace monolab;

namespace {

GridFunction1D random_grid1d(Rng& rng, std::size_t n, double lo = -1.0,
                             double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return make_grid1d(std::move(v));
}

GridFunction1D random_monotone1d(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double acc = rng.uniform(-1.0, 1.0);
  for (auto& x : v) {
    x = acc;
    acc += rng.uniform(0.0, 0.3);
  }
  return make_grid1d(std::move(v));
}

GridFunction1D random_decreasing1d(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double acc = rng.uniform(0.0, 1.0);
  for (auto& x : v) {
    x = acc;
    acc -= rng.uniform(0.01, 0.5);
  }
  return make_grid1d(std::move(v));
}

double l2_dist_h(const GridFunction1D& a, const GridFunction1D& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s * a.h);
}

// h-weighted squared norm of the positive part of a - b.
double pos_part_sq(const GridFunction1D& a, const GridFunction1D& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double d = std::max(0.0, a.values[i] - b.values[i]);
    s += d * d;
  }
  return s * a.h;
}

double prefix_mass(const GridFunction1D& u, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += u.values[i];
  return s * u.h;
}

// Independent oracle for the smallest eigenvalue of the (n-1)-point second
// difference matrix (1/h^2) tridiag(-1, 2, -1) with h = 1/n: Sturm-sequence
// bisection (count of eigenvalues below x via the LDL^T recurrence).
double smallest_dirichlet_eigenvalue(std::size_t n) {
  const std::size_t N = n - 1;
  const double h = 1.0 / static_cast<double>(n);
  const double a = 2.0 / (h * h);
  const double bsq = 1.0 / (h * h * h * h);
  auto count_below = [&](double x) {
    std::size_t cnt = 0;
    double d = a - x;
    if (d < 0.0) ++cnt;
    for (std::size_t i = 1; i < N; ++i) {
      if (d == 0.0) d = -1e-300;
      d = a - x - bsq / d;
      if (d < 0.0) ++cnt;
    }
    return cnt;
  };
  double lo = 0.0, hi = 4.0 / (h * h) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-13 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("explicit step moves half the violating mass on the two cell example") {
  const auto u = make_grid1d({1.0, 0.0});  // h = 1/2, CFL bound dt = 1/8
  const auto v = step_explicit(u, 0.125);
  CHECK(v.values[0] == 0.5);
  CHECK(v.values[1] == 0.5);
}

TEST_CASE("explicit step fixes nondecreasing data exactly") {
  Rng rng(101);
  for (int t = 0; t < 10; ++t) {
    const auto u = random_monotone1d(rng, 2 + rng.uniform_index(30));
    const auto v = step_explicit(u, 0.25 * u.h * u.h);
    for (std::size_t i = 0; i < u.n; ++i) CHECK(v.values[i] == u.values[i]);
  }
}

TEST_CASE("explicit step on strictly decreasing data is the linear heat stencil") {
  Rng rng(102);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 3 + rng.uniform_index(20);
    const auto u = random_decreasing1d(rng, n);
    const double dt = 0.5 * u.h * u.h;
    const auto v = step_explicit(u, dt);
    const double r = dt / (u.h * u.h);
    for (std::size_t i = 0; i < n; ++i) {
      const double up = (i + 1 < n) ? u.values[i + 1] - u.values[i] : 0.0;
      const double dn = (i > 0) ? u.values[i] - u.values[i - 1] : 0.0;
      const double linear = u.values[i] + r * (up - dn);
      CHECK(v.values[i] == doctest::Approx(linear).epsilon(1e-14));
    }
  }
}

TEST_CASE("explicit step rejects bad time steps") {
  const auto u = make_grid1d({1.0, 0.0, 2.0});
  const double cfl = 0.5 * u.h * u.h;
  CHECK_THROWS_AS(step_explicit(u, 1.01 * cfl), std::invalid_argument);
  CHECK_THROWS_AS(step_explicit(u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_explicit(u, -0.1), std::invalid_argument);
  CHECK_NOTHROW(step_explicit(u, cfl));
}

TEST_CASE("implicit step matches the closed form on the two cell example") {
  // For u = (1,0) the minimizer is (1-s, s) with s = 4l/(1+8l): the flux
  // form gives v0 = 1 + 2l*m, v1 = -2l*m with m = 2(v1 - v0) < 0.
  for (double l : {0.01, 0.1, 1.0, 10.0}) {
    const auto u = make_grid1d({1.0, 0.0});
    const auto v = step_implicit(u, l);
    const double s = 4.0 * l / (1.0 + 8.0 * l);
    CHECK(v.values[0] == doctest::Approx(1.0 - s).epsilon(1e-12));
    CHECK(v.values[1] == doctest::Approx(s).epsilon(1e-12));
    CHECK(mass(v) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("implicit step tends to the identity as lambda vanishes") {
  Rng rng(103);
  const auto u = random_grid1d(rng, 16);
  const auto v = step_implicit(u, 1e-8);
  double dist = 0.0;
  for (std::size_t i = 0; i < u.n; ++i) {
    dist = std::max(dist, std::abs(v.values[i] - u.values[i]));
  }
  CHECK(dist <= 1e-5);
  CHECK_THROWS_AS(step_implicit(u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_implicit(u, -1.0), std::invalid_argument);
}

TEST_CASE("implicit step dissipates energy and fixes monotone data bitwise") {
  Rng rng(104);
  for (int t = 0; t < 10; ++t) {
    const auto u = random_grid1d(rng, 24);
    const auto v = step_implicit(u, 0.05);
    CHECK(directed_dirichlet_energy(v) <= directed_dirichlet_energy(u));
    const auto m = random_monotone1d(rng, 24);
    const auto fixed = step_implicit(m, 0.05);
    for (std::size_t i = 0; i < m.n; ++i) CHECK(fixed.values[i] == m.values[i]);
  }
}

TEST_CASE("explicit traces dissipate energy and conserve mass for 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed, 0, 0x68656174);
    const auto u = random_grid1d(rng, 16);
    const auto trace = evolve(u, 0.3, HeatScheme::explicit_flux,
                              0.5 * u.h * u.h);
    REQUIRE(trace.times.size() == trace.states.size());
    REQUIRE(trace.times.size() == trace.energies.size());
    REQUIRE(trace.times.size() == trace.masses.size());
    REQUIRE(trace.times.size() >= 2);
    const double lower = *std::min_element(u.values.begin(), u.values.end());
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      if (k > 0) {
        CHECK(trace.times[k] > trace.times[k - 1]);
        CHECK(trace.energies[k] <= trace.energies[k - 1] + 1e-12);
        for (std::size_t p = 1; p < u.n; ++p) {
          CHECK(prefix_mass(trace.states[k], p) <=
                prefix_mass(trace.states[k - 1], p) + 1e-9);
        }
      }
      CHECK(std::abs(trace.masses[k] - trace.masses[0]) <= 1e-12);
      for (double x : trace.states[k].values) CHECK(x >= lower - 1e-10);
    }
  }
}

TEST_CASE("implicit traces dissipate energy and conserve mass") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, 1, 0x68656174);
    const auto u = random_grid1d(rng, 33);
    const auto trace = evolve(u, 0.4, HeatScheme::implicit_prox, 0.02);
    const double lower = *std::min_element(u.values.begin(), u.values.end());
    for (std::size_t k = 1; k < trace.times.size(); ++k) {
      CHECK(trace.energies[k] <= trace.energies[k - 1] + 1e-9);
      CHECK(std::abs(trace.masses[k] - trace.masses[0]) <= 1e-9);
      for (std::size_t p = 1; p < u.n; ++p) {
        CHECK(prefix_mass(trace.states[k], p) <=
              prefix_mass(trace.states[k - 1], p) + 1e-9);
      }
      for (double x : trace.states[k].values) CHECK(x >= lower - 1e-10);
    }
  }
}

TEST_CASE("the flow is directed nonexpansive between trajectories") {
  Rng rng(105);
  for (int t = 0; t < 8; ++t) {
    const auto u = random_grid1d(rng, 24);
    const auto v = random_grid1d(rng, 24);
    const double base = pos_part_sq(u, v);
    for (auto scheme : {HeatScheme::explicit_flux, HeatScheme::implicit_prox}) {
      const double step = scheme == HeatScheme::explicit_flux
                              ? 0.5 * u.h * u.h
                              : 0.05;
      const auto tu = evolve(u, 0.2, scheme, step);
      const auto tv = evolve(v, 0.2, scheme, step);
      REQUIRE(tu.times.size() == tv.times.size());
      for (std::size_t k = 0; k < tu.times.size(); ++k) {
        CHECK(pos_part_sq(tu.states[k], tv.states[k]) <= base + 1e-8);
      }
    }
  }
}

TEST_CASE("H1 and Lipschitz seminorms decay along the implicit flow") {
  Rng rng(106);
  for (int t = 0; t < 10; ++t) {
    const auto u = random_grid1d(rng, 32);
    const auto trace = evolve(u, 0.5, HeatScheme::implicit_prox, 0.05);
    for (std::size_t k = 1; k < trace.times.size(); ++k) {
      CHECK(h1_seminorm(trace.states[k]) <=
            h1_seminorm(trace.states[k - 1]) + 1e-8);
      CHECK(lipschitz_seminorm(trace.states[k]) <=
            lipschitz_seminorm(trace.states[k - 1]) + 1e-8);
    }
  }
}

TEST_CASE("implicit trajectories converge to the explicit reference") {
  Rng rng(107);
  const double T = 0.1;

  // The two cell example first.
  {
    const auto u = make_grid1d({1.0, 0.0});
    const auto ref = evolve(u, T, HeatScheme::explicit_flux, 0.5 * u.h * u.h);
    double prev = -1.0;
    for (double l : {T / 2.0, T / 4.0, T / 8.0, T / 16.0}) {
      const auto imp = evolve(u, T, HeatScheme::implicit_prox, l);
      const double err = l2_dist_h(imp.states.back(), ref.states.back());
      if (prev >= 0.0) CHECK(err < prev);
      prev = err;
    }
  }

  const auto u = random_grid1d(rng, 48);
  const auto ref = evolve(u, T, HeatScheme::explicit_flux, 0.5 * u.h * u.h);
  std::vector<double> errs;
  for (double l : {T / 4.0, T / 8.0, T / 16.0, T / 32.0}) {
    const auto imp = evolve(u, T, HeatScheme::implicit_prox, l);
    errs.push_back(l2_dist_h(imp.states.back(), ref.states.back()));
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] < errs[k - 1]);
  CHECK(errs.back() <= 0.35 * errs.front() + 1e-14);
}

TEST_CASE("evolve validates its arguments") {
  const auto u = make_grid1d({1.0, 0.0});
  CHECK_THROWS_AS(evolve(u, 0.0, HeatScheme::explicit_flux, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(u, -1.0, HeatScheme::implicit_prox, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(u, 1.0, HeatScheme::explicit_flux, 0.0),
                  std::invalid_argument);
  CHECK(heat_scheme_from_string("explicit") == HeatScheme::explicit_flux);
  CHECK(heat_scheme_from_string("implicit") == HeatScheme::implicit_prox);
  CHECK(to_string(HeatScheme::implicit_prox) == "implicit");
  CHECK_THROWS_AS(heat_scheme_from_string("midpoint"), std::invalid_argument);
}

TEST_CASE("monotone input is already its own equilibrium") {
  Rng rng(108);
  for (int t = 0; t < 10; ++t) {
    const auto u = random_monotone1d(rng, 2 + rng.uniform_index(40));
    const auto res = monotone_equilibrium(u);
    CHECK(res.iterations == 0);
    CHECK_FALSE(res.snapped);
    CHECK(res.residual_energy == 0.0);
    for (std::size_t i = 0; i < u.n; ++i) {
      CHECK(res.equilibrium.values[i] == u.values[i]);
    }
  }
}

TEST_CASE("equilibria are exactly monotone, mass conserving, prefix dominated") {
  for (std::size_t n : {16u, 64u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed, 2, 0x68656174);
      const auto u = random_grid1d(rng, n);
      const auto res = monotone_equilibrium(u);
      CHECK(res.iterations > 0);
      CHECK(res.snapped);
      CHECK(res.residual_energy < 1e-12);
      CHECK(is_monotone(res.equilibrium));
      CHECK(directed_dirichlet_energy(res.equilibrium) == 0.0);
      CHECK(std::abs(mass(res.equilibrium) - mass(u)) <= 1e-9);
      for (std::size_t p = 1; p < n; ++p) {
        CHECK(prefix_mass(res.equilibrium, p) <= prefix_mass(u, p) + 1e-9);
      }
      // Idempotence: the equilibrium is a fixed point of the whole solve.
      const auto again = monotone_equilibrium(res.equilibrium);
      CHECK(again.iterations == 0);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(again.equilibrium.values[i] == res.equilibrium.values[i]);
      }
    }
  }
}

TEST_CASE("the implicit solver converges on fine grids") {
  // lambda/h^2 reaches ~2.6e4 here, which once stalled the Newton stopping
  // test below the floating point noise floor of the residual
  for (std::size_t n : {128u, 256u, 512u}) {
    Rng rng(7, n, 0x66696e65);
    const auto u = random_grid1d(rng, n);
    const auto res = monotone_equilibrium(u);
    CHECK(res.snapped);
    CHECK(is_monotone(res.equilibrium));
    CHECK(std::abs(mass(res.equilibrium) - mass(u)) <= 1e-9);
    const auto single = step_implicit(u, 0.25);
    CHECK(std::abs(mass(single) - mass(u)) <= 1e-9);
  }
}

TEST_CASE("equilibrium commutes with positive affine maps") {
  Rng rng(109);
  for (int t = 0; t < 6; ++t) {
    const auto u = random_grid1d(rng, 32);
    const auto base = monotone_equilibrium(u);
    for (double alpha : {0.5, 2.0}) {
      for (double beta : {-1.0, 3.0}) {
        auto scaled = u;
        for (double& x : scaled.values) x = alpha * x + beta;
        const auto res = monotone_equilibrium(scaled);
        for (std::size_t i = 0; i < u.n; ++i) {
          CHECK(res.equilibrium.values[i] ==
                doctest::Approx(alpha * base.equilibrium.values[i] + beta)
                    .epsilon(1e-7));
        }
      }
    }
  }
}

TEST_CASE("equilibrium preserves pointwise order") {
  Rng rng(110);
  for (int t = 0; t < 8; ++t) {
    const auto u = random_grid1d(rng, 28);
    auto v = u;
    for (double& x : v.values) x += rng.uniform(0.0, 0.5);
    const auto pu = monotone_equilibrium(u);
    const auto pv = monotone_equilibrium(v);
    for (std::size_t i = 0; i < u.n; ++i) {
      CHECK(pu.equilibrium.values[i] <= pv.equilibrium.values[i] + 1e-7);
    }
  }
}

TEST_CASE("equilibrium map is nonexpansive in L2 and sup norm") {
  Rng rng(111);
  for (int t = 0; t < 8; ++t) {
    const auto u = random_grid1d(rng, 24);
    const auto v = random_grid1d(rng, 24);
    const auto pu = monotone_equilibrium(u);
    const auto pv = monotone_equilibrium(v);
    CHECK(l2_dist_h(pu.equilibrium, pv.equilibrium) <=
          l2_dist_h(u, v) + 1e-7);
    double dafter = 0.0, dbefore = 0.0;
    for (std::size_t i = 0; i < u.n; ++i) {
      dafter = std::max(dafter, std::abs(pu.equilibrium.values[i] -
                                         pv.equilibrium.values[i]));
      dbefore = std::max(dbefore, std::abs(u.values[i] - v.values[i]));
    }
    CHECK(dafter <= dbefore + 1e-7);
  }
}

TEST_CASE("equilibrium tolerances must be positive") {
  const auto u = make_grid1d({1.0, 0.0});
  CHECK_THROWS_AS(monotone_equilibrium(u, 0.0, 1e-12), std::invalid_argument);
  CHECK_THROWS_AS(monotone_equilibrium(u, 1e-12, -1.0), std::invalid_argument);
}

TEST_CASE("fitted decay rate matches the slowest mode on the decreasing ramp") {
  const std::size_t n = 32;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 - cell_center(i, n);
  const auto u = make_grid1d(v);
  const auto trace =
      evolve(u, 1.4, HeatScheme::explicit_flux, 0.5 * u.h * u.h);
  const double khat = energy_decay_rate(trace);
  const double ref = spectral_decay_reference(n);
  CHECK(khat == doctest::Approx(ref).epsilon(0.05));
}

TEST_CASE("spectral reference equals the smallest zero boundary eigenvalue") {
  for (std::size_t n : {2u, 3u, 8u, 32u, 100u}) {
    const double oracle = 2.0 * smallest_dirichlet_eigenvalue(n);
    CHECK(spectral_decay_reference(n) ==
          doctest::Approx(oracle).epsilon(1e-10));
  }
  // Large n limit: 2 pi^2.
  const double pi = 3.14159265358979323846264338327950288;
  CHECK(spectral_decay_reference(1000) ==
        doctest::Approx(2.0 * pi * pi).epsilon(1e-5));
  CHECK_THROWS_AS(spectral_decay_reference(1), std::invalid_argument);
}

TEST_CASE("decay rate needs a nondegenerate positive energy window") {
  Rng rng(112);
  const auto u = random_monotone1d(rng, 16);
  const auto trace = evolve(u, 0.1, HeatScheme::explicit_flux, 0.5 * u.h * u.h);
  CHECK_THROWS_AS(energy_decay_rate(trace), std::invalid_argument);
}

TEST_CASE("trace export is deterministic and well formed") {
  Rng rng(113);
  const auto u = random_grid1d(rng, 12);
  const auto trace = evolve(u, 0.2, HeatScheme::explicit_flux, 0.5 * u.h * u.h);
  const auto csv = trace_csv(trace);
  CHECK(csv.rfind("t,energy,mass,min,max\n", 0) == 0);
  const auto rows = static_cast<std::size_t>(
      std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == trace.times.size() + 1);
  CHECK(csv == trace_csv(trace));
}

TEST_CASE("stepping and equilibria are bitwise deterministic") {
  Rng rng(114);
  const auto u = random_grid1d(rng, 40);
  const auto a = step_implicit(u, 0.07);
  const auto b = step_implicit(u, 0.07);
  for (std::size_t i = 0; i < u.n; ++i) CHECK(a.values[i] == b.values[i]);
  const auto ra = monotone_equilibrium(u);
  const auto rb = monotone_equilibrium(u);
  CHECK(ra.iterations == rb.iterations);
  for (std::size_t i = 0; i < u.n; ++i) {
    CHECK(ra.equilibrium.values[i] == rb.equilibrium.values[i]);
  }
}
