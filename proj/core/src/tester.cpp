#include "monolab/tester.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace monolab {

namespace {

constexpr std::size_t kEnumCap = 16;

void require_direction_dim(std::size_t d, const char* who) {
  if (d == 0) {
    throw std::invalid_argument(std::string(who) + ": d must be positive");
  }
}

}  // namespace

DirectionDistribution make_direction_distribution(std::size_t d) {
  require_direction_dim(d, "make_direction_distribution");
  std::size_t levels = 0;
  while ((std::size_t{1} << levels) < 4 * d) ++levels;
  DirectionDistribution dist;
  dist.d = d;
  dist.ladder.resize(levels + 1);
  for (std::size_t j = 0; j <= levels; ++j) {
    dist.ladder[j] = std::ldexp(1.0, -static_cast<int>(j));
  }
  return dist;
}

std::vector<unsigned char> sample_direction(const DirectionDistribution& dist,
                                            Rng& rng) {
  const double p = dist.ladder[rng.uniform_index(dist.ladder.size())];
  std::vector<unsigned char> v(dist.d);
  for (auto& b : v) b = rng.bernoulli(p) ? 1 : 0;
  return v;
}

double exact_direction_prob(const std::vector<double>& u, double threshold) {
  const std::size_t d = u.size();
  require_direction_dim(d, "exact_direction_prob");
  if (d > kEnumCap) {
    throw std::invalid_argument(
        "exact_direction_prob: enumeration capped at d = 16");
  }
  // the Bernoulli weight of a mask depends only on its popcount, so count
  // qualifying masks per popcount and weight the buckets afterwards
  std::vector<double> bucket(d + 1, 0.0);
  const std::size_t masks = std::size_t{1} << d;
  for (std::size_t m = 0; m < masks; ++m) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (m & (std::size_t{1} << i)) dot += u[i];
    }
    if (dot < threshold) {
      bucket[static_cast<std::size_t>(std::popcount(m))] += 1.0;
    }
  }
  const auto dist = make_direction_distribution(d);
  double prob = 0.0;
  for (const double p : dist.ladder) {
    std::vector<double> pk(d + 1), qk(d + 1);
    pk[0] = qk[0] = 1.0;
    for (std::size_t k = 1; k <= d; ++k) {
      pk[k] = pk[k - 1] * p;
      qk[k] = qk[k - 1] * (1.0 - p);
    }
    double level = 0.0;
    for (std::size_t k = 0; k <= d; ++k) {
      if (bucket[k] != 0.0) level += bucket[k] * pk[k] * qk[d - k];
    }
    prob += level;
  }
  return prob / static_cast<double>(dist.ladder.size());
}

OracleFunction::OracleFunction(AnalyticFunction f) : f_(std::move(f)) {
  if (f_.d == 0) {
    throw std::invalid_argument("OracleFunction: zero-dimensional function");
  }
  if (!f_.value) {
    throw std::invalid_argument("OracleFunction: no value function");
  }
  if (!(f_.lipschitz >= 0.0) || !std::isfinite(f_.lipschitz)) {
    throw std::invalid_argument("OracleFunction: bad Lipschitz bound");
  }
}

double OracleFunction::value(const std::vector<double>& x) {
  if (x.size() != f_.d) {
    throw std::invalid_argument("OracleFunction::value: dimension mismatch");
  }
  ++value_queries_;
  return f_.value(x);
}

std::vector<double> OracleFunction::gradient(const std::vector<double>& x) {
  if (x.size() != f_.d) {
    throw std::invalid_argument(
        "OracleFunction::gradient: dimension mismatch");
  }
  std::vector<double> g;
  if (finite_difference_) {
    g.resize(f_.d);
    auto probe = x;
    for (std::size_t i = 0; i < f_.d; ++i) {
      probe[i] = x[i] + fd_step_;
      const double hi = value(probe);
      probe[i] = x[i] - fd_step_;
      const double lo = value(probe);
      probe[i] = x[i];
      g[i] = (hi - lo) / (2.0 * fd_step_);
    }
  } else {
    if (!f_.gradient) {
      throw std::runtime_error(
          "OracleFunction::gradient: no analytic gradient and finite "
          "differences not enabled");
    }
    ++derivative_queries_;
    g = f_.gradient(x);
  }
  double norm_sq = 0.0;
  for (const double gi : g) norm_sq += gi * gi;
  const double cap = f_.lipschitz * (1.0 + 1e-9);
  if (norm_sq > cap * cap) {
    throw std::logic_error(
        "OracleFunction::gradient: sample exceeds the declared Lipschitz "
        "bound");
  }
  return g;
}

OracleFunction make_oracle(const AnalyticFunction& f) {
  return OracleFunction(f);
}

OracleFunction finite_difference_oracle(const AnalyticFunction& f) {
  OracleFunction oracle(f);
  oracle.finite_difference_ = true;
  const double m = (f.lipschitz > 0.0) ? f.lipschitz : 1.0;
  oracle.fd_step_ = 1e-6 / m;
  return oracle;
}

std::size_t default_iterations(std::size_t d, double M, double eps,
                               double c_iter) {
  require_direction_dim(d, "default_iterations");
  if (!(M > 0.0) || !(eps > 0.0) || !(c_iter > 0.0)) {
    throw std::invalid_argument(
        "default_iterations: M, eps, c_iter must be positive");
  }
  const double raw = c_iter * std::sqrt(static_cast<double>(d)) * M * M *
                     std::log(static_cast<double>(d) + 1.0) / (eps * eps);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(raw)));
}

TesterResult run_tester(OracleFunction& oracle, const TesterConfig& cfg,
                        Rng& rng) {
  if (oracle.dim() != cfg.d) {
    throw std::invalid_argument("run_tester: oracle dimension mismatch");
  }
  if (!(cfg.eps > 0.0) || !(cfg.M > 0.0)) {
    throw std::invalid_argument("run_tester: eps and M must be positive");
  }
  const std::size_t rounds =
      cfg.iterations > 0
          ? cfg.iterations
          : default_iterations(cfg.d, cfg.M, cfg.eps, cfg.c_iter);
  const double threshold =
      cfg.mode == TesterMode::plain
          ? 0.0
          : -cfg.K_robust * cfg.eps / static_cast<double>(cfg.d);
  const auto dist = make_direction_distribution(cfg.d);

  std::vector<double> x(cfg.d);
  TesterResult res;
  for (std::size_t round = 0; round < rounds; ++round) {
    for (auto& xi : x) xi = rng.uniform01();
    const auto v = sample_direction(dist, rng);
    const auto g = oracle.gradient(x);
    double dot = 0.0;
    for (std::size_t i = 0; i < cfg.d; ++i) {
      if (v[i]) dot += g[i];
    }
    if (dot < threshold) {
      res.accepted = false;
      res.iterations_used = round + 1;
      res.witness = TesterWitness{round, x, v, dot};
      return res;
    }
  }
  res.accepted = true;
  res.iterations_used = rounds;
  return res;
}

LemmaReport lemma_check_exact(const std::vector<double>& u, double delta) {
  const std::size_t d = u.size();
  require_direction_dim(d, "lemma_check_exact");
  if (d > kEnumCap) {
    throw std::invalid_argument("lemma_check_exact: enumeration capped at "
                                "d = 16; larger d is refused rather than "
                                "silently approximated");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("lemma_check_exact: delta must be positive");
  }
  double neg_sq = 0.0, all_sq = 0.0;
  for (const double ui : u) {
    all_sq += ui * ui;
    if (ui < 0.0) neg_sq += ui * ui;
  }
  if (all_sq == 0.0) {
    throw std::invalid_argument("lemma_check_exact: u must be nonzero");
  }

  LemmaReport report;
  report.u = u;
  report.delta = delta;
  if (neg_sq == 0.0) {
    // nonnegative u: the event u . v < 0 is impossible and the shape is 0
    report.trivial = true;
    return report;
  }
  const double neg_norm = std::sqrt(neg_sq);
  const double threshold = -(delta / static_cast<double>(d)) * neg_norm;
  report.lhs = exact_direction_prob(u, threshold);
  report.rhs_shape =
      neg_sq / (std::sqrt(static_cast<double>(d)) *
                std::log(static_cast<double>(d)) * all_sq);
  report.implied_c = report.lhs / report.rhs_shape;
  return report;
}

std::vector<std::vector<double>> lemma_corpus(const std::string& kind,
                                              std::size_t d,
                                              std::size_t count,
                                              std::uint64_t seed) {
  require_direction_dim(d, "lemma_corpus");
  if (count == 0) {
    throw std::invalid_argument("lemma_corpus: count must be positive");
  }
  std::vector<std::vector<double>> corpus;
  corpus.reserve(count);
  if (kind == "random") {
    for (std::size_t t = 0; t < count; ++t) {
      Rng rng(seed, t, 0x72616e64ull);
      std::vector<double> u(d);
      for (auto& ui : u) ui = rng.normal();
      corpus.push_back(std::move(u));
    }
  } else if (kind == "spike") {
    // one or two negative spikes against positive backgrounds whose two
    // halves may sit at different scales
    for (std::size_t t = 0; t < count; ++t) {
      Rng rng(seed, t, 0x7370696bull);
      const double bg_lo = std::pow(10.0, rng.uniform(-3.0, 0.0));
      const double bg_hi = std::pow(10.0, rng.uniform(-3.0, 0.0));
      std::vector<double> u(d);
      for (std::size_t i = 0; i < d; ++i) {
        u[i] = (i < d / 2) ? bg_lo : bg_hi;
      }
      u[rng.uniform_index(d)] = -std::pow(10.0, rng.uniform(-3.0, 0.0));
      if (d > 1 && rng.bernoulli(0.5)) {
        u[rng.uniform_index(d)] = -std::pow(10.0, rng.uniform(-3.0, 0.0));
      }
      corpus.push_back(std::move(u));
    }
  } else if (kind == "ladder") {
    // geometric magnitude decay with random signs
    for (std::size_t t = 0; t < count; ++t) {
      Rng rng(seed, t, 0x6c616464ull);
      const double ratio = rng.uniform(0.3, 0.8);
      std::vector<double> u(d);
      double mag = 1.0;
      bool any_negative = false;
      for (std::size_t i = 0; i < d; ++i) {
        const bool negative = rng.bernoulli(0.5);
        any_negative = any_negative || negative;
        u[i] = negative ? -mag : mag;
        mag *= ratio;
      }
      if (!any_negative) u[rng.uniform_index(d)] *= -1.0;
      corpus.push_back(std::move(u));
    }
  } else {
    throw std::invalid_argument("lemma_corpus: kind must be one of "
                                "random, spike, ladder");
  }
  return corpus;
}

double lemma_implied_constant(const std::vector<std::vector<double>>& corpus,
                              double delta) {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& u : corpus) {
    const auto report = lemma_check_exact(u, delta);
    if (report.trivial) continue;
    any = true;
    best = std::min(best, report.implied_c);
  }
  if (!any) {
    throw std::invalid_argument(
        "lemma_implied_constant: corpus has no vector with a negative entry");
  }
  return best;
}

OracleFunction lower_bound_family(std::size_t d, double M, double eps,
                                  std::size_t axis) {
  SyntheticFamilySpec spec;
  spec.kind = FamilyKind::linear_lowerbound;
  spec.M = M;
  spec.eps = eps;
  spec.axis = axis;
  return make_oracle(generate_analytic(spec, d));
}

double pair_test_reject_prob(const std::vector<double>& v, std::size_t d,
                             double M, double eps) {
  if (v.size() != d) {
    throw std::invalid_argument("pair_test_reject_prob: dimension mismatch");
  }
  if (!(M > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument(
        "pair_test_reject_prob: M and eps must be positive");
  }
  double sum = 0.0;
  for (const double vi : v) {
    if (!(vi >= 0.0)) {
      throw std::invalid_argument(
          "pair_test_reject_prob: v must be coordinatewise nonnegative");
    }
    sum += vi;
  }
  const double slope = M / std::sqrt(static_cast<double>(d));
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (-eps * v[i] + slope * (sum - v[i]) < 0.0) ++rejected;
  }
  return static_cast<double>(rejected) / static_cast<double>(d);
}

std::vector<FarOracleSpec> soundness_corpus() {
  std::vector<FarOracleSpec> corpus;
  auto add = [&corpus](FamilyKind kind, std::size_t d, std::size_t n,
                       double eps, std::uint64_t seed, std::size_t axis) {
    FarOracleSpec member;
    member.family.kind = kind;
    member.family.M = 1.0;
    member.family.seed = seed;
    member.family.axis = axis;
    if (kind == FamilyKind::linear_lowerbound) member.family.eps = 0.9;
    if (kind == FamilyKind::staircase) member.family.sign = -1.0;
    member.d = d;
    member.n_certify = n;
    member.eps = eps;
    member.M = generate_analytic(member.family, d).lipschitz;
    corpus.push_back(std::move(member));
  };
  add(FamilyKind::linear_lowerbound, 1, 32, 0.25, 0, 0);
  add(FamilyKind::linear_lowerbound, 2, 32, 0.25, 0, 1);
  add(FamilyKind::linear_lowerbound, 4, 8, 0.25, 0, 2);
  add(FamilyKind::linear_lowerbound, 8, 3, 0.2, 0, 5);
  add(FamilyKind::staircase, 2, 32, 0.1, 101, 0);
  add(FamilyKind::staircase, 3, 16, 0.1, 102, 0);
  add(FamilyKind::random_trig, 2, 32, 0.1, 103, 0);
  add(FamilyKind::random_trig, 4, 8, 0.05, 104, 0);
  return corpus;
}

}  // namespace monolab
