#pragma once

#include <monolab/grid.hpp>
#include <monolab/rng.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace monolab {

// Direction sampler: pick a Bernoulli rate uniformly from the geometric
// ladder {1, 1/2, ..., 2^-ceil(log2(4d))}, then flip each coordinate
// independently at that rate. Mixing the scales is what lets one
// distribution catch a negative gradient entry at any sparsity level.

struct DirectionDistribution {
  std::size_t d = 0;
  std::vector<double> ladder;
};

DirectionDistribution make_direction_distribution(std::size_t d);

// One draw from the mixture; entries are 0/1.
std::vector<unsigned char> sample_direction(const DirectionDistribution& dist,
                                            Rng& rng);

// Exact Pr[u . v < threshold] for v from the mixture, by enumeration over
// {0,1}^d bucketed by popcount. Requires d <= 16.
double exact_direction_prob(const std::vector<double>& u, double threshold);

// First-order query access to a function on [0,1]^d with a declared
// Lipschitz budget. Every gradient sample is checked against the budget
// (|g| <= M(1 + 1e-9)); query counts are tracked per instance, so share
// one oracle across threads only with external synchronization.
class OracleFunction {
 public:
  explicit OracleFunction(AnalyticFunction f);

  std::size_t dim() const { return f_.d; }
  double lipschitz_bound() const { return f_.lipschitz; }

  double value(const std::vector<double>& x);
  std::vector<double> gradient(const std::vector<double>& x);

  std::size_t value_queries() const { return value_queries_; }
  std::size_t derivative_queries() const { return derivative_queries_; }

 private:
  friend OracleFunction finite_difference_oracle(const AnalyticFunction& f);

  AnalyticFunction f_;
  // finite-difference mode answers gradient() through 2d value queries
  bool finite_difference_ = false;
  double fd_step_ = 0.0;
  std::size_t value_queries_ = 0;
  std::size_t derivative_queries_ = 0;
};

OracleFunction make_oracle(const AnalyticFunction& f);

// Replaces the gradient with central differences of the value at step
// 1e-6 / M. A demonstration fallback only: acceptance runs use analytic
// gradients throughout. Each gradient call costs 2d value queries.
OracleFunction finite_difference_oracle(const AnalyticFunction& f);

enum class TesterMode { plain, robust };

// Frozen calibration results; see the module tests for the procedure that
// produced them (smallest power-of-two multiplier whose rejection
// frequency clears 2/3 on every corpus member, with margin).
inline constexpr double kCalibratedCIter = 1.0;
inline constexpr double kRobustK = 0.05;

struct TesterConfig {
  std::size_t d = 1;
  double M = 1.0;
  double eps = 0.25;
  // 0 means the default count below
  std::size_t iterations = 0;
  TesterMode mode = TesterMode::plain;
  double K_robust = kRobustK;
  double c_iter = kCalibratedCIter;
};

// ceil(c_iter * sqrt(d) * M^2 * log(d+1) / eps^2), natural log, >= 1
std::size_t default_iterations(std::size_t d, double M, double eps,
                               double c_iter);

struct TesterWitness {
  std::size_t round = 0;
  std::vector<double> x;
  std::vector<unsigned char> v;
  double derivative = 0.0;
};

struct TesterResult {
  bool accepted = true;
  std::size_t iterations_used = 0;
  std::optional<TesterWitness> witness;
};

// Each round samples x uniformly and v from the mixture, then rejects on
// grad f(x) . v < 0 (plain) or < -K eps / d (robust). Never rejects when
// every sampled gradient is coordinatewise nonnegative: the rounds only
// ever add nonnegative terms, so the one-sided guarantee survives
// rounding.
TesterResult run_tester(OracleFunction& oracle, const TesterConfig& cfg,
                        Rng& rng);

// Exact detection probability report for one direction vector u: lhs is
// Pr[u . v < -(delta/d) |u^-|], rhs_shape is |u^-|^2 / (sqrt(d) log(d)
// |u|^2), and implied_c their quotient. With no negative entry the event
// is impossible and the report is flagged trivial. Enumeration, d <= 16.
struct LemmaReport {
  std::vector<double> u;
  double delta = 0.01;
  double lhs = 0.0;
  double rhs_shape = 0.0;
  double implied_c = 0.0;
  bool trivial = false;
};

LemmaReport lemma_check_exact(const std::vector<double>& u,
                              double delta = 0.01);

// Seeded adversarial direction vectors: "random" gaussian entries,
// "spike" one or two negative entries against flat backgrounds at mixed
// scales, "ladder" geometrically decaying magnitudes with random signs
// (at least one negative forced in the structured kinds).
std::vector<std::vector<double>> lemma_corpus(const std::string& kind,
                                              std::size_t d,
                                              std::size_t count,
                                              std::uint64_t seed);

// Minimum implied_c across the nontrivial corpus members; throws if no
// member has a negative entry.
double lemma_implied_constant(const std::vector<std::vector<double>>& corpus,
                              double delta = 0.01);

// The hard family for derivative-pair testers: linear with exactly one
// negative slope -eps on the chosen axis and M/sqrt(d) on the others.
OracleFunction lower_bound_family(std::size_t d, double M, double eps,
                                  std::size_t axis);

// Exact probability over a uniform random axis i that the direction v
// rejects the family member with downhill axis i, i.e. the fraction of i
// with -eps v_i + (M/sqrt(d)) sum_{k != i} v_k < 0. Requires v >= 0.
double pair_test_reject_prob(const std::vector<double>& v, std::size_t d,
                             double M, double eps);

// A far-from-monotone oracle instance: the family spec to instantiate,
// the farness level eps it is certified for on a grid of n_certify cells
// per axis, and the Lipschitz budget M the run should declare.
struct FarOracleSpec {
  SyntheticFamilySpec family;
  std::size_t d = 1;
  std::size_t n_certify = 32;
  double eps = 0.25;
  double M = 1.0;
};

// The frozen calibration corpus: linear, staircase and trigonometric
// members across d in {1, 2, 3, 4, 8}, each certified far by the isotonic
// projection of its grid sample. One c_iter must clear 2/3 rejection on
// every member; no per-member tuning.
std::vector<FarOracleSpec> soundness_corpus();

}  // namespace monolab
