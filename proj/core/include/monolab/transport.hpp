#pragma once

#include <monolab/grid.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace monolab {

// Atomic probability measure on [0,1]^d: masses are nonnegative and sum to 1
// within 1e-12. Zero-mass atoms are allowed but carry no constraints.
struct DiscreteMeasure {
  std::size_t d = 0;
  std::vector<std::vector<double>> points;
  std::vector<double> masses;

  std::size_t size() const { return points.size(); }
};

// Validates and builds a measure; throws std::invalid_argument on shape
// mismatch, negative mass, coordinates outside [0,1], or total mass != 1.
DiscreteMeasure make_measure(std::size_t d,
                             std::vector<std::vector<double>> points,
                             std::vector<double> masses);

// Atoms at cell centers with mass proportional to the cell value. Requires
// f >= 0 with positive total; zero cells contribute no atom.
DiscreteMeasure measure_from_grid(const GridFunction1D& u);
DiscreteMeasure measure_from_grid(const GridFunctionND& f);

struct PlanEntry {
  std::size_t src = 0;
  std::size_t dst = 0;
  double mass = 0.0;
};

// Coupling between two atomic measures. Entries have positive mass; row sums
// reproduce the source masses and column sums the destination masses within
// 1e-10 (see plan_marginal_residual).
struct TransportPlan {
  DiscreteMeasure source;
  DiscreteMeasure destination;
  std::vector<PlanEntry> entries;
};

// Largest deviation of a row or column sum from its marginal mass.
double plan_marginal_residual(const TransportPlan& plan);

// C_p cost: (sum over entries of mass * |x - y|^p)^(1/p), p >= 1.
double plan_cost(const TransportPlan& plan, double p);

enum class OTStatus { optimal, infeasible };

struct DirectedOTResult {
  OTStatus status = OTStatus::infeasible;
  // Optimal transportation cost sum mass * |x-y|^2, i.e. the squared
  // 2-Wasserstein value. Meaningful only when status == optimal; an
  // infeasible problem is reported through the status, never through a
  // sentinel value.
  double value = 0.0;
  std::optional<TransportPlan> plan;
};

// Squared 2-Wasserstein distance between measures on [0,1] (d = 1), exact
// for atomic measures: the monotone matching integrates the squared gap of
// the inverse CDFs over the merged quantile partition.
double w2_1d_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// True when mu(-inf, x) >= nu(-inf, x) for every x (all the mass of mu sits
// at or below that of nu), checked at the merged atom positions with slack
// 1e-12. Requires d = 1.
bool dominates(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Minimum-cost transportation over the order-restricted arc set
// {(i,j) : p_i <= q_j coordinatewise within 1e-12}, arc cost |p_i - q_j|^2.
// Solved by successive shortest augmenting paths with node potentials; the
// returned optimum carries a reduced-cost optimality certificate (checked
// internally). No directed plan exists iff status is infeasible.
DirectedOTResult directed_w2_lp(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu);

// Same problem over all arcs; always feasible, status always optimal.
DirectedOTResult undirected_w2_lp(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu);

// Glue a plan mu -> rho with a plan rho -> nu into a plan mu -> nu by
// splitting each intermediate atom's incoming mass across its outgoing arcs
// proportionally. The middle measures must agree within 1e-10 atom by atom;
// the result's marginals are verified before it is returned.
TransportPlan compose_plans(const TransportPlan& up, const TransportPlan& down);

// True when every entry's source and destination agree within 1e-12 on all
// coordinates outside `axes` (mass moves only along the named axes).
bool check_aligned(const TransportPlan& plan,
                   const std::vector<std::size_t>& axes);

// JSON forms: {"d":..., "points":[[...]], "masses":[...]} for measures and
// {"source":..., "destination":..., "entries":[[src,dst,mass],...]} for
// plans. Parsing validates like make_measure / plan_marginal_residual.
std::string measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const std::string& text);
std::string plan_to_json(const TransportPlan& plan);
TransportPlan plan_from_json(const std::string& text);

}  // namespace monolab
