#include "monolab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "compensated.hpp"

namespace monolab {

namespace {

constexpr double kCoordSlack = 1e-12;
constexpr std::size_t kMaxArcs = 4'000'000;

double dist_sq(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double g = a[k] - b[k];
    s += g * g;
  }
  return s;
}

bool leq_coordwise(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k] + kCoordSlack) return false;
  }
  return true;
}

void require_same_space(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.d != nu.d) {
    throw std::invalid_argument("measures live in different dimensions");
  }
  if (mu.size() == 0 || nu.size() == 0) {
    throw std::invalid_argument("measure has no atoms");
  }
}

std::vector<std::size_t> order_by_position(const DiscreteMeasure& m) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&m](std::size_t a, std::size_t b) {
    return m.points[a][0] < m.points[b][0];
  });
  return idx;
}

void validate_plan_shape(const TransportPlan& plan) {
  if (plan.source.d != plan.destination.d) {
    throw std::invalid_argument("plan endpoints live in different dimensions");
  }
  for (const auto& e : plan.entries) {
    if (e.src >= plan.source.size() || e.dst >= plan.destination.size()) {
      throw std::invalid_argument("plan entry references a missing atom");
    }
    if (!(e.mass >= 0.0)) {
      throw std::invalid_argument("plan entry mass must be nonnegative");
    }
  }
}

// Minimum-cost transportation by successive shortest augmenting paths with
// node potentials. Nodes 0..m-1 are supplies, m..m+n-1 demands. The
// potential update pi_v += min(dist_v, dist_target) keeps every residual
// reduced cost nonnegative, so each Dijkstra runs on nonnegative weights.
DirectedOTResult solve_transportation(const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu,
                                      bool directed) {
  require_same_space(mu, nu);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  if (m * n > kMaxArcs) {
    throw std::invalid_argument("transportation problem too large");
  }

  std::vector<std::uint32_t> arc_src, arc_dst;
  std::vector<double> arc_cost, arc_flow;
  std::vector<std::vector<std::uint32_t>> out(m), in(n);
  double cost_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (directed && !leq_coordwise(mu.points[i], nu.points[j])) continue;
      const auto id = static_cast<std::uint32_t>(arc_src.size());
      arc_src.push_back(static_cast<std::uint32_t>(i));
      arc_dst.push_back(static_cast<std::uint32_t>(j));
      arc_cost.push_back(dist_sq(mu.points[i], nu.points[j]));
      arc_flow.push_back(0.0);
      cost_scale = std::max(cost_scale, arc_cost.back());
      out[i].push_back(id);
      in[j].push_back(id);
    }
  }

  // Normalizing both sides by their exact totals shrinks the supply/demand
  // imbalance to rounding dust, well below the activity thresholds.
  std::vector<double> supply_rem = mu.masses;
  std::vector<double> demand_rem = nu.masses;
  {
    const double s = detail::compensated_sum(supply_rem);
    const double t = detail::compensated_sum(demand_rem);
    if (!(s > 0.0) || !(t > 0.0)) {
      throw std::invalid_argument("measure carries no mass");
    }
    for (auto& x : supply_rem) x /= s;
    for (auto& x : demand_rem) x /= t;
  }

  // A supply counts as unserved above 1e-11; a demand can still absorb mass
  // above 1e-12. Keeping the demand threshold strictly smaller means rounding
  // dust can never strand an active supply in a feasible problem.
  constexpr double kSupplyEps = 1e-11;
  constexpr double kDemandEps = 1e-12;

  const std::size_t V = m + n;
  constexpr std::uint32_t kNoArc = std::numeric_limits<std::uint32_t>::max();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pi(V, 0.0), dist(V);
  std::vector<std::uint32_t> parc(V);
  std::vector<unsigned char> pfwd(V);
  using QItem = std::pair<double, std::size_t>;
  const std::size_t iter_cap = 8 * (m + n) + 100;

  DirectedOTResult result;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > iter_cap) {
      throw std::runtime_error("augmenting path count exceeded its bound");
    }
    bool any_active = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (supply_rem[i] > kSupplyEps) {
        any_active = true;
        break;
      }
    }
    if (!any_active) {
      result.status = OTStatus::optimal;
      break;
    }

    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parc.begin(), parc.end(), kNoArc);
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
    for (std::size_t i = 0; i < m; ++i) {
      if (supply_rem[i] > kSupplyEps) {
        dist[i] = 0.0;
        pq.emplace(0.0, i);
      }
    }
    std::size_t target = V;
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > dist[u]) continue;
      if (u >= m && demand_rem[u - m] > kDemandEps) {
        target = u;
        break;
      }
      if (u < m) {
        for (const auto a : out[u]) {
          const std::size_t v = m + arc_dst[a];
          double w = arc_cost[a] + pi[u] - pi[v];
          if (w < -1e-7 * cost_scale) {
            throw std::logic_error("negative reduced cost on a forward arc");
          }
          w = std::max(w, 0.0);
          if (du + w < dist[v]) {
            dist[v] = du + w;
            parc[v] = a;
            pfwd[v] = 1;
            pq.emplace(dist[v], v);
          }
        }
      } else {
        for (const auto a : in[u - m]) {
          if (!(arc_flow[a] > 0.0)) continue;
          const std::size_t v = arc_src[a];
          double w = -arc_cost[a] + pi[u] - pi[v];
          if (w < -1e-7 * cost_scale) {
            throw std::logic_error("negative reduced cost on a residual arc");
          }
          w = std::max(w, 0.0);
          if (du + w < dist[v]) {
            dist[v] = du + w;
            parc[v] = a;
            pfwd[v] = 0;
            pq.emplace(dist[v], v);
          }
        }
      }
    }
    if (target == V) {
      result.status = OTStatus::infeasible;
      result.value = 0.0;
      result.plan.reset();
      return result;
    }

    const double D = dist[target];
    for (std::size_t v = 0; v < V; ++v) {
      pi[v] += std::min(dist[v], D);
    }

    double delta = demand_rem[target - m];
    std::vector<std::pair<std::uint32_t, int>> path;
    std::size_t v = target;
    std::size_t start = V;
    while (true) {
      const auto a = parc[v];
      if (pfwd[v]) {
        path.emplace_back(a, +1);
        v = arc_src[a];
        if (parc[v] == kNoArc) {
          start = v;
          delta = std::min(delta, supply_rem[v]);
          break;
        }
      } else {
        path.emplace_back(a, -1);
        delta = std::min(delta, arc_flow[a]);
        v = m + arc_dst[a];
      }
    }
    for (const auto& [a, dir] : path) {
      if (dir > 0) {
        arc_flow[a] += delta;
      } else {
        arc_flow[a] = std::max(0.0, arc_flow[a] - delta);
      }
    }
    supply_rem[start] = std::max(0.0, supply_rem[start] - delta);
    demand_rem[target - m] = std::max(0.0, demand_rem[target - m] - delta);
  }

  // Reduced-cost optimality certificate: every arc has nonnegative reduced
  // cost and every arc carrying flow has reduced cost zero.
  const double cert_tol = 1e-7 * cost_scale;
  for (std::size_t a = 0; a < arc_src.size(); ++a) {
    const double rc = arc_cost[a] + pi[arc_src[a]] - pi[m + arc_dst[a]];
    if (rc < -cert_tol) {
      throw std::logic_error("optimality certificate: dual infeasibility");
    }
    if (arc_flow[a] > 1e-12 && std::abs(rc) > cert_tol) {
      throw std::logic_error("optimality certificate: slackness violation");
    }
  }

  detail::CompensatedAccumulator cost;
  TransportPlan plan;
  plan.source = mu;
  plan.destination = nu;
  for (std::size_t a = 0; a < arc_src.size(); ++a) {
    if (arc_flow[a] > 1e-15) {
      cost.add(arc_flow[a] * arc_cost[a]);
      plan.entries.push_back(PlanEntry{arc_src[a], arc_dst[a], arc_flow[a]});
    }
  }
  result.value = cost.total();
  result.plan = std::move(plan);
  return result;
}

nlohmann::json measure_json(const DiscreteMeasure& m) {
  nlohmann::json j;
  j["d"] = m.d;
  j["points"] = m.points;
  j["masses"] = m.masses;
  return j;
}

DiscreteMeasure measure_from_json_obj(const nlohmann::json& j) {
  return make_measure(j.at("d").get<std::size_t>(),
                      j.at("points").get<std::vector<std::vector<double>>>(),
                      j.at("masses").get<std::vector<double>>());
}

}  // namespace

DiscreteMeasure make_measure(std::size_t d,
                             std::vector<std::vector<double>> points,
                             std::vector<double> masses) {
  if (d == 0) throw std::invalid_argument("measure needs d >= 1");
  if (points.size() != masses.size()) {
    throw std::invalid_argument("points and masses differ in length");
  }
  if (points.empty()) throw std::invalid_argument("measure has no atoms");
  for (const auto& p : points) {
    if (p.size() != d) {
      throw std::invalid_argument("point dimension mismatch");
    }
    for (const double x : p) {
      if (!(x >= -kCoordSlack && x <= 1.0 + kCoordSlack)) {
        throw std::invalid_argument("atom outside the unit cube");
      }
    }
  }
  for (const double w : masses) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative atom mass");
  }
  const double total = detail::compensated_sum(masses);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("atom masses must sum to one");
  }
  DiscreteMeasure m;
  m.d = d;
  m.points = std::move(points);
  m.masses = std::move(masses);
  return m;
}

DiscreteMeasure measure_from_grid(const GridFunction1D& u) {
  GridFunctionND f;
  f.d = 1;
  f.n = u.n;
  f.h = u.h;
  f.values = u.values;
  return measure_from_grid(f);
}

DiscreteMeasure measure_from_grid(const GridFunctionND& f) {
  for (const double v : f.values) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("grid function must be nonnegative");
    }
  }
  const double total = detail::compensated_sum(f.values);
  if (!(total > 0.0)) {
    throw std::invalid_argument("grid function must carry positive mass");
  }
  std::vector<std::vector<double>> points;
  std::vector<double> masses;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.values[i] == 0.0) continue;
    points.push_back(cell_center_nd(i, f.d, f.n));
    masses.push_back(f.values[i] / total);
  }
  // One compensated correction on the heaviest atom makes the normalized
  // masses sum to one to machine precision even for large grids.
  const double s = detail::compensated_sum(masses);
  const auto big = std::max_element(masses.begin(), masses.end());
  *big -= s - 1.0;
  return make_measure(f.d, std::move(points), std::move(masses));
}

double plan_marginal_residual(const TransportPlan& plan) {
  validate_plan_shape(plan);
  std::vector<detail::CompensatedAccumulator> row(plan.source.size());
  std::vector<detail::CompensatedAccumulator> col(plan.destination.size());
  for (const auto& e : plan.entries) {
    row[e.src].add(e.mass);
    col[e.dst].add(e.mass);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    worst = std::max(worst, std::abs(row[i].total() - plan.source.masses[i]));
  }
  for (std::size_t j = 0; j < col.size(); ++j) {
    worst =
        std::max(worst, std::abs(col[j].total() - plan.destination.masses[j]));
  }
  return worst;
}

double plan_cost(const TransportPlan& plan, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("plan_cost needs p >= 1");
  validate_plan_shape(plan);
  detail::CompensatedAccumulator acc;
  for (const auto& e : plan.entries) {
    const double d2 =
        dist_sq(plan.source.points[e.src], plan.destination.points[e.dst]);
    acc.add(e.mass * std::pow(std::sqrt(d2), p));
  }
  return std::pow(acc.total(), 1.0 / p);
}

double w2_1d_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  if (mu.d != 1) {
    throw std::invalid_argument("quantile distance needs d = 1");
  }
  const auto si = order_by_position(mu);
  const auto sj = order_by_position(nu);
  detail::CompensatedAccumulator cost;
  std::size_t i = 0, j = 0;
  double remi = mu.masses[si[0]];
  double remj = nu.masses[sj[0]];
  while (i < si.size() && j < sj.size()) {
    const double gap = mu.points[si[i]][0] - nu.points[sj[j]][0];
    if (remi <= remj) {
      cost.add(remi * gap * gap);
      remj -= remi;
      if (++i < si.size()) remi = mu.masses[si[i]];
    } else {
      cost.add(remj * gap * gap);
      remi -= remj;
      if (++j < sj.size()) remj = nu.masses[sj[j]];
    }
  }
  return cost.total();
}

bool dominates(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  if (mu.d != 1) throw std::invalid_argument("domination needs d = 1");
  const auto si = order_by_position(mu);
  const auto sj = order_by_position(nu);
  std::vector<double> merged;
  merged.reserve(si.size() + sj.size());
  for (const auto k : si) merged.push_back(mu.points[k][0]);
  for (const auto k : sj) merged.push_back(nu.points[k][0]);
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  // mu sits weakly to the left of nu iff the inclusive CDF of mu is at least
  // that of nu at every atom of either measure.
  detail::CompensatedAccumulator cum_mu, cum_nu;
  std::size_t i = 0, j = 0;
  for (const double x : merged) {
    while (i < si.size() && mu.points[si[i]][0] <= x) {
      cum_mu.add(mu.masses[si[i]]);
      ++i;
    }
    while (j < sj.size() && nu.points[sj[j]][0] <= x) {
      cum_nu.add(nu.masses[sj[j]]);
      ++j;
    }
    if (cum_mu.total() < cum_nu.total() - 1e-12) return false;
  }
  return true;
}

DirectedOTResult directed_w2_lp(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu) {
  return solve_transportation(mu, nu, true);
}

DirectedOTResult undirected_w2_lp(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  auto res = solve_transportation(mu, nu, false);
  if (res.status != OTStatus::optimal) {
    throw std::logic_error("unrestricted transportation must be feasible");
  }
  return res;
}

TransportPlan compose_plans(const TransportPlan& up, const TransportPlan& down) {
  validate_plan_shape(up);
  validate_plan_shape(down);
  const auto& mid_a = up.destination;
  const auto& mid_b = down.source;
  if (mid_a.d != mid_b.d || mid_a.size() != mid_b.size()) {
    throw std::invalid_argument("intermediate measures do not match");
  }
  for (std::size_t k = 0; k < mid_a.size(); ++k) {
    for (std::size_t c = 0; c < mid_a.d; ++c) {
      if (std::abs(mid_a.points[k][c] - mid_b.points[k][c]) > 1e-10) {
        throw std::invalid_argument("intermediate atoms disagree in position");
      }
    }
    if (std::abs(mid_a.masses[k] - mid_b.masses[k]) > 1e-10) {
      throw std::invalid_argument("intermediate atoms disagree in mass");
    }
  }

  std::vector<std::vector<const PlanEntry*>> outgoing(mid_b.size());
  std::vector<detail::CompensatedAccumulator> out_sum(mid_b.size());
  for (const auto& e : down.entries) {
    outgoing[e.src].push_back(&e);
    out_sum[e.src].add(e.mass);
  }

  std::map<std::pair<std::size_t, std::size_t>, double> glued;
  for (const auto& e : up.entries) {
    if (e.mass == 0.0) continue;
    const double rho = out_sum[e.dst].total();
    if (!(rho > 0.0)) {
      if (e.mass > 1e-10) {
        throw std::invalid_argument(
            "intermediate atom receives mass but sends none");
      }
      continue;
    }
    for (const PlanEntry* f : outgoing[e.dst]) {
      glued[{e.src, f->dst}] += e.mass * (f->mass / rho);
    }
  }

  TransportPlan composed;
  composed.source = up.source;
  composed.destination = down.destination;
  for (const auto& [key, mass] : glued) {
    if (mass > 0.0) {
      composed.entries.push_back(PlanEntry{key.first, key.second, mass});
    }
  }
  const double resid = plan_marginal_residual(composed);
  if (resid > 1e-9) {
    throw std::logic_error("glued plan fails to reproduce its marginals");
  }
  return composed;
}

bool check_aligned(const TransportPlan& plan,
                   const std::vector<std::size_t>& axes) {
  validate_plan_shape(plan);
  std::vector<bool> moving(plan.source.d, false);
  for (const auto a : axes) {
    if (a >= plan.source.d) throw std::invalid_argument("axis out of range");
    moving[a] = true;
  }
  for (const auto& e : plan.entries) {
    const auto& ps = plan.source.points[e.src];
    const auto& pd = plan.destination.points[e.dst];
    for (std::size_t c = 0; c < plan.source.d; ++c) {
      if (!moving[c] && std::abs(ps[c] - pd[c]) > kCoordSlack) return false;
    }
  }
  return true;
}

std::string measure_to_json(const DiscreteMeasure& m) {
  return measure_json(m).dump();
}

DiscreteMeasure measure_from_json(const std::string& text) {
  return measure_from_json_obj(nlohmann::json::parse(text));
}

std::string plan_to_json(const TransportPlan& plan) {
  validate_plan_shape(plan);
  nlohmann::json j;
  j["source"] = measure_json(plan.source);
  j["destination"] = measure_json(plan.destination);
  auto entries = nlohmann::json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({e.src, e.dst, e.mass});
  }
  j["entries"] = std::move(entries);
  return j.dump();
}

TransportPlan plan_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TransportPlan plan;
  plan.source = measure_from_json_obj(j.at("source"));
  plan.destination = measure_from_json_obj(j.at("destination"));
  for (const auto& row : j.at("entries")) {
    if (!row.is_array() || row.size() != 3) {
      throw std::invalid_argument("plan entry must be [src, dst, mass]");
    }
    plan.entries.push_back(PlanEntry{row.at(0).get<std::size_t>(),
                                     row.at(1).get<std::size_t>(),
                                     row.at(2).get<double>()});
  }
  validate_plan_shape(plan);
  if (plan_marginal_residual(plan) > 1e-10) {
    throw std::invalid_argument("plan entries do not match the marginals");
  }
  return plan;
}

}  // namespace monolab
