#include "monolab/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace monolab {

namespace {

struct Block {
  double sum = 0.0;     // weighted value sum
  double weight = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

}  // namespace

std::vector<double> pava_1d(const std::vector<double>& values,
                            const std::vector<double>& weights) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("pava_1d: values/weights size mismatch");
  }
  if (values.empty()) return {};
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("pava_1d: weights must be positive");
  }
  std::vector<Block> stack;
  stack.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    Block b{values[i] * weights[i], weights[i], values[i], 1};
    stack.push_back(b);
    while (stack.size() >= 2 && stack[stack.size() - 2].mean > stack.back().mean) {
      Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      prev.sum += top.sum;
      prev.weight += top.weight;
      prev.count += top.count;
      prev.mean = prev.sum / prev.weight;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : stack) {
    for (std::size_t i = 0; i < b.count; ++i) out.push_back(b.mean);
  }
  return out;
}

namespace {

// Makes x exactly monotone along every axis by one lexicographic pass
// that lifts each cell to the max of its predecessors. Only absorbs the
// sub-tolerance violations left by the iterative solve.
void snap_monotone(GridFunctionND& x) {
  const std::size_t total = x.size();
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    std::size_t stride = 1;
    double lo = x.values[c];
    for (std::size_t axis = x.d; axis-- > 0;) {
      const std::size_t coord = rem % x.n;
      if (coord > 0) lo = std::max(lo, x.values[c - stride]);
      rem /= x.n;
      stride *= x.n;
    }
    x.values[c] = lo;
  }
}

struct KktParts {
  double primal = 0.0;
  double dual = 0.0;
  double compl_slack = 0.0;
  double reconstruction = 0.0;
  double max() const {
    return std::max(std::max(primal, dual), std::max(compl_slack, reconstruction));
  }
};

// p_axis[k] must lie in the normal cone of the axis-k monotone cone at
// x: along every line the prefix sums of the correction are the edge
// multipliers, so they must be nonnegative, telescope to zero, and
// vanish on strictly increasing edges.
KktParts kkt_parts(const GridFunctionND& f, const GridFunctionND& x,
                   const std::vector<std::vector<double>>& p_axis) {
  KktParts parts;
  const std::size_t total = f.size();
  for (std::size_t c = 0; c < total; ++c) {
    double sum = x.values[c];
    for (const auto& p : p_axis) sum += p[c];
    parts.reconstruction = std::max(parts.reconstruction, std::abs(sum - f.values[c]));
  }
  for (std::size_t axis = 0; axis < f.d; ++axis) {
    const auto& p = p_axis[axis];
    for_each_line(x, axis, [&](std::size_t base, std::size_t stride) {
      double prefix = 0.0;
      for (std::size_t j = 0; j + 1 < x.n; ++j) {
        const std::size_t c = base + j * stride;
        prefix += p[c];
        const double inc = x.values[c + stride] - x.values[c];
        parts.primal = std::max(parts.primal, -inc);
        parts.dual = std::max(parts.dual, -prefix);
        parts.compl_slack = std::max(parts.compl_slack, std::abs(prefix * inc));
      }
      prefix += p[base + (x.n - 1) * stride];
      parts.dual = std::max(parts.dual, std::abs(prefix));
    });
  }
  return parts;
}

}  // namespace

IsotonicResult isotonic_nd(const GridFunctionND& f) {
  if (f.size() > 65536) {
    throw std::invalid_argument("isotonic_nd capped at 65536 cells");
  }
  const std::size_t total = f.size();
  IsotonicResult res;
  res.projection = f;

  std::vector<std::vector<double>> p_axis(f.d, std::vector<double>(total, 0.0));
  GridFunctionND& x = res.projection;

  if (f.d == 1) {
    x.values = pava_1d(f.values, std::vector<double>(total, 1.0));
    for (std::size_t c = 0; c < total; ++c) p_axis[0][c] = f.values[c] - x.values[c];
    res.iterations = 1;
  } else {
    const std::vector<double> unit_w(f.n, 1.0);
    std::vector<double> line(f.n), corr(f.n);
    const std::size_t max_sweeps = 200000;
    std::size_t sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      double change = 0.0;
      for (std::size_t axis = 0; axis < f.d; ++axis) {
        auto& p = p_axis[axis];
        for_each_line(x, axis, [&](std::size_t base, std::size_t stride) {
          for (std::size_t j = 0; j < f.n; ++j) {
            line[j] = x.values[base + j * stride] + p[base + j * stride];
          }
          const auto proj = pava_1d(line, unit_w);
          for (std::size_t j = 0; j < f.n; ++j) {
            const std::size_t c = base + j * stride;
            p[c] = line[j] - proj[j];
            change = std::max(change, std::abs(x.values[c] - proj[j]));
            x.values[c] = proj[j];
          }
        });
      }
      if (change < 1e-13 || sweep % 8 == 7) {
        if (kkt_parts(f, x, p_axis).max() <= 0.5e-9) break;
        if (change == 0.0) break;  // exact fixed point, certified below
      }
    }
    res.iterations = sweep + 1;
    const double residual = kkt_parts(f, x, p_axis).max();
    if (residual > 1e-9) {
      throw std::runtime_error("isotonic_nd failed to certify optimality, residual " +
                               std::to_string(residual));
    }
  }

  snap_monotone(x);
  res.kkt_residual = kkt_parts(f, x, p_axis).max();

  const double wcell = std::pow(f.h, static_cast<double>(f.d));
  double d2 = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    const double e = f.values[c] - x.values[c];
    d2 += e * e;
  }
  res.distance_sq = d2 * wcell;
  return res;
}

namespace {

// ---- L1 distance machinery ----

// Weighted lower median of (value, weight) pairs.
double weighted_median(std::vector<std::pair<double, double>> items) {
  std::sort(items.begin(), items.end());
  double total = 0.0;
  for (const auto& it : items) total += it.second;
  double acc = 0.0;
  for (const auto& it : items) {
    acc += it.second;
    if (acc >= 0.5 * total - 1e-15) return it.first;
  }
  return items.back().first;
}

double l1_isotonic_cost_1d(const std::vector<double>& v, double wcell) {
  struct MBlock {
    std::vector<std::pair<double, double>> items;
    double median = 0.0;
  };
  std::vector<MBlock> stack;
  for (double x : v) {
    MBlock b;
    b.items = {{x, 1.0}};
    b.median = x;
    stack.push_back(std::move(b));
    while (stack.size() >= 2 && stack[stack.size() - 2].median > stack.back().median) {
      MBlock top = std::move(stack.back());
      stack.pop_back();
      MBlock& prev = stack.back();
      prev.items.insert(prev.items.end(), top.items.begin(), top.items.end());
      prev.median = weighted_median(prev.items);
    }
  }
  double cost = 0.0;
  for (const auto& b : stack) {
    for (const auto& it : b.items) cost += std::abs(it.first - b.median) * it.second;
  }
  return cost * wcell;
}

// Dinic max-flow; small graphs only.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : head_(n, -1), level_(n), iter_(n) {}

  void add_edge(int from, int to, double cap) {
    edges_.push_back({to, head_[from], cap});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], 0.0});
    head_[to] = static_cast<int>(edges_.size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      iter_ = head_;
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 1e-14) {
        flow += f;
      }
    }
    return flow;
  }

  // Minimal source side of the cut: nodes reachable in the residual graph.
  std::vector<bool> min_cut_source_side(int s) const {
    std::vector<bool> seen(head_.size(), false);
    std::vector<int> queue = {s};
    seen[s] = true;
    while (!queue.empty()) {
      const int u = queue.back();
      queue.pop_back();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-12 && !seen[edges_[e].to]) {
          seen[edges_[e].to] = true;
          queue.push_back(edges_[e].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue = {s};
    level_[s] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int u = queue[qi];
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-12 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          queue.push_back(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double limit) {
    if (u == t) return limit;
    for (int& e = iter_[u]; e != -1; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > 1e-12 && level_[ed.to] == level_[u] + 1) {
        const double got = dfs(ed.to, t, std::min(limit, ed.cap));
        if (got > 1e-14) {
          ed.cap -= got;
          edges_[e ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0.0;
  }

  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
  std::vector<Edge> edges_;
};

// Exact L1 projection distance through threshold decomposition: for each
// value gap the optimal upper level set is a minimum closure cut, the
// minimal optimal cuts are nested in the threshold, and stacking them
// rebuilds an optimal monotone function with values in the input set.
double l1_isotonic_cost_nd(const GridFunctionND& f) {
  if (f.size() > 1024) {
    throw std::invalid_argument("dist_mono p=1 capped at 1024 cells in d > 1");
  }
  const std::size_t total = f.size();
  std::vector<double> levels(f.values);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<double> g(total, levels.front());
  std::vector<bool> prev_upper(total, true);
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double t = 0.5 * (levels[k] + levels[k + 1]);
    const int source = static_cast<int>(total);
    const int sink = static_cast<int>(total) + 1;
    MaxFlow mf(total + 2);
    for (std::size_t c = 0; c < total; ++c) {
      if (f.values[c] > t) {
        mf.add_edge(source, static_cast<int>(c), 1.0);  // pays if left out
      } else {
        mf.add_edge(static_cast<int>(c), sink, 1.0);  // pays if included
      }
    }
    const double big = 4.0 * static_cast<double>(total);
    for (std::size_t axis = 0; axis < f.d; ++axis) {
      const std::size_t stride = f.stride(axis);
      for_each_line(f, axis, [&](std::size_t base, std::size_t s) {
        for (std::size_t j = 0; j + 1 < f.n; ++j) {
          const std::size_t c = base + j * s;
          mf.add_edge(static_cast<int>(c), static_cast<int>(c + s), big);
        }
      });
      (void)stride;
    }
    mf.run(source, sink);
    const auto upper = mf.min_cut_source_side(source);
    const double step = levels[k + 1] - levels[k];
    for (std::size_t c = 0; c < total; ++c) {
      if (upper[c] && !prev_upper[c]) {
        throw std::logic_error("threshold cuts failed to nest");
      }
      prev_upper[c] = upper[c];
      if (upper[c]) g[c] += step;
    }
  }

  const auto gf = make_gridnd(f.d, f.n, g);
  if (!is_monotone(gf)) throw std::logic_error("threshold stack is not monotone");
  double cost = 0.0;
  for (std::size_t c = 0; c < total; ++c) cost += std::abs(f.values[c] - g[c]);
  return cost * std::pow(f.h, static_cast<double>(f.d));
}

}  // namespace

double dist_mono(const GridFunctionND& f, int p) {
  if (p == 2) {
    return std::sqrt(isotonic_nd(f).distance_sq);
  }
  if (p == 1) {
    const double wcell = std::pow(f.h, static_cast<double>(f.d));
    if (f.d == 1) return l1_isotonic_cost_1d(f.values, wcell);
    return l1_isotonic_cost_nd(f);
  }
  throw std::invalid_argument("dist_mono supports p in {1,2}, got " + std::to_string(p));
}

}  // namespace monolab
