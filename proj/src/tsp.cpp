#include "routeseq/tsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "routeseq/error.hpp"

namespace routeseq::tsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxExactNodes = 22;

double tie_tolerance(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

void check_node(const CostMatrix& costs, std::size_t node, const char* what) {
  if (node >= costs.rows) throw InvalidInput(std::string(what) + " node out of range");
}

// Cost-to-go table over subsets of `free_nodes` (sorted ascending, so bit
// order equals node order). to_go[mask * m + k] is the cheapest way to finish
// starting at free_nodes[k] after having visited exactly `mask`
// (which contains k). `finish(k)` is the terminal cost once every free node is
// visited.
template <class Finish>
std::vector<double> cost_to_go(const CostMatrix& costs, const std::vector<std::size_t>& free_nodes,
                               Finish finish, kernels::Exec exec) {
  const std::size_t m = free_nodes.size();
  const std::uint32_t full = (m == 0) ? 0u : ((1u << m) - 1u);
  std::vector<double> to_go((static_cast<std::size_t>(full) + 1) * m, kInf);

  // Subsets grouped by size; within one size level entries are independent.
  std::vector<std::vector<std::uint32_t>> by_size(m + 1);
  for (std::uint32_t mask = 1; mask <= full; ++mask) by_size[std::popcount(mask)].push_back(mask);

  for (std::size_t k = 0; k < m; ++k) to_go[full * m + k] = finish(k);
  for (std::size_t level = m; level-- > 1;) {
    const auto& masks = by_size[level];
    kernels::for_each_index(
        masks.size(),
        [&](std::size_t idx) {
          const std::uint32_t mask = masks[idx];
          for (std::size_t k = 0; k < m; ++k) {
            if (!(mask & (1u << k))) continue;
            double best = kInf;
            const std::size_t from = free_nodes[k];
            for (std::size_t l = 0; l < m; ++l) {
              if (mask & (1u << l)) continue;
              const std::uint32_t next = mask | (1u << l);
              const double c = costs(from, free_nodes[l]) + to_go[next * m + l];
              if (c < best) best = c;
            }
            to_go[mask * m + k] = best;
          }
        },
        exec);
  }
  return to_go;
}

// Walks the table from `start`, always taking the smallest-index node whose
// continuation is optimal; this yields the lexicographically smallest
// optimal order.
std::vector<std::size_t> reconstruct(const CostMatrix& costs, const std::vector<std::size_t>& free_nodes,
                                     const std::vector<double>& to_go, std::size_t start) {
  const std::size_t m = free_nodes.size();
  std::vector<std::size_t> order;
  std::uint32_t mask = 0;
  std::size_t current = start;
  double remaining = kInf;
  for (std::size_t l = 0; l < m; ++l) remaining = std::min(remaining, costs(start, free_nodes[l]) + to_go[(1u << l) * m + l]);
  for (std::size_t step = 0; step < m; ++step) {
    const double tol = tie_tolerance(remaining);
    for (std::size_t l = 0; l < m; ++l) {
      if (mask & (1u << l)) continue;
      const std::uint32_t next = mask | (1u << l);
      const double c = costs(current, free_nodes[l]) + to_go[next * m + l];
      if (c <= remaining + tol) {
        order.push_back(free_nodes[l]);
        remaining = to_go[next * m + l];
        mask = next;
        current = free_nodes[l];
        break;
      }
    }
  }
  return order;
}

TspSolution finish_solution(std::vector<std::size_t> order, const CostMatrix& costs, Kind kind, Method method) {
  TspSolution sol;
  sol.cost = route_cost(order, costs, kind == Kind::tour);
  sol.order = std::move(order);
  sol.kind = kind;
  sol.method = method;
  return sol;
}

}  // namespace

void validate(const CostMatrix& costs) {
  if (costs.rows != costs.cols) throw InvalidInput("cost matrix must be square");
  if (costs.rows == 0) throw InvalidInput("cost matrix must be non-empty");
  for (std::size_t a = 0; a < costs.rows; ++a) {
    for (std::size_t b = 0; b < costs.cols; ++b) {
      const double c = costs(a, b);
      if (!std::isfinite(c) || c < 0.0) throw InvalidInput("cost matrix entries must be finite and non-negative");
      if (a == b && c != 0.0) throw InvalidInput("cost matrix diagonal must be zero");
    }
  }
}

double route_cost(const std::vector<std::size_t>& order, const CostMatrix& costs, bool close_tour) {
  std::vector<bool> seen(costs.rows, false);
  for (std::size_t node : order) {
    if (node >= costs.rows) throw InvalidInput("route_cost: node out of range");
    if (seen[node]) throw InvalidInput("route_cost: duplicate node " + std::to_string(node));
    seen[node] = true;
  }
  double total = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) total += costs(order[k - 1], order[k]);
  if (close_tour && order.size() > 1) total += costs(order.back(), order.front());
  return total;
}

TspSolution held_karp_tour(const CostMatrix& costs, std::size_t origin, kernels::Exec exec) {
  validate(costs);
  check_node(costs, origin, "origin");
  const std::size_t n = costs.rows;
  if (n > kMaxExactNodes) throw InvalidInput("held_karp_tour: instance too large for exact solve");
  if (n == 1) return finish_solution({origin}, costs, Kind::tour, Method::exact);

  std::vector<std::size_t> free_nodes;
  for (std::size_t v = 0; v < n; ++v)
    if (v != origin) free_nodes.push_back(v);
  const auto to_go = cost_to_go(
      costs, free_nodes, [&](std::size_t k) { return costs(free_nodes[k], origin); }, exec);
  std::vector<std::size_t> order{origin};
  const auto rest = reconstruct(costs, free_nodes, to_go, origin);
  order.insert(order.end(), rest.begin(), rest.end());
  return finish_solution(std::move(order), costs, Kind::tour, Method::exact);
}

TspSolution held_karp_path(const CostMatrix& costs, std::size_t first, std::size_t last, kernels::Exec exec) {
  validate(costs);
  check_node(costs, first, "first");
  check_node(costs, last, "last");
  const std::size_t n = costs.rows;
  if (n > kMaxExactNodes) throw InvalidInput("held_karp_path: instance too large for exact solve");
  if (first == last) {
    if (n == 1) return finish_solution({first}, costs, Kind::path, Method::exact);
    throw InvalidInput("solve_path: first == last requires a tour solve");
  }

  std::vector<std::size_t> free_nodes;
  for (std::size_t v = 0; v < n; ++v)
    if (v != first && v != last) free_nodes.push_back(v);
  std::vector<std::size_t> order{first};
  if (!free_nodes.empty()) {
    const auto to_go = cost_to_go(
        costs, free_nodes, [&](std::size_t k) { return costs(free_nodes[k], last); }, exec);
    const auto rest = reconstruct(costs, free_nodes, to_go, first);
    order.insert(order.end(), rest.begin(), rest.end());
  }
  order.push_back(last);
  return finish_solution(std::move(order), costs, Kind::path, Method::exact);
}

TspSolution nearest_neighbor_tour(const CostMatrix& costs, std::size_t origin) {
  validate(costs);
  check_node(costs, origin, "origin");
  const std::size_t n = costs.rows;
  std::vector<bool> used(n, false);
  std::vector<std::size_t> order{origin};
  used[origin] = true;
  while (order.size() < n) {
    const std::size_t cur = order.back();
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v]) continue;
      if (best == n || costs(cur, v) < costs(cur, best)) best = v;
    }
    used[best] = true;
    order.push_back(best);
  }
  return finish_solution(std::move(order), costs, Kind::tour, Method::heuristic);
}

TspSolution nearest_neighbor_path(const CostMatrix& costs, std::size_t first, std::size_t last) {
  validate(costs);
  check_node(costs, first, "first");
  check_node(costs, last, "last");
  const std::size_t n = costs.rows;
  if (first == last) {
    if (n == 1) return finish_solution({first}, costs, Kind::path, Method::heuristic);
    throw InvalidInput("solve_path: first == last requires a tour solve");
  }
  std::vector<bool> used(n, false);
  used[first] = used[last] = true;
  std::vector<std::size_t> order{first};
  while (order.size() + 1 < n) {
    const std::size_t cur = order.back();
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v]) continue;
      if (best == n || costs(cur, v) < costs(cur, best)) best = v;
    }
    used[best] = true;
    order.push_back(best);
  }
  order.push_back(last);
  return finish_solution(std::move(order), costs, Kind::path, Method::heuristic);
}

TspSolution two_opt(TspSolution sol, const CostMatrix& costs) {
  const std::size_t n = sol.order.size();
  const bool tour = sol.kind == Kind::tour;
  // Movable positions: [1, n-1] for tours, [1, n-2] for paths.
  const std::size_t hi = tour ? n - 1 : (n >= 2 ? n - 2 : 0);
  const std::size_t max_passes = 10 * n * n;
  double current = route_cost(sol.order, costs, tour);
  std::vector<std::size_t> candidate;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    double best_cost = current;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 1; i < hi; ++i) {
      for (std::size_t j = i + 1; j <= hi; ++j) {
        candidate = sol.order;
        std::reverse(candidate.begin() + static_cast<std::ptrdiff_t>(i),
                     candidate.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        // Asymmetric costs: the reversed segment's internal legs change too,
        // so the whole order is re-priced.
        const double c = route_cost(candidate, costs, tour);
        if (c < best_cost - 1e-12) {
          best_cost = c;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_j == 0) break;
    std::reverse(sol.order.begin() + static_cast<std::ptrdiff_t>(best_i),
                 sol.order.begin() + static_cast<std::ptrdiff_t>(best_j) + 1);
    current = best_cost;
  }
  sol.cost = current;
  sol.method = Method::heuristic;
  return sol;
}

TspSolution heuristic_tour(const CostMatrix& costs, std::size_t origin) {
  return two_opt(nearest_neighbor_tour(costs, origin), costs);
}

TspSolution heuristic_path(const CostMatrix& costs, std::size_t first, std::size_t last) {
  return two_opt(nearest_neighbor_path(costs, first, last), costs);
}

TspSolution solve_tour(const CostMatrix& costs, std::size_t origin, const SolverOptions& opts) {
  validate(costs);
  if (costs.rows <= opts.exact_threshold) return held_karp_tour(costs, origin, opts.exec);
  return heuristic_tour(costs, origin);
}

TspSolution solve_path(const CostMatrix& costs, std::size_t first, std::size_t last, const SolverOptions& opts) {
  validate(costs);
  if (costs.rows <= opts.exact_threshold) return held_karp_path(costs, first, last, opts.exec);
  return heuristic_path(costs, first, last);
}

CostMatrix submatrix(const CostMatrix& costs, const std::vector<std::size_t>& nodes) {
  CostMatrix sub(nodes.size(), nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b) sub(a, b) = costs(nodes[a], nodes[b]);
  return sub;
}

}  // namespace routeseq::tsp
