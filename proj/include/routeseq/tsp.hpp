#pragma once

#include <cstddef>
#include <vector>

#include "routeseq/kernels.hpp"
#include "routeseq/tensor.hpp"

namespace routeseq::tsp {

// Square, non-negative, zero-diagonal, possibly asymmetric travel costs.
using CostMatrix = Tensor;

enum class Kind { tour, path };
enum class Method { exact, heuristic };

struct TspSolution {
  std::vector<std::size_t> order;  // every node exactly once; tours start at origin
  double cost = 0.0;               // includes the closing leg for tours
  Kind kind = Kind::tour;
  Method method = Method::exact;
};

struct SolverOptions {
  std::size_t exact_threshold = 13;  // Held-Karp up to this many nodes
  kernels::Exec exec = kernels::Exec::serial;
};

// Throws InvalidInput if the matrix is not square, has negative or
// non-finite entries, or a non-zero diagonal.
void validate(const CostMatrix& costs);

double route_cost(const std::vector<std::size_t>& order, const CostMatrix& costs, bool close_tour);

TspSolution solve_tour(const CostMatrix& costs, std::size_t origin, const SolverOptions& opts = {});
TspSolution solve_path(const CostMatrix& costs, std::size_t first, std::size_t last,
                       const SolverOptions& opts = {});

// Individual stages, exposed for benchmarking and verification.
TspSolution held_karp_tour(const CostMatrix& costs, std::size_t origin,
                           kernels::Exec exec = kernels::Exec::serial);
TspSolution held_karp_path(const CostMatrix& costs, std::size_t first, std::size_t last,
                           kernels::Exec exec = kernels::Exec::serial);
TspSolution nearest_neighbor_tour(const CostMatrix& costs, std::size_t origin);
TspSolution nearest_neighbor_path(const CostMatrix& costs, std::size_t first, std::size_t last);
// Segment-reversal local search; endpoints (order.front() and, for paths,
// order.back()) stay fixed. Cost never increases.
TspSolution two_opt(TspSolution start, const CostMatrix& costs);
TspSolution heuristic_tour(const CostMatrix& costs, std::size_t origin);
TspSolution heuristic_path(const CostMatrix& costs, std::size_t first, std::size_t last);

// Sub-matrix over `nodes`, in that order.
CostMatrix submatrix(const CostMatrix& costs, const std::vector<std::size_t>& nodes);

}  // namespace routeseq::tsp
