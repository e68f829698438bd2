#pragma once

// Data-parallel building blocks. Every kernel has a serial reference path and
// an OpenMP path; both write each output slot from exactly one iteration, so
// results are bitwise identical regardless of thread count.

#include <cstddef>
#include <span>

#include "routeseq/tensor.hpp"

namespace routeseq::kernels {

enum class Exec { serial, parallel };

// y = A x
void matvec(const Tensor& A, std::span<const double> x, std::span<double> y,
            Exec exec = Exec::serial);

// y += A^T g
void matvec_transposed_accumulate(const Tensor& A, std::span<const double> g, std::span<double> y);

// G += g x^T
void outer_accumulate(Tensor& G, std::span<const double> g, std::span<const double> x);

// Runs body(i) for i in [0, n). Iterations must be independent.
template <class Body>
void for_each_index(std::size_t n, Body&& body, Exec exec) {
  if (exec == Exec::parallel) {
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

int max_threads();

}  // namespace routeseq::kernels
