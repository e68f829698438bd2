#include "routeseq/kernels.hpp"

#include <omp.h>

#include "routeseq/error.hpp"

namespace routeseq::kernels {

void matvec(const Tensor& A, std::span<const double> x, std::span<double> y, Exec exec) {
  if (x.size() != A.cols || y.size() != A.rows) throw InvalidInput("matvec: shape mismatch");
  const auto row_dot = [&](std::size_t r) {
    const double* a = A.data.data() + r * A.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < A.cols; ++c) s += a[c] * x[c];
    y[r] = s;
  };
  if (exec == Exec::parallel && A.rows * A.cols >= 4096) {
    const long long rows = static_cast<long long>(A.rows);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < rows; ++r) row_dot(static_cast<std::size_t>(r));
  } else {
    for (std::size_t r = 0; r < A.rows; ++r) row_dot(r);
  }
}

void matvec_transposed_accumulate(const Tensor& A, std::span<const double> g, std::span<double> y) {
  if (g.size() != A.rows || y.size() != A.cols) throw InvalidInput("matvec_transposed: shape mismatch");
  for (std::size_t r = 0; r < A.rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* a = A.data.data() + r * A.cols;
    for (std::size_t c = 0; c < A.cols; ++c) y[c] += a[c] * gr;
  }
}

void outer_accumulate(Tensor& G, std::span<const double> g, std::span<const double> x) {
  if (g.size() != G.rows || x.size() != G.cols) throw InvalidInput("outer_accumulate: shape mismatch");
  for (std::size_t r = 0; r < G.rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* out = G.data.data() + r * G.cols;
    for (std::size_t c = 0; c < G.cols; ++c) out[c] += gr * x[c];
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace routeseq::kernels
