#include "kernels_impl.hpp"

namespace phishsim::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void share_scalar(const double* num, const double* other, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double total = num[i] + other[i];
    out[i] = total == 0.0 ? 0.0 : num[i] / total;
  }
}

}  // namespace phishsim::kernels::detail
