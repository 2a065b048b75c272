#pragma once

#include <cstddef>

namespace phishsim::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void share_scalar(const double* num, const double* other, double* out, std::size_t n);

#if defined(PHISHSIM_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void share_avx2(const double* num, const double* other, double* out, std::size_t n);
#endif

}  // namespace phishsim::kernels::detail
