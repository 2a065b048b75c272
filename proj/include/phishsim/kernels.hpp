#pragma once

// Data-parallel numeric kernels behind the profiler and the batch
// FollowerRank path. Each kernel has a scalar reference implementation and
// an AVX2 variant; the variant is picked once at runtime from CPUID and can
// be pinned with PHISHSIM_ISA=scalar|avx2.
//
// Reductions in the AVX2 variant sum in interleaved lanes, so their
// results may differ from the scalar reference in the last bits. The
// element-wise kernels are bit-identical across variants.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace phishsim::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out[i] = num[i] / (num[i] + other[i]), or 0 where both are 0
  void (*share)(const double* num, const double* other, double* out, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the build or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table selected for this process.
const KernelTable& active();
Isa active_isa();

/// Overrides the selection (tests and benchmarks). nullopt restores the
/// CPUID/environment choice. Not thread-safe against concurrent kernels.
void force_isa(std::optional<Isa> isa);

double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void share(std::span<const double> num, std::span<const double> other, std::span<double> out);

}  // namespace phishsim::kernels
