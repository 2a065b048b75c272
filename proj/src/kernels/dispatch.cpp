#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels_impl.hpp"
#include "phishsim/kernels.hpp"

namespace phishsim::kernels {
namespace {

const KernelTable kScalar{Isa::scalar, detail::dot_scalar, detail::weighted_dot_scalar,
                          detail::axpy_scalar, detail::share_scalar};

#if defined(PHISHSIM_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2, detail::dot_avx2, detail::weighted_dot_avx2,
                        detail::axpy_avx2, detail::share_avx2};
#endif

bool cpu_has_avx2() {
#if defined(PHISHSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* detect() {
  const KernelTable* best = avx2_table();
  if (const char* env = std::getenv("PHISHSIM_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalar;
  }
  return best != nullptr ? best : &kScalar;
}

std::atomic<const KernelTable*> g_forced{nullptr};

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(PHISHSIM_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  if (const KernelTable* f = g_forced.load(std::memory_order_relaxed)) return *f;
  static const KernelTable* chosen = detect();
  return *chosen;
}

Isa active_isa() { return active().isa; }

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(nullptr);
    return;
  }
  if (*isa == Isa::scalar) {
    g_forced.store(&kScalar);
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw std::runtime_error("AVX2 kernels unavailable on this machine");
  g_forced.store(t);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  check_sizes(w.size(), a.size());
  check_sizes(w.size(), b.size());
  return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void share(std::span<const double> num, std::span<const double> other, std::span<double> out) {
  check_sizes(num.size(), other.size());
  check_sizes(num.size(), out.size());
  active().share(num.data(), other.data(), out.data(), num.size());
}

}  // namespace phishsim::kernels
