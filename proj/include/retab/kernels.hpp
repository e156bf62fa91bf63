#pragma once

#include <cstddef>
#include <string_view>

// Arithmetic inner loops shared by the generator (matvec/backprop) and the
// k-NN machinery (augmentation, privacy attacks, precision/recall). Scalar
// reference kernels always exist; AVX2/NEON variants are selected once at
// runtime and equivalence-tested against the scalar path.

namespace retab::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Backend chosen on first use: best ISA this CPU supports, unless the
// RETAB_KERNELS env var (scalar|avx2|neon|auto) or set_backend() says
// otherwise.
Backend active_backend();
std::string_view backend_name();
bool backend_available(Backend b);
void set_backend(Backend b);  // throws std::runtime_error if unavailable

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

double dot(const double* a, const double* b, std::size_t n);

// sum_i (a[i] - b[i])^2
double sq_dist(const double* a, const double* b, std::size_t n);

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(RETAB_HAVE_AVX2)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(RETAB_HAVE_NEON)
namespace neon {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace retab::kernels
