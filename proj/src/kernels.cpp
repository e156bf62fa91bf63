#include "retab/kernels.hpp"

#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

namespace retab::kernels {

namespace scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace scalar

namespace {

struct Table {
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
};

constexpr Table kScalarTable{scalar::axpy, scalar::dot, scalar::sq_dist};

#if defined(RETAB_HAVE_AVX2)
constexpr Table kAvx2Table{avx2::axpy, avx2::dot, avx2::sq_dist};
bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif
#if defined(RETAB_HAVE_NEON)
constexpr Table kNeonTable{neon::axpy, neon::dot, neon::sq_dist};
#endif

struct Dispatch {
  Backend backend = Backend::Scalar;
  Table table = kScalarTable;
};

Backend best_supported() {
#if defined(RETAB_HAVE_AVX2)
  if (cpu_has_avx2()) return Backend::Avx2;
#endif
#if defined(RETAB_HAVE_NEON)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

Table table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return kScalarTable;
#if defined(RETAB_HAVE_AVX2)
    case Backend::Avx2:
      return kAvx2Table;
#endif
#if defined(RETAB_HAVE_NEON)
    case Backend::Neon:
      return kNeonTable;
#endif
    default:
      return kScalarTable;
  }
}

Dispatch make_initial_dispatch() {
  Backend b = best_supported();
  if (const char* env = std::getenv("RETAB_KERNELS")) {
    std::string v(env);
    if (v == "scalar") {
      b = Backend::Scalar;
    } else if (v == "avx2" && backend_available(Backend::Avx2)) {
      b = Backend::Avx2;
    } else if (v == "neon" && backend_available(Backend::Neon)) {
      b = Backend::Neon;
    }
    // "auto" or an unusable request keeps the detected backend
  }
  return Dispatch{b, table_for(b)};
}

Dispatch& dispatch() {
  static Dispatch d = make_initial_dispatch();
  return d;
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(RETAB_HAVE_AVX2)
      return cpu_has_avx2();
#else
      return false;
#endif
    case Backend::Neon:
#if defined(RETAB_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return dispatch().backend; }

std::string_view backend_name() {
  switch (dispatch().backend) {
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
    case Backend::Scalar:
      break;
  }
  return "scalar";
}

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend not available on this machine");
  }
  dispatch() = Dispatch{b, table_for(b)};
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  dispatch().table.axpy(a, x, y, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table.dot(a, b, n);
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  return dispatch().table.sq_dist(a, b, n);
}

}  // namespace retab::kernels
