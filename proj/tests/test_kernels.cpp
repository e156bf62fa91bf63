#include <doctest.h>

#include <cmath>
#include <vector>

#include "retab/kernels.hpp"
#include "retab/rng.hpp"

using namespace retab;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (rng.uniform() * 2.0 - 1.0);
  return v;
}

bool close(double a, double b, double rel = 1e-12) {
  double m = std::max({std::fabs(a), std::fabs(b), 1.0});
  return std::fabs(a - b) <= rel * m;
}

}  // namespace

TEST_CASE("scalar kernels match hand results") {
  double a[] = {1.0, 2.0, 3.0};
  double b[] = {4.0, -5.0, 6.0};
  CHECK(kernels::scalar::dot(a, b, 3) == doctest::Approx(12.0));
  CHECK(kernels::scalar::sq_dist(a, b, 3) == doctest::Approx(9.0 + 49.0 + 9.0));
  double y[] = {1.0, 1.0, 1.0};
  kernels::scalar::axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 5.0);
  CHECK(y[2] == 7.0);
}

TEST_CASE("dispatched kernels agree with the scalar reference") {
  INFO("active backend: ", kernels::backend_name());
  Rng rng(42);
  // sizes straddle the vector width and tail-handling boundaries
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u,
                        67u, 1000u}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);

    CHECK(close(kernels::dot(x.data(), y.data(), n), kernels::scalar::dot(x.data(), y.data(), n)));
    CHECK(close(kernels::sq_dist(x.data(), y.data(), n),
                kernels::scalar::sq_dist(x.data(), y.data(), n)));

    auto y1 = y, y2 = y;
    kernels::axpy(0.37, x.data(), y1.data(), n);
    kernels::scalar::axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i]));
  }
}

TEST_CASE("every available backend computes the same results") {
  Rng rng(7);
  auto x = random_vec(rng, 123);
  auto y = random_vec(rng, 123);
  double ref_dot = kernels::scalar::dot(x.data(), y.data(), x.size());
  double ref_sq = kernels::scalar::sq_dist(x.data(), y.data(), x.size());

  kernels::Backend original = kernels::active_backend();
  for (auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2, kernels::Backend::Neon}) {
    if (!kernels::backend_available(backend)) continue;
    kernels::set_backend(backend);
    CHECK(close(kernels::dot(x.data(), y.data(), x.size()), ref_dot));
    CHECK(close(kernels::sq_dist(x.data(), y.data(), x.size()), ref_sq));
  }
  kernels::set_backend(original);
}

TEST_CASE("sq_dist is nonnegative and zero on identical inputs") {
  Rng rng(3);
  auto x = random_vec(rng, 50);
  CHECK(kernels::sq_dist(x.data(), x.data(), x.size()) == 0.0);
  auto y = random_vec(rng, 50);
  CHECK(kernels::sq_dist(x.data(), y.data(), x.size()) >= 0.0);
}

TEST_CASE("unavailable backend request throws") {
  bool any_unavailable = false;
  for (auto backend : {kernels::Backend::Avx2, kernels::Backend::Neon}) {
    if (!kernels::backend_available(backend)) {
      any_unavailable = true;
      CHECK_THROWS(kernels::set_backend(backend));
    }
  }
  if (!any_unavailable) {
    CHECK(true);  // both SIMD paths exist on this machine
  }
}
