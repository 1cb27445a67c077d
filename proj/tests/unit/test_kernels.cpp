#include "doctest.h"
#include "helpers.hpp"
#include "logcrys/series.hpp"

using namespace logcrys;
using namespace logcrys::testutil;

TEST_CASE("parallel kernel matches the serial reference") {
  std::mt19937_64 rng(31);
  for (auto [p, s, N, m, r, D] :
       {std::tuple<int, int, int, int, int, int>{5, 1, 4, 2, 1, 8}, {3, 2, 5, 3, 2, 5},
        {7, 1, 3, 1, 0, 16}}) {
    auto R = SeriesRing::make(WittRing::make(p, s, N), m, r, D);
    for (int rep = 0; rep < 10; ++rep) {
      auto a = random_series(R, rng, 0.7);
      auto b = random_series(R, rng, 0.7);
      std::vector<WittElem> serial, parallel;
      kernels::convolve_serial(*R, a.coeffs(), b.coeffs(), serial);
      kernels::convolve_parallel(*R, a.coeffs(), b.coeffs(), parallel);
      REQUIRE(serial.size() == parallel.size());
      for (std::size_t k = 0; k < serial.size(); ++k) {
        CHECK(serial[k].coords() == parallel[k].coords());
        CHECK(serial[k].prec() == parallel[k].prec());
      }
    }
  }
}

TEST_CASE("operator* honors the kernel switch") {
  auto R = SeriesRing::make(WittRing::make(5, 1, 4), 2, 1, 6);
  std::mt19937_64 rng(32);
  auto a = random_series(R, rng);
  auto b = random_series(R, rng);
  auto serial = a * b;
  kernels::set_parallel(true);
  auto parallel = a * b;
  kernels::set_parallel(false);
  CHECK((serial - parallel).is_zero());
  for (std::size_t k = 0; k < R->size(); ++k)
    CHECK(serial.coeff(k).prec() == parallel.coeff(k).prec());
}

TEST_CASE("mixed precision convolution is order independent") {
  auto R = SeriesRing::make(WittRing::make(3, 1, 6), 2, 1, 5);
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = random_series(R, rng);
    auto b = random_series(R, rng);
    // lower the precision of a few coefficients
    auto ca = a.coeffs();
    for (std::size_t k = 0; k < ca.size(); k += 3) ca[k] = ca[k].reduce(2 + (k % 4));
    a = TruncatedSeries(R, ca, 0);
    std::vector<WittElem> serial, parallel;
    kernels::convolve_serial(*R, a.coeffs(), b.coeffs(), serial);
    kernels::convolve_parallel(*R, a.coeffs(), b.coeffs(), parallel);
    for (std::size_t k = 0; k < serial.size(); ++k) {
      CHECK(serial[k].coords() == parallel[k].coords());
      CHECK(serial[k].prec() == parallel[k].prec());
    }
  }
}
