#include "doctest.h"
#include "helpers.hpp"
#include "logcrys/logdiff.hpp"

using namespace logcrys;
using namespace logcrys::testutil;

namespace {
SeriesRingPtr ring(int p, int s, int N, int m, int r, int D) {
  return SeriesRing::make(WittRing::make(p, s, N), m, r, D);
}
}  // namespace

TEST_CASE("exterior derivative") {
  auto R = ring(5, 1, 4, 2, 2, 6);
  auto t0 = R->variable(0), t1 = R->variable(1);

  auto d = exterior_d(t0 * t1);
  CHECK(agree(d.comp[0], t0 * t1));  // theta_i(t0 t1) = t0 t1 for log variables
  CHECK(agree(d.comp[1], t0 * t1));

  CHECK(exterior_d(R->constant_int(9)).is_zero());

  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    auto g = random_series(R, rng);
    CHECK(exterior_d(exterior_d(g)).is_zero());
  }

  // d o d = 0 in mixed log/twisted coordinates
  auto R2 = ring(3, 1, 5, 2, 1, 5);
  for (int rep = 0; rep < 50; ++rep) {
    auto g = random_series(R2, rng);
    CHECK(exterior_d(exterior_d(g)).is_zero());
  }
}

TEST_CASE("poincare_integrate on closed forms") {
  auto R = ring(5, 1, 4, 2, 2, 6);
  auto t0 = R->variable(0), t1 = R->variable(1);

  // dlog t_0
  LogOneForm dlog0(R);
  dlog0.comp[0] = R->constant_int(1);
  auto tau = poincare_integrate(dlog0);
  CHECK(tau.logpart[0].coords()[0] == 1);
  CHECK(tau.logpart[1].is_zero());
  CHECK(tau.analytic.is_zero());

  // d(t0 t1): pure analytic primitive
  auto tau2 = poincare_integrate(exterior_d(t0 * t1));
  CHECK(tau2.logpart[0].is_zero());
  CHECK(tau2.logpart[1].is_zero());
  CHECK(agree(tau2.analytic, t0 * t1));

  // eta = 2 t0 dlog t0 integrates to 2 t0
  LogOneForm eta(R);
  eta.comp[0] = t0.mul_int(2);
  auto tau3 = poincare_integrate(eta);
  CHECK(tau3.logpart[0].is_zero());
  CHECK(agree(tau3.analytic, t0.mul_int(2)));

  // non-closed form rejected with the offending components named
  LogOneForm bad(R);
  bad.comp[0] = t1;
  CHECK_THROWS_WITH_AS(poincare_integrate(bad),
                       "poincare_integrate: form not closed at dlog components (0,1)", Error);
}

TEST_CASE("poincare roundtrip recovers the potential up to a constant") {
  std::mt19937_64 rng(42);
  for (auto [m, r] : {std::pair<int, int>{2, 2}, {2, 1}, {1, 0}, {3, 2}}) {
    auto R = ring(5, 1, 4, m, r, 5);
    for (int rep = 0; rep < 12; ++rep) {
      auto g = random_series(R, rng);
      auto tau = poincare_integrate(exterior_d(g));
      for (const auto& w : tau.logpart) CHECK(w.is_zero());
      auto diff = tau.analytic - g;
      // difference must be the dropped constant
      auto cdiff = diff - R->constant(diff.constant_term()).div_p_value(diff.denom());
      CHECK(cdiff.is_zero());
    }
  }
}

TEST_CASE("poincare denominators stay within the integration budget") {
  // integrating t^(p-1) dlog t costs exactly one digit at p | degree
  auto R = ring(3, 1, 5, 1, 1, 7);
  auto t = R->variable(0);
  LogOneForm eta(R);
  eta.comp[0] = t.pow(3).mul_int(3) + t.pow(6).mul_int(2);  // theta(t^3 + ...) style
  auto tau = poincare_integrate(eta);
  CHECK(agree(tau.d().comp[0], eta.comp[0]));
  // v_p of any denominator bounded by v_p((D-1)!)
  CHECK(tau.analytic.denom() <= R->witt()->factorial_valuation(6));
}

TEST_CASE("two integrations differ by a constant only") {
  auto R = ring(3, 1, 5, 2, 1, 5);
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    auto g = random_series(R, rng);
    auto eta = exterior_d(g);
    auto tau1 = poincare_integrate(eta);
    // shift eta by an exact form and integrate the sum of both
    auto h = random_series(R, rng);
    auto tau2 = poincare_integrate(exterior_d(g + h));
    auto tau3 = poincare_integrate(exterior_d(h));
    auto diff = tau2.analytic - tau1.analytic - tau3.analytic;
    auto cdiff = diff - R->constant(diff.constant_term()).div_p_value(diff.denom());
    CHECK(cdiff.is_zero());
  }
}
