#include "doctest.h"
#include "helpers.hpp"
#include "logcrys/crystal.hpp"

using namespace logcrys;
using namespace logcrys::testutil;

namespace {

SeriesRingPtr ring(int p, int s, int N, int m, int r, int D) {
  return SeriesRing::make(WittRing::make(p, s, N), m, r, D);
}

// rank-2 crystal with nabla(theta) e1 = e0, F = diag(1, p), Fil^1 = <e1>
HodgeFCrystal tate_like(const SeriesRingPtr& R) {
  HodgeFCrystal X(R, 2);
  X.nabla.M[0](0, 1) = R->constant_int(1);
  X.frob(1, 1) = R->constant_int(1).mul_p();
  X.fil = {{0, 1}, {1}};
  X.weight = 1;
  return X;
}

}  // namespace

TEST_CASE("axioms on small crystals") {
  auto R = ring(5, 1, 4, 1, 1, 6);

  HodgeFCrystal unit(R, 1);
  unit.weight = 0;
  CHECK(check_axioms(unit).all_pass());

  auto X = tate_like(R);
  CHECK(check_axioms(X).all_pass());

  // flipping the flag breaks p-divisibility: F e0 = e0 is not in pH
  auto bad = X;
  bad.fil = {{0, 1}, {0}};
  auto rep = check_axioms(bad);
  CHECK(!rep.all_pass());
  bool pdiv_failed = false;
  for (const auto& it : rep.items)
    if (it.axiom == "p_divisibility" && !it.pass) pdiv_failed = true;
  CHECK(pdiv_failed);
}

TEST_CASE("polygons and ordinarity") {
  auto R = ring(5, 1, 4, 1, 1, 6);

  auto X = tate_like(R);
  CHECK(hodge_polygon(X).to_string() == "{0, 1}");
  CHECK(newton_polygon(X).to_string() == "{0, 1}");
  CHECK(is_ordinary(X));

  // supersingular control: char poly x^2 + p has slopes 1/2, 1/2
  HodgeFCrystal Y(R, 2);
  Y.frob = zero_matrix(R, 2, 2);
  Y.frob(0, 1) = R->constant_int(-5);
  Y.frob(1, 0) = R->constant_int(1);
  Y.fil = {{0, 1}, {1}};
  Y.weight = 1;
  CHECK(newton_polygon(Y).to_string() == "{1/2, 1/2}");
  CHECK(!is_ordinary(Y));
  CHECK_THROWS_WITH_AS(slope_filtration(Y), "slope filtration requires an ordinary crystal",
                       Error);

  HodgeFCrystal unit(R, 1);
  unit.weight = 0;
  CHECK(newton_polygon(unit).to_string() == "{0}");
  CHECK(is_ordinary(unit));

  // degree-2 Witt ring: the s-fold linearization halves the raw slopes
  auto R2 = ring(5, 2, 4, 1, 1, 4);
  HodgeFCrystal Z(R2, 1);
  Z.frob(0, 0) = R2->constant_int(5);
  Z.fil = {{0}, {0}};
  Z.weight = 1;
  CHECK(newton_polygon(Z).to_string() == "{1}");
}

TEST_CASE("slope filtration on the Tate-like crystal") {
  auto R = ring(5, 1, 4, 1, 1, 6);
  auto X = tate_like(R);
  auto sf = slope_filtration(X);
  REQUIRE(sf.U.size() == 2);
  CHECK(sf.U[0].cols == 1);
  CHECK(agree(sf.U[0](0, 0), R->constant_int(1)));
  CHECK(sf.U[0](1, 0).is_zero());
  CHECK(sf.U[1].cols == 2);
  REQUIRE(sf.Hi.size() == 2);
  CHECK(sf.Hi[0].cols == 1);
  CHECK(sf.Hi[1].cols == 1);
  CHECK(agree(sf.Hi[1](1, 0), R->constant_int(1)));

  // unit-root input: U_0 is everything
  HodgeFCrystal unit(R, 2);
  unit.weight = 0;
  auto sf2 = slope_filtration(unit);
  CHECK(sf2.U.size() == 1);
  CHECK(sf2.U[0].cols == 2);
}

TEST_CASE("slope filtration with a mixed unit-root line") {
  // conjugate diag(1, p) by B = [[1, 0],[t, 1]]: the flag <e1> stays adapted
  // while the slope-0 line becomes e0 + t e1
  auto R = ring(5, 1, 5, 1, 1, 6);
  auto t = R->variable(0);
  HodgeFCrystal X(R, 2);
  Mat<TruncatedSeries> B(2, 2, R->zero());
  B(0, 0) = R->constant_int(1);
  B(1, 1) = R->constant_int(1);
  B(1, 0) = t;
  auto psi = FrobLift::standard(R);
  auto Binv_psi = mat_inverse(psi(B), R->constant_int(1), R->zero());
  Mat<TruncatedSeries> D0(2, 2, R->zero());
  D0(0, 0) = R->constant_int(1);
  D0(1, 1) = R->constant_int(1).mul_p();
  X.frob = matmul(B, matmul(D0, Binv_psi));
  Mat<TruncatedSeries> M0(2, 2, R->zero());
  M0(0, 1) = R->constant_int(1);
  auto Binv = mat_inverse(B, R->constant_int(1), R->zero());
  // basis change: M_e = B M0 B^{-1} - theta(B) B^{-1}
  X.nabla.M[0] = matsub(matmul(B, matmul(M0, Binv)), matmul(mat_theta(B, 0), Binv));
  X.fil = {{0, 1}, {1}};
  X.weight = 1;

  REQUIRE(check_axioms(X).all_pass());
  CHECK(is_ordinary(X));
  auto sf = slope_filtration(X);
  CHECK(sf.U[0].cols == 1);
  // U_0 is the span of e0 + t e1
  CHECK(agree(sf.U[0](0, 0), R->constant_int(1)));
  CHECK(agree(sf.U[0](1, 0), t));
}

TEST_CASE("unit_root_basis") {
  auto R = ring(5, 1, 4, 1, 1, 6);

  HodgeFCrystal id2(R, 2);
  id2.weight = 0;
  auto B = unit_root_basis(id2);
  CHECK(mat_is_zero(matsub(B, identity_matrix(R, 2))));

  // rank 1, F = 1 + p t: B = prod_k psi^k(1 + p t), checked via F psi(B) = B
  auto t = R->variable(0);
  HodgeFCrystal X(R, 1);
  X.weight = 0;
  X.frob(0, 0) = R->constant_int(1) + t.mul_p();
  auto psi = FrobLift::standard(R);
  auto prod = R->constant_int(1);
  {
    auto factor = X.frob(0, 0);
    for (int k = 0; k < 6; ++k) {
      prod = prod * factor;
      factor = psi(factor);
    }
  }
  // horizontal structure determined by the fixed basis b: nabla b = 0
  X.nabla.M[0](0, 0) = -(prod.theta(0) * prod.inv());
  REQUIRE(check_axioms(X).all_pass());
  auto B2 = unit_root_basis(X);
  CHECK(agree(B2(0, 0), prod));  // the infinite-product oracle
  CHECK(agree(X.frob(0, 0) * psi(B2(0, 0)), B2(0, 0)));

  // rank 2, F(0) = identity, random p-perturbation vanishing at t = 0
  std::mt19937_64 rng(61);
  HodgeFCrystal Y(R, 2);
  Y.weight = 0;
  Mat<TruncatedSeries> pert(2, 2, R->zero());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      pert(i, j) = (random_series(R, rng, 0.5) * R->variable(0)).mul_p();
  Y.frob = matadd(identity_matrix(R, 2), pert);
  Mat<TruncatedSeries> Bfix = identity_matrix(R, 2);
  for (int k = 0; k < 8; ++k) Bfix = matmul(Y.frob, psi(Bfix));
  auto Bfix_inv = mat_inverse(Bfix, R->constant_int(1), R->zero());
  Y.nabla.M[0] =
      mat_apply(matmul(mat_theta(Bfix, 0), Bfix_inv), [](const TruncatedSeries& s) { return -s; });
  REQUIRE(check_axioms(Y).all_pass());
  auto B3 = unit_root_basis(Y);
  CHECK(mat_is_zero(matsub(matmul(Y.frob, psi(B3)), B3)));
  CHECK(mat_is_zero(Y.nabla.apply_theta(0, B3)));
}

TEST_CASE("lang equation obstruction names the extension degree") {
  auto W = WittRing::make(5, 1, 4);
  Mat<WittElem> phi0(1, 1, W->zero());
  // the Teichmuller unit of order 4 becomes a (sigma - 1)-th power over the
  // degree-4 unramified extension, and only there
  phi0(0, 0) = W->teichmuller({2});
  CHECK_THROWS_WITH_AS(solve_lang(W, phi0),
                       "extend residue field: unit-root trivialization needs degree 4", Error);

  // 1 + p is norm-obstructed at every finite level
  phi0(0, 0) = W->from_int(6);
  CHECK_THROWS_WITH_AS(solve_lang(W, phi0),
                       "extend residue field: no trivialization found up to degree 4", Error);

  // solvable case: the identity
  phi0(0, 0) = W->one();
  auto B = solve_lang(W, phi0);
  CHECK((B(0, 0) - W->one()).is_zero());
}

TEST_CASE("derive_frobenius stays horizontal") {
  auto R = ring(5, 1, 4, 1, 1, 5);
  auto X = tate_like(R);
  std::mt19937_64 rng(62);
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<TruncatedSeries> f = {R->constant_int(1) + random_series(R, rng, 0.4).mul_p()};
    auto phi = FrobLift::make(f);
    auto Fphi = derive_frobenius(X, phi);
    CHECK(mat_is_zero(horizontality_defect(X, phi, Fphi, 0)));
  }
}
