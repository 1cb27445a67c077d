#include "logcrys/crystal.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace logcrys {

namespace {

using u64 = std::uint64_t;

std::string entry_witness(const std::string& what, int i, int j) {
  return what + " at entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// determinant over WittElem by Laplace DP over column subsets
WittElem det_w(const Mat<WittElem>& a, const WittRingPtr& W) {
  int k = a.rows;
  if (k == 0) return W->one();
  std::vector<WittElem> dp(std::size_t(1) << k, W->zero());
  dp[0] = W->one();
  for (u64 mask = 0; mask + 1 < (u64(1) << k); ++mask) {
    int row = __builtin_popcountll(mask);
    if (row >= k) continue;
    if (dp[mask].is_zero() && mask != 0) continue;
    int seen = 0;
    for (int j = 0; j < k; ++j) {
      if (mask & (u64(1) << j)) continue;
      WittElem term = dp[mask] * a(row, j);
      if ((row + j - seen) & 1) term = -term;
      dp[mask | (u64(1) << j)] += term;
      ++seen;
    }
  }
  return dp[(u64(1) << k) - 1];
}

// coefficients c_0..c_n of det(xI - M), c_n = 1
std::vector<WittElem> char_poly(const Mat<WittElem>& M, const WittRingPtr& W) {
  int n = M.rows;
  std::vector<WittElem> c(n + 1, W->zero());
  c[n] = W->one();
  for (int k = 1; k <= n; ++k) {
    WittElem sum = W->zero();
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      Mat<WittElem> sub(k, k, W->zero());
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = M(idx[i], idx[j]);
      sum += det_w(sub, W);
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    c[n - k] = (k % 2 == 1) ? -sum : sum;
  }
  return c;
}

struct HullPoint {
  long k;
  long v;
};

// lower convex hull slopes over the points; returns expanded per-unit slopes
std::vector<std::pair<long, long>> hull_slopes(const std::vector<HullPoint>& pts) {
  std::vector<HullPoint> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      if ((__int128)(b.v - a.v) * (p.k - a.k) >= (__int128)(p.v - a.v) * (b.k - a.k))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  std::vector<std::pair<long, long>> slopes;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    long dk = hull[i + 1].k - hull[i].k;
    long dv = hull[i].v - hull[i + 1].v;
    long g = std::gcd(std::abs(dv), dk);
    if (g == 0) g = 1;
    for (long t = 0; t < dk; ++t) slopes.emplace_back(dv / g, dk / g);
  }
  return slopes;
}

std::pair<long, long> reduce_frac(long num, long den) {
  long g = std::gcd(std::abs(num), std::abs(den));
  if (g == 0) return {0, 1};
  return {num / g, den / g};
}

// ---- residue-field linear algebra (precision-1 coordinates over F_p) ----

// particular solution of the column system sum_j x_j col_j = b over F_p
std::optional<std::vector<u64>> solve_fp(std::vector<std::vector<u64>> A, std::vector<u64> b,
                                         long p) {
  int m = static_cast<int>(A.size());
  int n = m ? static_cast<int>(A[0].size()) : static_cast<int>(b.size());
  auto inv_p = [p](u64 a) {
    u64 r = 1, base = a % static_cast<u64>(p), e = static_cast<u64>(p - 2);
    while (e) {
      if (e & 1) r = r * base % p;
      base = base * base % p;
      e >>= 1;
    }
    return r;
  };
  std::vector<std::vector<u64>> comb(m, std::vector<u64>(m, 0));
  for (int j = 0; j < m; ++j) comb[j][j] = 1;
  std::vector<int> pivot_col_of_row(n, -1);
  for (int j = 0; j < m; ++j) {
    int piv = -1;
    for (int i = 0; i < n; ++i)
      if (pivot_col_of_row[i] < 0 && A[j][i] % p) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    u64 d = inv_p(A[j][piv]);
    for (int i = 0; i < n; ++i) A[j][i] = A[j][i] % p * d % p;
    for (auto& v : comb[j]) v = v * d % p;
    for (int jj = 0; jj < m; ++jj) {
      if (jj == j) continue;
      u64 f = A[jj][piv] % p;
      if (!f) continue;
      for (int i = 0; i < n; ++i) A[jj][i] = (A[jj][i] + (p - f) * A[j][i]) % p;
      for (int i = 0; i < m; ++i) comb[jj][i] = (comb[jj][i] + (p - f) * comb[j][i]) % p;
    }
    pivot_col_of_row[piv] = j;
  }
  std::vector<u64> x(m, 0);
  std::vector<u64> resid = b;
  for (auto& v : resid) v %= p;
  for (int i = 0; i < n; ++i) {
    int j = pivot_col_of_row[i];
    if (j < 0) continue;
    u64 coef = resid[i] % p;
    if (!coef) continue;
    for (int t = 0; t < m; ++t) x[t] = (x[t] + coef * comb[j][t]) % p;
    for (int ii = 0; ii < n; ++ii) resid[ii] = (resid[ii] + (p - coef) * A[j][ii] % p) % p;
  }
  for (auto v : resid)
    if (v % p) return std::nullopt;
  return x;
}

// kernel basis of the column system over F_p (combinations of input columns)
std::vector<std::vector<u64>> kernel_fp(std::vector<std::vector<u64>> A, long p) {
  int m = static_cast<int>(A.size());
  int n = m ? static_cast<int>(A[0].size()) : 0;
  auto inv_p = [p](u64 a) {
    u64 r = 1, base = a % static_cast<u64>(p), e = static_cast<u64>(p - 2);
    while (e) {
      if (e & 1) r = r * base % p;
      base = base * base % p;
      e >>= 1;
    }
    return r;
  };
  std::vector<std::vector<u64>> comb(m, std::vector<u64>(m, 0));
  for (int j = 0; j < m; ++j) comb[j][j] = 1;
  std::vector<bool> used_row(n, false);
  for (int j = 0; j < m; ++j) {
    int piv = -1;
    for (int i = 0; i < n; ++i)
      if (!used_row[i] && A[j][i] % p) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    used_row[piv] = true;
    u64 d = inv_p(A[j][piv]);
    for (int i = 0; i < n; ++i) A[j][i] = A[j][i] % p * d % p;
    for (auto& v : comb[j]) v = v * d % p;
    for (int jj = 0; jj < m; ++jj) {
      if (jj == j) continue;
      u64 f = A[jj][piv] % p;
      if (!f) continue;
      for (int i = 0; i < n; ++i) A[jj][i] = (A[jj][i] + (p - f) * A[j][i]) % p;
      for (int i = 0; i < m; ++i) comb[jj][i] = (comb[jj][i] + (p - f) * comb[j][i]) % p;
    }
  }
  std::vector<std::vector<u64>> kernel;
  for (int j = 0; j < m; ++j) {
    bool zero = true;
    for (int i = 0; i < n; ++i)
      if (A[j][i] % p) zero = false;
    if (zero) kernel.push_back(comb[j]);
  }
  return kernel;
}

}  // namespace

// ---------------------------------------------------------------------------
// HodgeFCrystal basics

HodgeFCrystal::HodgeFCrystal(SeriesRingPtr r, int rk)
    : ring(std::move(r)), rank(rk), nabla(ring, rk), frob(identity_matrix(ring, rk)) {
  std::vector<int> all(rk);
  std::iota(all.begin(), all.end(), 0);
  fil = {all};
}

bool HodgeFCrystal::in_fil(int level, int index) const {
  auto s = fil_set(level);
  return std::find(s.begin(), s.end(), index) != s.end();
}

std::vector<int> HodgeFCrystal::fil_set(int level) const {
  if (level < 0) throw Error("HodgeFCrystal: negative flag level");
  if (level >= static_cast<int>(fil.size())) return {};
  return fil[level];
}

bool AxiomReport::all_pass() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

const AxiomReport::Item* AxiomReport::first_failure() const {
  for (const auto& it : items)
    if (!it.pass) return &it;
  return nullptr;
}

Mat<WittElem> evaluate_at_origin(const Mat<TruncatedSeries>& m) {
  if (m.a.empty()) throw Error("evaluate_at_origin: empty matrix");
  auto R = m.a.front().ring();
  std::vector<WittElem> zeros(R->vars(), R->witt()->zero());
  Mat<WittElem> out(m.rows, m.cols, R->witt()->zero());
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j).evaluate(zeros);
  return out;
}

// ---------------------------------------------------------------------------
// axioms

AxiomReport check_axioms(const HodgeFCrystal& X) {
  AxiomReport rep;
  const auto& R = *X.ring;
  const auto& W = R.witt();
  const int m = R.vars();

  auto add = [&rep](const std::string& axiom, bool pass, const std::string& witness) {
    rep.items.push_back({axiom, pass, pass ? std::string() : witness});
  };

  {  // integrability
    bool ok = true;
    std::string w;
    for (int i = 0; i < m && ok; ++i)
      for (int j = i + 1; j < m && ok; ++j)
        if (!mat_is_zero(X.nabla.integrability_defect(i, j))) {
          ok = false;
          w = entry_witness("integrability defect", i, j);
        }
    add("integrability", ok, w);
  }

  {  // flag shape
    bool ok = !X.fil.empty() && static_cast<int>(X.fil[0].size()) == X.rank;
    std::string w = "Fil^0 must be the full basis";
    for (std::size_t l = 0; ok && l + 1 < X.fil.size(); ++l)
      for (int idx : X.fil[l + 1])
        if (!X.in_fil(static_cast<int>(l), idx)) {
          ok = false;
          w = "Fil^" + std::to_string(l + 1) + " not contained in Fil^" + std::to_string(l);
        }
    add("flag_shape", ok, w);
  }

  {  // weight bookkeeping
    int rho1 = 0;
    while (X.fil_rank(rho1 + 1) == X.rank) ++rho1;
    int rho2 = static_cast<int>(X.fil.size()) - 1;
    while (rho2 > 0 && X.fil_rank(rho2) == 0) --rho2;
    bool ok = (rho1 + rho2 == X.weight);
    add("weight", ok, "flag weight " + std::to_string(rho1 + rho2) + " != declared weight");
  }

  {  // Griffiths transversality
    bool ok = true;
    std::string w;
    for (int level = 0; level + 1 < static_cast<int>(X.fil.size()) && ok; ++level)
      for (int i = 0; i < m && ok; ++i)
        for (int l : X.fil_set(level + 1))
          for (int k = 0; k < X.rank && ok; ++k) {
            if (X.in_fil(level, k)) continue;
            if (!X.nabla.M[i](k, l).is_zero()) {
              ok = false;
              w = "nabla(theta_" + std::to_string(i) + ") maps Fil^" + std::to_string(level + 1) +
                  " basis vector " + std::to_string(l) + " outside Fil^" + std::to_string(level);
            }
          }
    add("transversality", ok, w);
  }

  {  // p-divisibility
    bool ok = true;
    std::string w;
    for (int level = 1; level < static_cast<int>(X.fil.size()) && ok; ++level)
      for (int l : X.fil_set(level))
        for (int k = 0; k < X.rank && ok; ++k) {
          const auto& e = X.frob(k, l);
          if (e.denom() != 0) {
            ok = false;
            w = "Frobenius entry not integral";
            break;
          }
          for (const auto& c : e.coeffs())
            if (c.valuation() < std::min(level, c.prec())) {
              ok = false;
              w = entry_witness("Frobenius image of Fil^" + std::to_string(level) +
                                    " vector not divisible by p^" + std::to_string(level),
                                k, l);
              break;
            }
        }
    add("p_divisibility", ok, w);
  }

  {  // horizontality of F(psi)
    bool ok = true;
    std::string w;
    auto psi = FrobLift::standard(X.ring);
    for (int i = 0; i < m && ok; ++i)
      if (!mat_is_zero(horizontality_defect(X, psi, X.frob, i))) {
        ok = false;
        w = "horizontality defect in direction " + std::to_string(i);
      }
    add("frobenius_horizontal", ok, w);
  }

  {  // quasi-nilpotence at truncation level
    bool ok = true;
    std::string w;
    int cap = static_cast<int>(W->prime()) * X.rank * W->precision() + R.trunc() +
              static_cast<int>(W->prime());
    for (int i = 0; i < m && ok; ++i) {
      auto cur = identity_matrix(X.ring, X.rank);
      bool vanished = false;
      for (int n = 0; n < cap; ++n) {
        if (mat_is_zero(cur)) {
          vanished = true;
          break;
        }
        cur = matsub(X.nabla.apply_theta(i, cur), mat_scale(cur, R.constant_int(n)));
      }
      if (!vanished && !mat_is_zero(cur)) {
        ok = false;
        w = "falling powers of nabla(theta_" + std::to_string(i) +
            ") do not vanish by n = " + std::to_string(cap);
      }
    }
    add("quasi_nilpotence", ok, w);
  }

  if (X.pairing) {
    const auto& J = *X.pairing;
    int sign = (X.weight % 2 == 0) ? 1 : -1;
    {
      auto Jt = mat_transpose(J);
      auto ref = sign > 0 ? J : mat_apply(J, [](const TruncatedSeries& s) { return -s; });
      add("pairing_symmetry", mat_is_zero(matsub(Jt, ref)), "pairing not (-1)^weight symmetric");
    }
    {
      bool ok = true;
      try {
        (void)mat_inverse(J, R.constant_int(1), R.zero());
      } catch (const Error&) {
        ok = false;
      }
      add("pairing_perfect", ok, "pairing matrix not invertible over the series ring");
    }
    {
      bool ok = true;
      std::string w;
      for (int i = 0; i < m && ok; ++i) {
        auto lhs = mat_theta(J, i);
        auto rhs = matadd(matmul(mat_transpose(X.nabla.M[i]), J), matmul(J, X.nabla.M[i]));
        if (!mat_is_zero(matsub(lhs, rhs))) {
          ok = false;
          w = "pairing not horizontal in direction " + std::to_string(i);
        }
      }
      add("pairing_horizontal", ok, w);
    }
    {
      bool ok = true;
      std::string w;
      for (int level = 0; level <= X.weight && ok; ++level)
        for (int k : X.fil_set(level))
          for (int l : X.fil_set(X.weight + 1 - level))
            if (!J(k, l).is_zero()) {
              ok = false;
              w = "<Fil^" + std::to_string(level) + ", Fil^" +
                  std::to_string(X.weight + 1 - level) + "> != 0";
            }
      add("pairing_flag_orthogonality", ok, w);
    }
    {
      auto psi = FrobLift::standard(X.ring);
      auto lhs = matmul(mat_transpose(X.frob), matmul(J, X.frob));
      auto rhs = mat_scale(psi(J), R.constant_int(1).mul_p(X.weight));
      add("pairing_frobenius", mat_is_zero(matsub(lhs, rhs)), "<Fx,Fy> != p^weight psi<x,y>");
    }
  }

  return rep;
}

// ---------------------------------------------------------------------------
// polygons

std::string Polygon::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(slopes[i].first);
    if (slopes[i].second != 1) s += "/" + std::to_string(slopes[i].second);
  }
  return s + "}";
}

Polygon hodge_polygon(const HodgeFCrystal& X) {
  Polygon P;
  for (int level = 0;; ++level) {
    int mult = X.fil_rank(level) - X.fil_rank(level + 1);
    for (int t = 0; t < mult; ++t) P.slopes.emplace_back(level, 1);
    if (X.fil_rank(level + 1) == 0) break;
  }
  std::sort(P.slopes.begin(), P.slopes.end(),
            [](auto a, auto b) { return a.first * b.second < b.first * a.second; });
  return P;
}

Polygon newton_polygon(const HodgeFCrystal& X) {
  const auto& W = X.ring->witt();
  auto phi0 = evaluate_at_origin(X.frob);
  Mat<WittElem> lin = phi0;
  for (int k = 1; k < W->degree(); ++k)
    lin = matmul(lin, mat_apply(phi0, [k](const WittElem& w) { return w.sigma(k); }));
  auto cp = char_poly(lin, W);

  std::vector<HullPoint> with_prec, known_only;
  for (int k = 0; k <= X.rank; ++k) {
    long v = cp[k].valuation();
    with_prec.push_back({k, v});
    if (!cp[k].is_zero()) known_only.push_back({k, v});
  }
  if (hull_slopes(with_prec) != hull_slopes(known_only))
    throw Error("raise N: insufficient precision to resolve Newton slopes");

  Polygon P;
  long s = W->degree();
  for (auto [num, den] : hull_slopes(known_only)) P.slopes.push_back(reduce_frac(num, den * s));
  std::sort(P.slopes.begin(), P.slopes.end(),
            [](auto a, auto b) { return a.first * b.second < b.first * a.second; });
  return P;
}

bool is_ordinary(const HodgeFCrystal& X) { return hodge_polygon(X) == newton_polygon(X); }

// ---------------------------------------------------------------------------
// linear algebra over the series ring

Mat<TruncatedSeries> solve_in_span(const Mat<TruncatedSeries>& B, const Mat<TruncatedSeries>& v) {
  if (B.rows != v.rows) throw Error("solve_in_span: shape mismatch");
  auto ring = B.a.front().ring();
  Mat<TruncatedSeries> A = B, R = v;
  std::vector<int> pivot_row(B.cols, -1);
  std::vector<bool> used(B.rows, false);
  for (int j = 0; j < B.cols; ++j) {
    int piv = -1;
    for (int i = 0; i < B.rows; ++i)
      if (!used[i] && A(i, j).is_unit()) {
        piv = i;
        break;
      }
    if (piv < 0) throw Error("solve_in_span: no unit pivot (not a split submodule)");
    used[piv] = true;
    pivot_row[j] = piv;
    auto d = A(piv, j).inv();
    for (int jj = 0; jj < B.cols; ++jj) A(piv, jj) = A(piv, jj) * d;
    for (int jj = 0; jj < v.cols; ++jj) R(piv, jj) = R(piv, jj) * d;
    for (int i = 0; i < B.rows; ++i) {
      if (i == piv) continue;
      auto f = A(i, j);
      if (f.is_zero()) continue;
      for (int jj = 0; jj < B.cols; ++jj) A(i, jj) = A(i, jj) - f * A(piv, jj);
      for (int jj = 0; jj < v.cols; ++jj) R(i, jj) = R(i, jj) - f * R(piv, jj);
    }
  }
  for (int i = 0; i < B.rows; ++i) {
    if (used[i]) continue;
    for (int jj = 0; jj < v.cols; ++jj)
      if (!R(i, jj).is_zero())
        throw Error("solve_in_span: vector not in the column span at tracked precision");
  }
  Mat<TruncatedSeries> X(B.cols, v.cols, ring->zero());
  for (int j = 0; j < B.cols; ++j)
    for (int jj = 0; jj < v.cols; ++jj) X(j, jj) = R(pivot_row[j], jj);
  return X;
}

// ---------------------------------------------------------------------------
// Frobenius derivation and horizontality

Mat<TruncatedSeries> derive_frobenius(const HodgeFCrystal& X, const FrobLift& phi) {
  if (phi.standard_lift()) return X.frob;
  auto psi = FrobLift::standard(X.ring);
  return matmul(X.frob, chi_transport(X.nabla, phi, psi));
}

Mat<TruncatedSeries> horizontality_defect(const HodgeFCrystal& X, const FrobLift& phi,
                                          const Mat<TruncatedSeries>& frob_phi, int i) {
  auto c = phi.dlog_pullback_matrix();
  auto lhs = matadd(mat_theta(frob_phi, i), matmul(X.nabla.M[i], frob_phi));
  auto rhs = zero_matrix(X.ring, X.rank, X.rank);
  for (int j = 0; j < X.ring->vars(); ++j)
    rhs = matadd(rhs, mat_scale(matmul(frob_phi, phi(X.nabla.M[j])), c(i, j)));
  return matsub(lhs, rhs);
}

// ---------------------------------------------------------------------------
// slope filtration

namespace {

std::pair<Mat<TruncatedSeries>, bool> echelon_units(const SeriesRingPtr& ring,
                                                    Mat<TruncatedSeries> cols) {
  int n = cols.rows;
  std::vector<int> basis_cols;
  std::vector<bool> used_row(n, false), taken(cols.cols, false);
  while (true) {
    int best_col = -1, best_row = n;
    for (int j = 0; j < cols.cols; ++j) {
      if (taken[j]) continue;
      for (int i = 0; i < n; ++i) {
        if (used_row[i]) continue;
        if (cols(i, j).is_unit()) {
          if (i < best_row) {
            best_row = i;
            best_col = j;
          }
          break;
        }
      }
    }
    if (best_col < 0) break;
    used_row[best_row] = true;
    taken[best_col] = true;
    basis_cols.push_back(best_col);
    auto d = cols(best_row, best_col).inv();
    for (int i = 0; i < n; ++i) cols(i, best_col) = cols(i, best_col) * d;
    for (int j = 0; j < cols.cols; ++j) {
      if (j == best_col) continue;
      auto f = cols(best_row, j);
      if (f.is_zero()) continue;
      for (int i = 0; i < n; ++i) cols(i, j) = cols(i, j) - f * cols(i, best_col);
    }
  }
  bool leftover_zero = true;
  for (int j = 0; j < cols.cols; ++j) {
    if (taken[j]) continue;
    for (int i = 0; i < n; ++i)
      if (!cols(i, j).is_zero()) leftover_zero = false;
  }
  Mat<TruncatedSeries> basis(n, static_cast<int>(basis_cols.size()), ring->zero());
  for (std::size_t b = 0; b < basis_cols.size(); ++b)
    for (int i = 0; i < n; ++i) basis(i, static_cast<int>(b)) = cols(i, basis_cols[b]);
  return {basis, leftover_zero};
}

TruncatedSeries exact_div_p_series(const TruncatedSeries& s) {
  auto out = s.div_p_value(1);
  if (!out.is_integral()) throw Error("slope filtration: expected p-divisible block");
  return out;
}

SlopeFiltration slope_work(const HodgeFCrystal& X) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  auto psi = FrobLift::standard(ring);

  SlopeFiltration out;
  if (X.fil_rank(1) == 0) {  // unit-root: everything has slope 0
    out.U = {identity_matrix(ring, X.rank)};
    out.Hi = {identity_matrix(ring, X.rank)};
    return out;
  }

  int g0 = X.rank - X.fil_rank(1);
  Mat<TruncatedSeries> U0(X.rank, 0, ring->zero());
  if (g0 > 0) {
    auto P = X.frob;
    bool stable = false;
    for (int k = 0; k <= W->precision() + 2; ++k) {
      auto [basis, leftover_zero] = echelon_units(ring, P);
      if (basis.cols == g0 && leftover_zero) {
        U0 = basis;
        stable = true;
        break;
      }
      P = matmul(X.frob, psi(P));
    }
    if (!stable) throw Error("precision exhausted: unit-root span did not stabilize");
  }

  // splitting basis [U0 | Fil^1 adapted vectors]
  auto fil1 = X.fil_set(1);
  int h = static_cast<int>(fil1.size());
  Mat<TruncatedSeries> B(X.rank, X.rank, ring->zero());
  for (int j = 0; j < g0; ++j)
    for (int i = 0; i < X.rank; ++i) B(i, j) = U0(i, j);
  for (int j = 0; j < h; ++j) B(fil1[j], g0 + j) = ring->constant_int(1);
  Mat<TruncatedSeries> Binv;
  try {
    Binv = mat_inverse(B, ring->constant_int(1), ring->zero());
  } catch (const Error&) {
    throw Error("precision exhausted: H = U_0 + Fil^1 splitting failed");
  }

  auto frob1 = matmul(Binv, matmul(X.frob, psi(B)));
  std::vector<Mat<TruncatedSeries>> conn1;
  for (int i = 0; i < ring->vars(); ++i)
    conn1.push_back(matmul(Binv, matadd(mat_theta(B, i), matmul(X.nabla.M[i], B))));

  for (int i = g0; i < X.rank; ++i)
    for (int j = 0; j < g0; ++j) {
      if (!frob1(i, j).is_zero())
        throw Error("slope filtration: unit-root part not Frobenius-stable");
      for (int v = 0; v < ring->vars(); ++v)
        if (!conn1[v](i, j).is_zero())
          throw Error("slope filtration: unit-root part not connection-stable");
    }

  // quotient crystal on the Fil^1 block, Frobenius divided by p
  HodgeFCrystal Q(ring, h);
  Q.weight = std::max(X.weight - 1, 0);
  Q.frob = zero_matrix(ring, h, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) Q.frob(i, j) = exact_div_p_series(frob1(g0 + i, g0 + j));
  Q.nabla = Connection(ring, h);
  for (int v = 0; v < ring->vars(); ++v)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j) Q.nabla.M[v](i, j) = conn1[v](g0 + i, g0 + j);
  Q.fil.clear();
  for (std::size_t level = 1; level < X.fil.size(); ++level) {
    std::vector<int> setq;
    for (int idx : X.fil[level]) {
      auto it = std::find(fil1.begin(), fil1.end(), idx);
      if (it == fil1.end()) throw Error("slope filtration: flag not nested");
      setq.push_back(static_cast<int>(it - fil1.begin()));
    }
    std::sort(setq.begin(), setq.end());
    Q.fil.push_back(setq);
  }

  auto sub = slope_work(Q);

  auto lift = [&](const Mat<TruncatedSeries>& cols) {
    Mat<TruncatedSeries> padded(X.rank, cols.cols, ring->zero());
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < cols.cols; ++j) padded(g0 + i, j) = cols(i, j);
    return matmul(B, padded);
  };

  out.U.push_back(U0);
  for (std::size_t i = 0; i < sub.U.size(); ++i) {
    auto lifted = lift(sub.U[i]);
    Mat<TruncatedSeries> Ui(X.rank, g0 + lifted.cols, ring->zero());
    for (int j = 0; j < g0; ++j)
      for (int r = 0; r < X.rank; ++r) Ui(r, j) = U0(r, j);
    for (int j = 0; j < lifted.cols; ++j)
      for (int r = 0; r < X.rank; ++r) Ui(r, g0 + j) = lifted(r, j);
    out.U.push_back(Ui);
  }
  out.Hi.push_back(U0);
  for (std::size_t i = 0; i < sub.Hi.size(); ++i) out.Hi.push_back(lift(sub.Hi[i]));
  return out;
}

}  // namespace

SlopeFiltration slope_filtration(const HodgeFCrystal& X) {
  if (!is_ordinary(X)) throw Error("slope filtration requires an ordinary crystal");
  auto out = slope_work(X);
  const auto ring = X.ring;
  auto psi = FrobLift::standard(ring);

  // Prop UH postconditions, asserted
  for (std::size_t i = 0; i < out.U.size(); ++i) {
    const auto& U = out.U[i];
    if (U.cols > 0) {
      (void)solve_in_span(U, matmul(X.frob, psi(U)));
      for (int v = 0; v < ring->vars(); ++v) (void)solve_in_span(U, X.nabla.apply_theta(v, U));
    }
    auto fset = X.fil_set(static_cast<int>(i) + 1);
    if (U.cols + static_cast<int>(fset.size()) != X.rank)
      throw Error("slope filtration postcondition failed: U_i + Fil^{i+1} rank count");
    Mat<TruncatedSeries> S(X.rank, X.rank, ring->zero());
    for (int j = 0; j < U.cols; ++j)
      for (int r = 0; r < X.rank; ++r) S(r, j) = U(r, j);
    for (std::size_t j = 0; j < fset.size(); ++j)
      S(fset[j], U.cols + static_cast<int>(j)) = ring->constant_int(1);
    (void)mat_inverse(S, ring->constant_int(1), ring->zero());
  }
  {
    int total = 0;
    for (const auto& HI : out.Hi) total += HI.cols;
    if (total != X.rank) throw Error("slope filtration postcondition failed: splitting ranks");
    Mat<TruncatedSeries> S(X.rank, X.rank, ring->zero());
    int col = 0;
    for (const auto& HI : out.Hi)
      for (int j = 0; j < HI.cols; ++j, ++col)
        for (int r = 0; r < X.rank; ++r) S(r, col) = HI(r, j);
    (void)mat_inverse(S, ring->constant_int(1), ring->zero());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lang equation and unit-root basis

namespace {

std::vector<u64> mat_residue_coords(const Mat<WittElem>& M, const WittRingPtr& W) {
  int s = W->degree();
  std::vector<u64> out;
  out.reserve(static_cast<std::size_t>(M.rows) * M.cols * s);
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j) {
      auto r = M(i, j).reduce(1);
      for (int c = 0; c < s; ++c) out.push_back(r.coords()[c]);
    }
  return out;
}

std::vector<std::vector<u64>> lang_linear_map(const Mat<WittElem>& phi0, const WittRingPtr& W,
                                              int g) {
  std::vector<std::vector<u64>> cols;
  int s = W->degree();
  auto phi0r = mat_apply(phi0, [](const WittElem& w) { return w.reduce(1); });
  for (int bi = 0; bi < g; ++bi)
    for (int bj = 0; bj < g; ++bj)
      for (int c = 0; c < s; ++c) {
        Mat<WittElem> X(g, g, W->zero(1));
        std::vector<u64> coords(s, 0);
        coords[c] = 1;
        X(bi, bj) = W->from_coords(coords, 1);
        auto Y =
            matsub(X, matmul(phi0r, mat_apply(X, [](const WittElem& w) { return w.sigma(); })));
        cols.push_back(mat_residue_coords(Y, W));
      }
  return cols;
}

Mat<WittElem> coords_to_matrix(const std::vector<u64>& v, const WittRingPtr& W, int g, int prec) {
  int s = W->degree();
  Mat<WittElem> X(g, g, W->zero(prec));
  std::size_t idx = 0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      std::vector<u64> c(s);
      for (int cc = 0; cc < s; ++cc) c[cc] = v[idx * s + cc];
      X(i, j) = W->from_coords(c, prec);
      ++idx;
    }
  return X;
}

bool invertible_residue(const Mat<WittElem>& X, const WittRingPtr& W) {
  return det_w(mat_apply(X, [](const WittElem& w) { return w.reduce(1); }), W).is_unit();
}

// kernel vectors are coordinate vectors in the matrix-unit basis (i,j,c)
std::optional<Mat<WittElem>> find_invertible_in_kernel(const std::vector<std::vector<u64>>& kernel,
                                                       const Mat<WittElem>& phi0,
                                                       const WittRingPtr& W, int g) {
  long p = W->prime();
  if (kernel.empty()) return std::nullopt;
  {  // prefer the identity when it solves the residue equation
    auto I = mat_identity(g, W->one(1), W->zero(1));
    auto r = matsub(I, matmul(mat_apply(phi0, [](const WittElem& w) { return w.reduce(1); }),
                              mat_apply(I, [](const WittElem& w) { return w.sigma(); })));
    if (mat_is_zero(r)) return I;
  }
  auto make = [&](const std::vector<u64>& combo) {
    std::vector<u64> acc(kernel[0].size(), 0);
    for (std::size_t b = 0; b < kernel.size(); ++b) {
      if (!combo[b]) continue;
      for (std::size_t col = 0; col < kernel[b].size(); ++col)
        acc[col] = (acc[col] + combo[b] * kernel[b][col]) % static_cast<u64>(p);
    }
    return coords_to_matrix(acc, W, g, 1);
  };
  for (std::size_t b = 0; b < kernel.size(); ++b) {
    std::vector<u64> combo(kernel.size(), 0);
    combo[b] = 1;
    auto X = make(combo);
    if (invertible_residue(X, W)) return X;
  }
  std::mt19937_64 rng(7);
  for (int tries = 0; tries < 500; ++tries) {
    std::vector<u64> combo(kernel.size());
    for (auto& c : combo) c = rng() % static_cast<u64>(p);
    auto X = make(combo);
    if (invertible_residue(X, W)) return X;
  }
  return std::nullopt;
}

std::optional<WittElem> embed_generator(const WittRingPtr& Wsmall, const WittRingPtr& Wbig) {
  long p = Wsmall->prime();
  int s = Wsmall->degree(), sd = Wbig->degree();
  if (s == 1) return Wbig->one(1);
  u64 qs = 1, qd = 1;
  for (int i = 0; i < s; ++i) qs *= static_cast<u64>(p);
  for (int i = 0; i < sd; ++i) qd *= static_cast<u64>(p);
  u64 step = (qd - 1) / (qs - 1);
  auto zeta = Wbig->zeta().reduce(1);
  const auto& mp = Wsmall->min_poly();
  for (u64 k = 1; k < qs && k < 4000; ++k) {
    auto cand = zeta.pow(k * step % (qd - 1));
    auto acc = Wbig->zero(1);
    auto pw = Wbig->one(1);
    for (int c = 0; c <= s; ++c) {
      acc += pw.mul_int(static_cast<std::int64_t>(mp[c] % static_cast<u64>(p)));
      pw = pw * cand;
    }
    if (acc.is_zero()) return cand;
  }
  return std::nullopt;
}

}  // namespace

namespace {

// one attempt over a fixed ring; nullopt when the residue equation or a digit
// lifting step is obstructed
std::optional<Mat<WittElem>> solve_lang_attempt(const WittRingPtr& W, const Mat<WittElem>& phi0) {
  int g = phi0.rows;
  auto L = lang_linear_map(phi0, W, g);
  auto kernel = kernel_fp(L, W->prime());
  auto Y0 = find_invertible_in_kernel(kernel, phi0, W, g);
  if (!Y0) return std::nullopt;

  Mat<WittElem> B(g, g, W->zero());
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) B(i, j) = W->from_coords((*Y0)(i, j).coords(), W->precision());
  for (int k = 1; k < W->precision(); ++k) {
    auto R = matsub(matmul(phi0, mat_apply(B, [](const WittElem& w) { return w.sigma(); })), B);
    bool zero = true;
    for (const auto& e : R.a)
      if (!e.is_zero()) zero = false;
    if (zero) break;
    Mat<WittElem> Rk(g, g, W->zero(1));
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        if (R(i, j).valuation() < std::min(k, R(i, j).prec()))
          throw Error("solve_lang: lifting defect has unexpected valuation");
        Rk(i, j) = R(i, j).is_zero() ? W->zero(1) : R(i, j).div_exact_p(k).reduce(1);
      }
    auto sol = solve_fp(L, mat_residue_coords(Rk, W), W->prime());
    if (!sol) return std::nullopt;
    auto Xk = coords_to_matrix(*sol, W, g, W->precision());
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) B(i, j) += Xk(i, j).mul_p(k);
  }
  auto check = matsub(matmul(phi0, mat_apply(B, [](const WittElem& w) { return w.sigma(); })), B);
  for (const auto& e : check.a)
    if (!e.is_zero()) return std::nullopt;
  return B;
}

}  // namespace

Mat<WittElem> solve_lang(const WittRingPtr& W, const Mat<WittElem>& phi0) {
  int g = phi0.rows;
  if (auto B = solve_lang_attempt(W, phi0)) return *B;

  // diagnose: brute force over extension degrees with a full-precision embedding
  for (int d = 2; d <= 4; ++d) {
    WittRingPtr Wd;
    try {
      Wd = WittRing::make(W->prime(), W->degree() * d, W->precision());
    } catch (const Error&) {
      break;
    }
    auto gen1 = embed_generator(W, Wd);
    if (!gen1) continue;
    // the Teichmuller representative over the residue image is the exact root
    auto gen = Wd->teichmuller(gen1->coords());
    Mat<WittElem> phi0d(g, g, Wd->zero());
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        auto acc = Wd->zero();
        auto pw = Wd->one();
        for (int c = 0; c < W->degree(); ++c) {
          acc += pw.mul_int(static_cast<std::int64_t>(phi0(i, j).coords()[c]));
          pw = pw * gen;
        }
        phi0d(i, j) = acc.reduce(phi0(i, j).prec());
      }
    if (solve_lang_attempt(Wd, phi0d))
      throw Error("extend residue field: unit-root trivialization needs degree " +
                  std::to_string(W->degree() * d));
  }
  throw Error("extend residue field: no trivialization found up to degree " +
              std::to_string(4 * W->degree()));
}

Mat<TruncatedSeries> unit_root_basis(const HodgeFCrystal& X) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  auto phi0 = evaluate_at_origin(X.frob);
  if (!det_w(phi0, W).is_unit())
    throw Error("unit_root_basis: Frobenius not invertible over the series ring");

  auto B0 = solve_lang(W, phi0);
  auto psi = FrobLift::standard(ring);
  Mat<TruncatedSeries> B(X.rank, X.rank, ring->zero());
  for (int i = 0; i < X.rank; ++i)
    for (int j = 0; j < X.rank; ++j) B(i, j) = ring->constant(B0(i, j));

  int steps = 2;
  long long deg = 1;
  while (deg < ring->trunc()) {
    deg *= W->prime();
    ++steps;
  }
  for (int k = 0; k < steps; ++k) B = matmul(X.frob, psi(B));
  if (!mat_is_zero(matsub(matmul(X.frob, psi(B)), B)))
    throw Error("precision exhausted: unit-root basis iteration did not converge");
  for (int i = 0; i < ring->vars(); ++i)
    if (!mat_is_zero(X.nabla.apply_theta(i, B)))
      throw Error("unit_root_basis: columns are not horizontal (input not a unit-root F-crystal)");
  return B;
}

}  // namespace logcrys
