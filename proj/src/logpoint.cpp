#include "logcrys/logpoint.hpp"

namespace logcrys {

LogPointFCrystal::LogPointFCrystal(WittRingPtr w, int rk, int l)
    : W(std::move(w)), rank(rk), log_rank(l), F(identity_wmatrix(W, rk)) {
  N.assign(l, zero_wmatrix(W, rk, rk));
  std::vector<int> all(rk);
  for (int i = 0; i < rk; ++i) all[i] = i;
  fil = {all};
}

bool LogPointFCrystal::nilpotents_commute() const {
  for (std::size_t i = 0; i < N.size(); ++i)
    for (std::size_t j = i + 1; j < N.size(); ++j)
      if (!mat_is_zero(matsub(matmul(N[i], N[j]), matmul(N[j], N[i])))) return false;
  return true;
}

bool LogPointFCrystal::nilpotents_nilpotent() const {
  int cap = rank * W->precision() * static_cast<int>(W->prime()) + 2;
  for (const auto& Ni : N) {
    auto cur = Ni;
    bool vanished = mat_is_zero(cur);
    for (int k = 0; k < cap && !vanished; ++k) {
      cur = matmul(cur, Ni);
      vanished = mat_is_zero(cur);
    }
    if (!vanished) return false;
  }
  return true;
}

bool LogPointFCrystal::twist_relation() const {
  // as semilinear maps: N_i F = p F sigma(N_i) on coordinate columns
  for (const auto& Ni : N) {
    auto lhs = matmul(Ni, F);
    auto rhs = matmul(F, mat_apply(Ni, [](const WittElem& w) { return w.sigma(); }));
    rhs = mat_apply(rhs, [](const WittElem& w) { return w.mul_p(); });
    if (!mat_is_zero(matsub(lhs, rhs))) return false;
  }
  return true;
}

std::vector<Mat<WittElem>> connection_to_nilpotents(const std::vector<Mat<WittElem>>& nabla) {
  for (std::size_t i = 0; i < nabla.size(); ++i)
    for (std::size_t j = i + 1; j < nabla.size(); ++j)
      if (!mat_is_zero(matsub(matmul(nabla[i], nabla[j]), matmul(nabla[j], nabla[i]))))
        throw Error("connection_to_nilpotents: connection not integrable");
  return nabla;
}

std::vector<Mat<WittElem>> nilpotents_to_connection(const std::vector<Mat<WittElem>>& N) {
  for (std::size_t i = 0; i < N.size(); ++i)
    for (std::size_t j = i + 1; j < N.size(); ++j)
      if (!mat_is_zero(matsub(matmul(N[i], N[j]), matmul(N[j], N[i]))))
        throw Error("nilpotents_to_connection: operators do not commute");
  return N;
}

std::vector<WittElem> LogWPointMap::point_values() const {
  std::vector<WittElem> v;
  const auto& W = ring->witt();
  for (int i = 0; i < ring->log_vars(); ++i) v.push_back(W->zero());
  for (const auto& e : eps) v.push_back(e);
  return v;
}

std::vector<WittElem> LogWPointMap::gamma() const {
  std::vector<WittElem> g = x;
  const auto& W = ring->witt();
  for (const auto& e : eps) g.push_back(W->one() + e);
  return g;
}

LogPointResidueData LogPointResidueData::augmentation(const SeriesRingPtr& ring) {
  LogPointResidueData d;
  int r = ring->log_vars();
  d.log_rank = r;
  for (int i = 0; i < r; ++i) {
    std::vector<int> unit(r, 0);
    unit[i] = 1;
    d.f0.push_back(unit);
    d.g0.push_back(std::vector<std::uint64_t>(ring->witt()->degree(), 0));
    d.g0.back()[0] = 1;
  }
  return d;
}

LogWPointMap teichmuller_point(const FrobLift& phi, const LogPointResidueData& e0) {
  const auto ring = phi.ring();
  const auto& W = ring->witt();
  const int r = ring->log_vars();
  const int m = ring->vars();
  if (static_cast<int>(e0.f0.size()) != r || static_cast<int>(e0.g0.size()) != r)
    throw Error("teichmuller_point: residue data arity mismatch");
  for (const auto& f : e0.f0) {
    bool zero = true;
    for (int c : f)
      if (c) zero = false;
    if (zero) throw Error("teichmuller_point: f0(alpha_i) = 0 is not allowed");
  }

  LogWPointMap e;
  e.ring = ring;
  e.log_rank = e0.log_rank;
  e.f0 = e0.f0;
  for (int i = 0; i < r; ++i) e.x.push_back(W->teichmuller(e0.g0[i]));
  e.eps.assign(m - r, W->zero());

  // joint contraction x -> sigma^{-1}(x^p f(point)); each pass gains a digit
  for (int it = 0; it < W->precision() + 2; ++it) {
    auto vals = e.point_values();
    for (int i = 0; i < r; ++i) {
      auto fv = phi.twists()[i].evaluate(vals);
      e.x[i] = (e.x[i].pow(static_cast<std::uint64_t>(W->prime())) * fv).sigma(-1);
    }
    for (int i = r; i < m; ++i) {
      auto fv = phi.twists()[i].evaluate(vals);
      auto y = W->one() + e.eps[i - r];
      y = (y.pow(static_cast<std::uint64_t>(W->prime())) * fv).sigma(-1);
      e.eps[i - r] = y - W->one();
    }
  }
  for (const auto& d : teichmuller_defect(phi, e))
    if (!d.is_zero()) throw Error("teichmuller_point: iteration did not converge");
  return e;
}

std::vector<WittElem> teichmuller_defect(const FrobLift& phi, const LogWPointMap& e) {
  const auto ring = phi.ring();
  const auto& W = ring->witt();
  auto vals = e.point_values();
  auto gam = e.gamma();
  std::vector<WittElem> out;
  for (int i = 0; i < ring->vars(); ++i) {
    auto fv = phi.twists()[i].evaluate(vals);
    out.push_back(gam[i].sigma() - gam[i].pow(static_cast<std::uint64_t>(W->prime())) * fv);
  }
  return out;
}

LogPointFCrystal pullback(const HodgeFCrystal& X, const LogWPointMap& e, const FrobLift& phi) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  const int r = ring->log_vars();
  auto vals = e.point_values();

  LogPointFCrystal out(W, X.rank, e.log_rank);
  for (int mu = 0; mu < e.log_rank; ++mu)
    for (int nu = 0; nu < r; ++nu) {
      if (!e.f0[nu][mu]) continue;
      for (int i = 0; i < X.rank; ++i)
        for (int j = 0; j < X.rank; ++j)
          out.N[mu](i, j) += X.nabla.M[nu](i, j).evaluate(vals).mul_int(e.f0[nu][mu]);
    }

  auto frob_phi = derive_frobenius(X, phi);
  for (int i = 0; i < X.rank; ++i)
    for (int j = 0; j < X.rank; ++j) out.F(i, j) = frob_phi(i, j).evaluate(vals);

  out.fil = X.fil;
  return out;
}

Mat<WittElem> compare_pullbacks(const HodgeFCrystal& X, const LogPointResidueData& e0,
                                const FrobLift& phi1, const FrobLift& phi2) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  const int m = ring->vars();
  auto e1 = teichmuller_point(phi1, e0);
  auto e2 = teichmuller_point(phi2, e0);
  auto g1 = e1.gamma(), g2 = e2.gamma();
  auto vals2 = e2.point_values();

  std::vector<WittElem> h;  // gamma(phi1)/gamma(phi2) - 1, in pW
  for (int i = 0; i < m; ++i) {
    auto q = g1[i] * g2[i].inv() - W->one();
    if (!q.is_zero() && q.valuation() < 1)
      throw Error("compare_pullbacks: point ratio not 1 mod p");
    h.push_back(q);
  }

  const long long p = W->prime();
  const int cap =
      static_cast<int>((static_cast<long long>(W->precision()) * (p - 1) + (p - 3)) / (p - 2)) + 1;
  std::vector<std::vector<WittElem>> gam(m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k <= cap; ++k) gam[i].push_back(W->divided_power(h[i], k));

  auto T = identity_wmatrix(W, X.rank);
  std::vector<Exponents> shell{Exponents(m, 0)};
  std::vector<Mat<TruncatedSeries>> shell_mats{identity_matrix(ring, X.rank)};
  for (int d = 1; d <= cap; ++d) {
    std::vector<Exponents> next;
    std::vector<Mat<TruncatedSeries>> next_mats;
    bool alive = false;
    for (std::size_t s = 0; s < shell.size(); ++s) {
      for (int i = 0; i < m; ++i) {
        bool lowest = true;
        for (int j = 0; j < i; ++j)
          if (shell[s][j] != 0) lowest = false;
        if (!lowest) continue;
        Exponents n = shell[s];
        n[i] += 1;
        auto stepped = X.nabla.apply_theta(i, shell_mats[s]);
        auto mat = matsub(stepped, mat_scale(shell_mats[s], ring->constant_int(n[i] - 1)));
        if (!mat_is_zero(mat)) alive = true;
        next.push_back(std::move(n));
        next_mats.push_back(std::move(mat));
      }
    }
    for (std::size_t s = 0; s < next.size(); ++s) {
      if (mat_is_zero(next_mats[s])) continue;
      WittElem coeff = W->one();
      for (int i = 0; i < m; ++i) coeff = coeff * gam[i][next[s][i]];
      if (coeff.is_zero()) continue;
      for (int i = 0; i < X.rank; ++i)
        for (int j = 0; j < X.rank; ++j)
          T(i, j) += next_mats[s](i, j).evaluate(vals2) * coeff;
    }
    if (!alive) break;
    shell = std::move(next);
    shell_mats = std::move(next_mats);
  }
  return T;
}

LogPointFCrystal transport_fiber(const LogPointFCrystal& A, const Mat<WittElem>& T) {
  const auto& W = A.W;
  auto Tinv = mat_inverse(T, W->one(), W->zero());
  LogPointFCrystal out = A;
  for (std::size_t i = 0; i < A.N.size(); ++i) out.N[i] = matmul(T, matmul(A.N[i], Tinv));
  auto sigmaT_inv =
      mat_inverse(mat_apply(T, [](const WittElem& w) { return w.sigma(); }), W->one(), W->zero());
  out.F = matmul(T, matmul(A.F, sigmaT_inv));
  return out;
}

}  // namespace logcrys
