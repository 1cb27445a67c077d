#include "logcrys/cancoord.hpp"

#include <algorithm>

namespace logcrys {

HodgeFCrystal restrict_to_span(const HodgeFCrystal& X, const Mat<TruncatedSeries>& basis,
                               const std::vector<std::vector<int>>& fil, int weight) {
  HodgeFCrystal S(X.ring, basis.cols);
  auto psi = FrobLift::standard(X.ring);
  S.frob = solve_in_span(basis, matmul(X.frob, psi(basis)));
  S.nabla = Connection(X.ring, basis.cols);
  for (int i = 0; i < X.ring->vars(); ++i)
    S.nabla.M[i] = solve_in_span(basis, X.nabla.apply_theta(i, basis));
  S.fil = fil;
  S.weight = weight;
  return S;
}

Weight1Frame weight1_frame(const HodgeFCrystal& X) {
  const auto ring = X.ring;
  if (X.weight != 1) throw Error("weight1_frame: crystal is not of weight 1");
  const int h = X.fil_rank(1);
  const int g = X.rank - h;
  if (h == 0 || g == 0) throw Error("weight1_frame: degenerate Hodge flag");

  auto sf = slope_filtration(X);
  const auto& U0 = sf.U[0];

  // unit-root basis of the slope-0 sub-crystal, pushed back to the ambient
  std::vector<int> all0(g);
  for (int i = 0; i < g; ++i) all0[i] = i;
  auto sub0 = restrict_to_span(X, U0, {all0}, 0);
  auto BU = unit_root_basis(sub0);
  auto a = matmul(U0, BU);

  // quotient by U0 on the Fil^1 block, with the Frobenius divided by p
  auto fil1 = X.fil_set(1);
  Mat<TruncatedSeries> Bsplit(X.rank, X.rank, ring->zero());
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < X.rank; ++i) Bsplit(i, j) = U0(i, j);
  for (int j = 0; j < h; ++j) Bsplit(fil1[j], g + j) = ring->constant_int(1);
  auto Binv = mat_inverse(Bsplit, ring->constant_int(1), ring->zero());
  auto psi = FrobLift::standard(ring);
  auto frob1 = matmul(Binv, matmul(X.frob, psi(Bsplit)));
  HodgeFCrystal Q(ring, h);
  Q.weight = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) {
      auto e = frob1(g + i, g + j).div_p_value(1);
      if (!e.is_integral())
        throw Error("weight1_frame: quotient Frobenius not divisible by p");
      Q.frob(i, j) = e;
    }
  Q.nabla = Connection(ring, h);
  for (int v = 0; v < ring->vars(); ++v) {
    auto conn1 = matmul(Binv, matadd(mat_theta(Bsplit, v), matmul(X.nabla.M[v], Bsplit)));
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j) Q.nabla.M[v](i, j) = conn1(g + i, g + j);
  }
  auto BQ = unit_root_basis(Q);
  Mat<TruncatedSeries> pad(X.rank, h, ring->zero());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) pad(g + i, j) = BQ(i, j);
  auto b = matmul(Bsplit, pad);

  // read eta and u off the frame crystal
  Weight1Frame fr;
  fr.ring = ring;
  fr.g = g;
  fr.h = h;
  fr.a = a;
  fr.b = b;

  Mat<TruncatedSeries> frame_basis(X.rank, g + h, ring->zero());
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < X.rank; ++i) frame_basis(i, j) = a(i, j);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < X.rank; ++i) frame_basis(i, g + j) = b(i, j);

  auto frob_fr = solve_in_span(frame_basis, matmul(X.frob, psi(frame_basis)));
  std::vector<Mat<TruncatedSeries>> conn_fr;
  for (int v = 0; v < ring->vars(); ++v)
    conn_fr.push_back(solve_in_span(frame_basis, X.nabla.apply_theta(v, frame_basis)));

  // shape assertions: nabla a = 0, nabla b lands in the a-span,
  // F a-columns = a, F b-columns = p b + p u a
  for (int v = 0; v < ring->vars(); ++v)
    for (int j = 0; j < g; ++j)
      for (int i = 0; i < g + h; ++i)
        if (!conn_fr[v](i, j).is_zero()) throw Error("weight1_frame: a-columns not horizontal");
  for (int v = 0; v < ring->vars(); ++v)
    for (int j = 0; j < h; ++j)
      for (int i = g; i < g + h; ++i)
        if (!conn_fr[v](i, g + j).is_zero())
          throw Error("weight1_frame: nabla b has a Fil^1 component");
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < g + h; ++i) {
      auto expect = (i == j) ? ring->constant_int(1) : ring->zero();
      if (!agree(frob_fr(i, j), expect)) throw Error("weight1_frame: F a != a");
    }
  for (int j = 0; j < h; ++j)
    for (int i = g; i < g + h; ++i) {
      auto expect = (i == g + j) ? ring->constant_int(1).mul_p() : ring->zero();
      if (!agree(frob_fr(i, g + j), expect)) throw Error("weight1_frame: F b != p b mod U");
    }

  fr.eta.assign(h, std::vector<LogOneForm>(g, LogOneForm(ring)));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < g; ++j)
      for (int v = 0; v < ring->vars(); ++v) fr.eta[i][j].comp[v] = conn_fr[v](j, g + i);

  fr.u = Mat<TruncatedSeries>(h, g, ring->zero());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < g; ++j) {
      auto e = frob_fr(j, g + i).div_p_value(1);
      if (!e.is_integral()) throw Error("weight1_frame: u-block not divisible by p");
      fr.u(i, j) = e;
    }

  // closedness of eta and the heart relation for the standard lifting:
  // psi^* eta = p eta + p du(psi)
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < g; ++j) {
      if (!exterior_d(fr.eta[i][j]).is_zero()) throw Error("weight1_frame: eta not closed");
      auto lhs = psi.pullback_form(fr.eta[i][j]);
      auto rhs = fr.eta[i][j].mul_int(1);
      for (int v = 0; v < ring->vars(); ++v)
        rhs.comp[v] = fr.eta[i][j].comp[v].mul_p() + fr.u(i, j).theta(v).mul_p();
      if (!(lhs - rhs).is_zero()) throw Error("weight1_frame: heart relation failed");
    }

  return fr;
}

HodgeFCrystal frame_crystal(const HodgeFCrystal& X, const Weight1Frame& fr) {
  Mat<TruncatedSeries> basis(X.rank, fr.g + fr.h, X.ring->zero());
  for (int j = 0; j < fr.g; ++j)
    for (int i = 0; i < X.rank; ++i) basis(i, j) = fr.a(i, j);
  for (int j = 0; j < fr.h; ++j)
    for (int i = 0; i < X.rank; ++i) basis(i, fr.g + j) = fr.b(i, j);
  std::vector<int> filset(fr.h);
  for (int j = 0; j < fr.h; ++j) filset[j] = fr.g + j;
  std::vector<int> all(fr.g + fr.h);
  for (int i = 0; i < fr.g + fr.h; ++i) all[i] = i;
  return restrict_to_span(X, basis, {all, filset}, 1);
}

TauData tau_from_frame(const Weight1Frame& fr) {
  const auto ring = fr.ring;
  const auto& W = ring->witt();
  TauData out;
  out.ring = ring;
  out.tau.assign(fr.h, std::vector<LogPrimitive>(fr.g, LogPrimitive(ring)));
  for (int i = 0; i < fr.h; ++i)
    for (int j = 0; j < fr.g; ++j) {
      auto tau = poincare_integrate(fr.eta[i][j]);
      for (const auto& res : tau.logpart)
        if (!res.in_prime_subring())
          throw Error("not a crystal datum: residue of eta outside Z_p");
      // bigstar normalization: tau'(0) = sum_{n >= 1} V^n(u(psi)(0))
      auto u0 = fr.u(i, j).constant_term();
      auto acc = W->zero();
      auto cur = u0;
      for (int n = 0; n < W->precision(); ++n) {
        cur = vee(cur);
        acc += cur;
      }
      if (!acc.is_zero() && acc.valuation() < 1)
        throw Error("not a crystal datum: normalization constant not in pW");
      tau.analytic = tau.analytic + ring->constant(acc);
      out.tau[i][j] = tau;
    }
  return out;
}

Mat<TruncatedSeries> verify_club(const HodgeFCrystal& X, const Weight1Frame& fr,
                                 const TauData& tau, const FrobLift& phi) {
  const auto ring = fr.ring;
  auto fc = frame_crystal(X, fr);
  auto frob_phi = derive_frobenius(fc, phi);

  Mat<TruncatedSeries> residual(fr.h, fr.g, ring->zero());
  for (int i = 0; i < fr.h; ++i)
    for (int j = 0; j < fr.g; ++j) {
      auto uphi = frob_phi(j, fr.g + i).div_p_value(1);
      // phi^* tau - p tau: log part contributes residue * log f_l
      auto r = phi(tau.tau[i][j].analytic) - tau.tau[i][j].analytic.mul_p();
      for (int l = 0; l < ring->log_vars(); ++l) {
        const auto& res = tau.tau[i][j].logpart[l];
        if (res.is_zero()) continue;
        r += log_series(phi.twists()[l]).scale(res);
      }
      residual(i, j) = r - uphi.mul_p();
    }
  return residual;
}

std::vector<std::vector<TruncatedSeries>> qprime(const TauData& tau) {
  const auto ring = tau.ring;
  std::vector<std::vector<TruncatedSeries>> out;
  for (const auto& row : tau.tau) {
    out.emplace_back();
    for (const auto& t : row) {
      auto q = exp_series(t.analytic);
      if (!q.is_integral())
        throw Error("input not from a crystal: exp(tau') has a denominator");
      if ((q.constant_term() - ring->witt()->one()).valuation() < 1)
        throw Error("input not from a crystal: q'(0) != 1 mod p");
      out.back().push_back(q);
    }
  }
  return out;
}

namespace {

// G in GL_h(Z_p) with G * residue matrix = [I_r; 0], G built from an
// invertible completion with unit pivots; deterministic order
Mat<WittElem> residue_normalizer(const Mat<WittElem>& res, const WittRingPtr& W, int r) {
  const int h = res.rows;
  Mat<WittElem> comp(h, h, W->zero());
  std::vector<bool> used(h, false);
  // column elimination to find unit pivot rows for the r residue columns
  auto work = res;
  std::vector<int> pivot_rows;
  for (int c = 0; c < r; ++c) {
    int piv = -1;
    for (int i = 0; i < h; ++i)
      if (!used[i] && work(i, c).is_unit()) {
        piv = i;
        break;
      }
    if (piv < 0) throw Error("Gr nabla not an isomorphism at this precision");
    used[piv] = true;
    pivot_rows.push_back(piv);
    auto d = work(piv, c).inv();
    for (int cc = 0; cc < r; ++cc) work(piv, cc) = work(piv, cc) * d;
    for (int i = 0; i < h; ++i) {
      if (i == piv) continue;
      auto f = work(i, c);
      if (f.is_zero()) continue;
      for (int cc = 0; cc < r; ++cc) work(i, cc) = work(i, cc) - f * work(piv, cc);
    }
  }
  for (int c = 0; c < r; ++c)
    for (int i = 0; i < h; ++i) comp(i, c) = res(i, c);
  int next = r;
  for (int i = 0; i < h; ++i)
    if (!used[i]) comp(i, next++) = W->one();
  auto G = mat_inverse(comp, W->one(), W->zero());
  for (const auto& e : G.a)
    if (!e.in_prime_subring())
      throw Error("Gr nabla not an isomorphism at this precision");
  return G;
}

}  // namespace

CanonicalCoordinates canonical_coordinates(const HodgeFCrystal& X) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  const int m = ring->vars();
  const int r = ring->log_vars();

  auto fr = weight1_frame(X);
  if (fr.g != 1) throw Error("canonical_coordinates: unit-root part has rank > 1");
  if (fr.h != m)
    throw Error("Gr nabla not an isomorphism at this precision");
  auto tau0 = tau_from_frame(fr);

  // residue matrix over Z_p (h x r)
  Mat<WittElem> res(fr.h, std::max(r, 1), W->zero());
  for (int i = 0; i < fr.h; ++i)
    for (int l = 0; l < r; ++l) res(i, l) = tau0.tau[i][0].logpart[l];
  Mat<WittElem> G = (r > 0) ? residue_normalizer(res, W, r) : identity_wmatrix(W, fr.h);

  // change b <- G b (and tau <- G tau): rebuild the frame and re-integrate
  Weight1Frame nfr = fr;
  nfr.b = Mat<TruncatedSeries>(X.rank, fr.h, ring->zero());
  for (int j = 0; j < fr.h; ++j)
    for (int i = 0; i < X.rank; ++i) {
      auto acc = ring->zero();
      for (int k = 0; k < fr.h; ++k) acc += fr.b(i, k).scale(G(j, k));
      nfr.b(i, j) = acc;
    }
  for (int i = 0; i < fr.h; ++i)
    for (int v = 0; v < m; ++v) {
      auto acc = ring->zero();
      for (int k = 0; k < fr.h; ++k) acc += fr.eta[k][0].comp[v].scale(G(i, k));
      nfr.eta[i][0].comp[v] = acc;
    }
  for (int i = 0; i < fr.h; ++i) {
    auto acc = ring->zero();
    for (int k = 0; k < fr.h; ++k) acc += fr.u(k, 0).scale(G(i, k));
    nfr.u(i, 0) = acc;
  }
  auto tau = tau_from_frame(nfr);

  // verify the normalized arrangement of residues
  for (int i = 0; i < fr.h; ++i)
    for (int l = 0; l < r; ++l) {
      auto expect = (i == l) ? W->one() : W->zero();
      if (!(tau.tau[i][0].logpart[l] - expect).is_zero())
        throw Error("Gr nabla not an isomorphism at this precision");
    }

  auto qp = qprime(tau);
  CanonicalCoordinates out;
  out.frame = nfr;
  out.tau = tau;
  for (int j = 0; j < m; ++j) {
    if (j < r)
      out.q.push_back(ring->variable(j) * qp[j][0]);
    else
      out.q.push_back(qp[j][0]);
  }
  try {
    out.inverse = invert_coordinates(out.q);
  } catch (const Error&) {
    throw Error("Gr nabla not an isomorphism at this precision");
  }
  return out;
}

QChart to_q_chart(const HodgeFCrystal& X, const CanonicalCoordinates& qc) {
  const auto ring = X.ring;
  const auto& W = ring->witt();
  const int m = ring->vars();
  const int r = ring->log_vars();
  const int D = ring->trunc();
  const int p = static_cast<int>(W->prime());
  if (D < 3) throw Error("to_q_chart: truncation too small");

  // work in a padded ring so the twist data of the transported lifting is
  // correct below the output truncation D - 1
  auto big = SeriesRing::make(W, m, r, D + p);
  auto lift_to_big = [&](const TruncatedSeries& s) { return reembed(s, big); };
  auto mat_to_big = [&](const Mat<TruncatedSeries>& M) {
    Mat<TruncatedSeries> out(M.rows, M.cols, big->zero());
    for (int i = 0; i < M.rows; ++i)
      for (int j = 0; j < M.cols; ++j) out(i, j) = lift_to_big(M(i, j));
    return out;
  };

  std::vector<TruncatedSeries> qb, Tb;
  for (int j = 0; j < m; ++j) qb.push_back(lift_to_big(qc.q[j]));
  for (int j = 0; j < m; ++j) Tb.push_back(lift_to_big(qc.inverse[j]));

  // phi_* = c o psi_x o c^{-1} on the t-side: t_i -> sigma(T_i)(q^p images)
  std::vector<TruncatedSeries> images;
  for (int j = 0; j < m; ++j) {
    auto qp = qb[j].pow(static_cast<std::uint64_t>(p));
    images.push_back(j < r ? qp : qp - big->constant_int(1));
  }
  std::vector<TruncatedSeries> fstar;
  for (int i = 0; i < m; ++i) {
    auto phit = Tb[i].sigma_coeffs(1).substitute(images);
    if (i < r) {
      fstar.push_back(phit.div_variable_power(i, p));
    } else {
      auto num = big->constant_int(1) + phit;
      auto den = (big->constant_int(1) + big->variable(i)).pow(static_cast<std::uint64_t>(p));
      fstar.push_back(num * den.inv());
    }
  }
  auto phi_star = FrobLift::make(fstar);

  Connection nabla_big(big, X.rank);
  for (int v = 0; v < m; ++v) nabla_big.M[v] = mat_to_big(X.nabla.M[v]);
  auto frob_big = mat_to_big(X.frob);
  auto frob_phi_star = matmul(frob_big, chi_transport(nabla_big, phi_star, FrobLift::standard(big)));

  // transport to the x-chart: substitute t = T(x) everywhere
  std::vector<TruncatedSeries> Timgs = Tb;
  auto subst = [&](const TruncatedSeries& s) { return s.substitute(Timgs); };

  // c_ij = theta_i(T_j) / T'_j gives nabla(theta^x_i) = theta^x_i + sum_j c_ij M_j(T)
  Mat<TruncatedSeries> cmat(m, m, big->zero());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      auto tprime = (j < r) ? Tb[j] : big->constant_int(1) + Tb[j];
      cmat(i, j) = Tb[j].theta(i) * tprime.inv();
    }

  auto out_ring = SeriesRing::make(W, m, r, D - 1);
  auto shrink = [&](const TruncatedSeries& s) { return reembed(s, out_ring); };

  QChart out;
  out.X = HodgeFCrystal(out_ring, X.rank);
  out.X.weight = X.weight;
  out.X.fil = X.fil;
  out.X.nabla = Connection(out_ring, X.rank);
  for (int i = 0; i < m; ++i) {
    Mat<TruncatedSeries> acc(X.rank, X.rank, big->zero());
    for (int j = 0; j < m; ++j) {
      auto Mj = mat_apply(nabla_big.M[j], subst);
      acc = matadd(acc, mat_scale(Mj, cmat(i, j)));
    }
    out.X.nabla.M[i] = mat_apply(acc, shrink);
  }
  out.X.frob = mat_apply(mat_apply(frob_phi_star, subst), shrink);
  if (X.pairing) {
    auto Jb = mat_to_big(*X.pairing);
    out.X.pairing = mat_apply(mat_apply(Jb, subst), shrink);
  }

  auto move_cols = [&](const Mat<TruncatedSeries>& cols) {
    Mat<TruncatedSeries> outc(cols.rows, cols.cols, out_ring->zero());
    for (int i = 0; i < cols.rows; ++i)
      for (int j = 0; j < cols.cols; ++j) outc(i, j) = shrink(subst(lift_to_big(cols(i, j))));
    return outc;
  };
  out.a = move_cols(qc.frame.a);
  out.b = move_cols(qc.frame.b);

  // Cor wt1(ii): in the q-chart the u-term disappears and eta diagonalizes
  auto psi_x = FrobLift::standard(out_ring);
  auto fb = matmul(out.X.frob, psi_x(out.b));
  for (int j = 0; j < qc.frame.h; ++j)
    for (int i = 0; i < X.rank; ++i)
      if (!agree(fb(i, j), out.b(i, j).mul_p()))
        throw Error("to_q_chart: F(phi_q) phi_q^* b != p b");
  for (int j = 0; j < qc.frame.h; ++j) {
    // nabla(theta^x_v) b_j = delta_vj a
    for (int v = 0; v < m; ++v) {
      auto img = out.X.nabla.apply_theta(v, out.b);
      auto expect = (v == j) ? out.a : Mat<TruncatedSeries>(X.rank, 1, out_ring->zero());
      for (int i = 0; i < X.rank; ++i)
        if (!agree(img(i, j), expect(i, 0)))
          throw Error("to_q_chart: connection did not diagonalize");
    }
  }
  return out;
}

}  // namespace logcrys
