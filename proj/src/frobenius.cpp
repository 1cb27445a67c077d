#include "logcrys/frobenius.hpp"

namespace logcrys {

// ---------------------------------------------------------------------------
// Connection

Mat<TruncatedSeries> zero_matrix(const SeriesRingPtr& R, int rows, int cols) {
  return Mat<TruncatedSeries>(rows, cols, R->zero());
}

Mat<TruncatedSeries> identity_matrix(const SeriesRingPtr& R, int n) {
  return mat_identity(n, R->constant_int(1), R->zero());
}

Mat<WittElem> zero_wmatrix(const WittRingPtr& W, int rows, int cols) {
  return Mat<WittElem>(rows, cols, W->zero());
}

Mat<WittElem> identity_wmatrix(const WittRingPtr& W, int n) {
  return mat_identity(n, W->one(), W->zero());
}

Mat<TruncatedSeries> mat_theta(const Mat<TruncatedSeries>& m, int i) {
  return mat_apply(m, [i](const TruncatedSeries& s) { return s.theta(i); });
}

Connection::Connection(SeriesRingPtr r, int rk) : ring(std::move(r)), rank(rk) {
  M.assign(ring->vars(), zero_matrix(ring, rank, rank));
}

Connection::Connection(SeriesRingPtr r, std::vector<Mat<TruncatedSeries>> mats)
    : ring(std::move(r)), M(std::move(mats)) {
  if (static_cast<int>(M.size()) != ring->vars())
    throw Error("Connection: need one matrix per variable");
  rank = M.empty() ? 0 : M.front().rows;
  for (const auto& mm : M)
    if (mm.rows != rank || mm.cols != rank) throw Error("Connection: matrix shape mismatch");
}

Mat<TruncatedSeries> Connection::apply_theta(int i, const Mat<TruncatedSeries>& cols) const {
  return matadd(mat_theta(cols, i), matmul(M[i], cols));
}

Mat<TruncatedSeries> Connection::integrability_defect(int i, int j) const {
  return matadd(matsub(mat_theta(M[j], i), mat_theta(M[i], j)),
                matsub(matmul(M[i], M[j]), matmul(M[j], M[i])));
}

Mat<TruncatedSeries> Connection::theta_falling_power(int i, int n) const {
  auto cur = identity_matrix(ring, rank);
  for (int j = 0; j < n; ++j) {
    auto stepped = apply_theta(i, cur);
    cur = matsub(stepped, mat_scale(cur, ring->constant_int(j)));
  }
  return cur;
}

// ---------------------------------------------------------------------------
// FrobLift

FrobLift FrobLift::standard(SeriesRingPtr ring) {
  FrobLift phi;
  phi.ring_ = std::move(ring);
  phi.f_.assign(phi.ring_->vars(), phi.ring_->constant_int(1));
  phi.standard_ = true;
  phi.images_.reserve(phi.ring_->vars());
  auto p = static_cast<std::uint64_t>(phi.ring_->witt()->prime());
  for (int i = 0; i < phi.ring_->vars(); ++i) {
    if (i < phi.ring_->log_vars()) {
      phi.images_.push_back(phi.ring_->variable(i).pow(p));
    } else {
      auto tp = (phi.ring_->constant_int(1) + phi.ring_->variable(i)).pow(p);
      phi.images_.push_back(tp - phi.ring_->constant_int(1));
    }
  }
  return phi;
}

FrobLift FrobLift::make(std::vector<TruncatedSeries> f) {
  if (f.empty()) throw Error("FrobLift: empty twist list");
  FrobLift phi;
  phi.ring_ = f.front().ring();
  if (static_cast<int>(f.size()) != phi.ring_->vars())
    throw Error("FrobLift: need one twist per variable");
  bool standard = true;
  auto one = phi.ring_->constant_int(1);
  for (const auto& fi : f) {
    if (!same_ring(*fi.ring(), *phi.ring_)) throw Error("FrobLift: ring mismatch");
    if (!fi.is_integral()) throw Error("FrobLift: twist not integral");
    auto dev = fi - one;
    if (!dev.is_zero()) {
      standard = false;
      for (const auto& w : dev.coeffs())
        if (w.valuation() < 1) throw Error("FrobLift: twist not congruent to 1 mod p");
    }
  }
  phi.f_ = std::move(f);
  phi.standard_ = standard;
  auto p = static_cast<std::uint64_t>(phi.ring_->witt()->prime());
  for (int i = 0; i < phi.ring_->vars(); ++i) {
    if (i < phi.ring_->log_vars()) {
      phi.images_.push_back(phi.ring_->variable(i).pow(p) * phi.f_[i]);
    } else {
      auto tp = (phi.ring_->constant_int(1) + phi.ring_->variable(i)).pow(p) * phi.f_[i];
      phi.images_.push_back(tp - phi.ring_->constant_int(1));
    }
  }
  return phi;
}

TruncatedSeries FrobLift::operator()(const TruncatedSeries& g) const {
  return g.sigma_coeffs(1).substitute(images_);
}

Mat<TruncatedSeries> FrobLift::operator()(const Mat<TruncatedSeries>& m) const {
  return mat_apply(m, [this](const TruncatedSeries& s) { return (*this)(s); });
}

Mat<TruncatedSeries> FrobLift::dlog_pullback_matrix() const {
  // phi^*(dlog t'_j) = p dlog t'_j + dlog f_j
  const auto& R = *ring_;
  auto p = R.witt()->prime();
  auto c = zero_matrix(ring_, R.vars(), R.vars());
  for (int j = 0; j < R.vars(); ++j) {
    c(j, j) = R.constant_int(p);
    if (!standard_) {
      auto finv = f_[j].inv();
      for (int i = 0; i < R.vars(); ++i) c(i, j) += f_[j].theta(i) * finv;
    }
  }
  return c;
}

LogOneForm FrobLift::pullback_form(const LogOneForm& eta) const {
  const auto& R = *ring_;
  auto c = dlog_pullback_matrix();
  LogOneForm out(eta.ring);
  for (int i = 0; i < R.vars(); ++i) {
    auto acc = R.zero();
    for (int j = 0; j < R.vars(); ++j) acc += c(i, j) * (*this)(eta.comp[j]);
    out.comp[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// chi transport

TruncatedSeries divided_power_series(const TruncatedSeries& x, int n) {
  auto acc = x.ring()->constant_int(1);
  for (int k = 1; k <= n; ++k) acc = (acc * x).div_int_value(k);
  return acc;
}

Mat<TruncatedSeries> chi_transport(const Connection& nabla, const FrobLift& phi1,
                                   const FrobLift& phi2) {
  const auto ring = nabla.ring;
  const auto& R = *ring;
  const auto& W = R.witt();
  const int m = R.vars();
  const long long p = W->prime();
  // terms with |n| beyond the cap vanish: v(gamma_n(p-divisible)) >= |n|(p-2)/(p-1)
  const int cap =
      static_cast<int>((static_cast<long long>(W->precision()) * (p - 1) + (p - 3)) / (p - 2)) + 1;

  // h_i = f_i / g_i - 1, divisible by p
  std::vector<TruncatedSeries> h;
  h.reserve(m);
  for (int i = 0; i < m; ++i) {
    auto q = phi1.twists()[i] * phi2.twists()[i].inv() - R.constant_int(1);
    bool ok = true;
    for (const auto& w : q.coeffs())
      if (w.valuation() < 1) ok = false;
    if (!ok || !q.is_integral()) throw Error("chi_transport: twist ratio not 1 mod p");
    h.push_back(std::move(q));
  }

  // divided powers gamma_k(h_i) up to the cap
  std::vector<std::vector<TruncatedSeries>> gam(m);
  for (int i = 0; i < m; ++i) {
    gam[i].push_back(R.constant_int(1));
    for (int k = 1; k <= cap; ++k) gam[i].push_back((gam[i][k - 1] * h[i]).div_int_value(k));
  }

  auto out = identity_matrix(ring, nabla.rank);

  // walk multi-indices n by shells; P_n columns extend the previous shell
  std::vector<Exponents> shell{Exponents(m, 0)};
  std::vector<Mat<TruncatedSeries>> shell_mats{identity_matrix(ring, nabla.rank)};
  for (int d = 1; d <= cap; ++d) {
    std::vector<Exponents> next;
    std::vector<Mat<TruncatedSeries>> next_mats;
    bool shell_alive = false;
    for (std::size_t s = 0; s < shell.size(); ++s) {
      for (int i = 0; i < m; ++i) {
        // extend in direction i only from the representative with zeros below i
        bool lowest = true;
        for (int j = 0; j < i; ++j)
          if (shell[s][j] != 0) lowest = false;
        if (!lowest) continue;
        Exponents n = shell[s];
        n[i] += 1;
        // P_n = (nabla(theta_i) - (n_i - 1)) P_{n - delta_i}
        auto stepped = nabla.apply_theta(i, shell_mats[s]);
        auto mat = matsub(stepped, mat_scale(shell_mats[s], R.constant_int(n[i] - 1)));
        if (!mat_is_zero(mat)) shell_alive = true;
        next.push_back(std::move(n));
        next_mats.push_back(std::move(mat));
      }
    }
    for (std::size_t s = 0; s < next.size(); ++s) {
      if (mat_is_zero(next_mats[s])) continue;
      auto coeff = R.constant_int(1);
      for (int i = 0; i < m; ++i) coeff = coeff * gam[i][next[s][i]];
      if (coeff.is_zero()) continue;
      out = matadd(out, mat_scale(phi2(next_mats[s]), coeff));
    }
    if (!shell_alive) break;
    shell = std::move(next);
    shell_mats = std::move(next_mats);
  }
  return out;
}

}  // namespace logcrys
