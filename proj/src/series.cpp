#include "logcrys/series.hpp"

#include <algorithm>

#include "logcrys/matrix.hpp"

namespace logcrys {

namespace {

void enumerate_exponents(int m, Exponents& cur, int pos, int left, std::vector<Exponents>& out) {
  if (pos == m) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= left; ++e) {
    cur[pos] = e;
    enumerate_exponents(m, cur, pos + 1, left - e, out);
  }
  cur[pos] = 0;
}

int total_degree(const Exponents& e) {
  int d = 0;
  for (int x : e) d += x;
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// SeriesRing

SeriesRingPtr SeriesRing::make(WittRingPtr base, int m, int r, int D) {
  if (!base) throw Error("SeriesRing: missing base ring");
  if (m < 1 || m > 8) throw Error("SeriesRing: variable count out of range [1,8]");
  if (r < 0 || r > m) throw Error("SeriesRing: need 0 <= r <= m");
  if (D < 1 || D > 128) throw Error("SeriesRing: truncation order out of range [1,128]");
  double table = 1;
  for (int i = 0; i < m; ++i) table *= D;
  if (table > double(1 << 24)) throw Error("SeriesRing: truncation table too large");

  auto R = std::shared_ptr<SeriesRing>(new SeriesRing());
  R->witt_ = std::move(base);
  R->m_ = m;
  R->r_ = r;
  R->D_ = D;

  Exponents cur(m, 0);
  enumerate_exponents(m, cur, 0, D - 1, R->exps_);
  std::sort(R->exps_.begin(), R->exps_.end(), [](const Exponents& a, const Exponents& b) {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return a > b;  // graded lex: higher leading exponents first
  });
  R->deg_.resize(R->exps_.size());
  R->off_.assign(D + 1, 0);
  for (std::size_t i = 0; i < R->exps_.size(); ++i) R->deg_[i] = total_degree(R->exps_[i]);
  for (int d = 0, i = 0; d <= D; ++d) {
    while (i < static_cast<int>(R->exps_.size()) && R->deg_[i] < d) ++i;
    R->off_[d] = i;
  }

  R->radix_.assign(static_cast<std::size_t>(table), -1);
  for (std::size_t i = 0; i < R->exps_.size(); ++i) {
    std::size_t key = 0;
    for (int j = m - 1; j >= 0; --j) key = key * D + R->exps_[i][j];
    R->radix_[key] = static_cast<long>(i);
  }
  return R;
}

std::size_t SeriesRing::radix_stride(int i) const {
  std::size_t s = 1;
  for (int j = 0; j < i; ++j) s *= D_;
  return s;
}

long SeriesRing::find_index(const Exponents& e) const {
  if (static_cast<int>(e.size()) != m_) throw Error("SeriesRing: exponent arity mismatch");
  std::size_t key = 0;
  int deg = 0;
  for (int j = m_ - 1; j >= 0; --j) {
    if (e[j] < 0) throw Error("SeriesRing: negative exponent");
    if (e[j] >= D_) return -1;
    key = key * D_ + e[j];
    deg += e[j];
  }
  if (deg >= D_) return -1;
  return radix_[key];
}

std::size_t SeriesRing::index(const Exponents& e) const {
  long i = find_index(e);
  if (i < 0) throw Error("SeriesRing: exponent beyond truncation");
  return static_cast<std::size_t>(i);
}

TruncatedSeries SeriesRing::zero() const {
  std::vector<WittElem> c(size(), witt_->zero());
  return TruncatedSeries(shared_from_this(), std::move(c), 0);
}

TruncatedSeries SeriesRing::constant(const WittElem& w) const {
  return zero().with_coeff(Exponents(m_, 0), w);
}

TruncatedSeries SeriesRing::constant_int(std::int64_t v) const {
  return constant(witt_->from_int(v));
}

TruncatedSeries SeriesRing::variable(int i) const {
  if (i < 0 || i >= m_) throw Error("SeriesRing: variable index out of range");
  if (D_ < 2) throw Error("SeriesRing: truncation too small for a variable");
  Exponents e(m_, 0);
  e[i] = 1;
  return zero().with_coeff(e, witt_->one());
}

TruncatedSeries SeriesRing::twisted_variable(int i) const {
  if (i < r_) return variable(i);
  return constant_int(1) + variable(i);
}

TruncatedSeries SeriesRing::monomial(const Exponents& e, const WittElem& w) const {
  return zero().with_coeff(e, w);
}

bool same_ring(const SeriesRing& a, const SeriesRing& b) {
  return &a == &b || (same_ring(*a.witt(), *b.witt()) && a.vars() == b.vars() &&
                      a.log_vars() == b.log_vars() && a.trunc() == b.trunc());
}

// ---------------------------------------------------------------------------
// TruncatedSeries

TruncatedSeries::TruncatedSeries(SeriesRingPtr ring, std::vector<WittElem> coeffs, int denom)
    : ring_(std::move(ring)), c_(std::move(coeffs)), denom_(denom) {
  if (c_.size() != ring_->size()) throw Error("TruncatedSeries: coefficient table size mismatch");
  if (denom_ < 0) throw Error("TruncatedSeries: negative denominator exponent");
}

const WittElem& TruncatedSeries::coeff(const Exponents& e) const { return c_[ring_->index(e)]; }

TruncatedSeries TruncatedSeries::with_coeff(const Exponents& e, const WittElem& v) const {
  auto c = c_;
  c[ring_->index(e)] = v;
  return TruncatedSeries(ring_, std::move(c), denom_);
}

bool TruncatedSeries::is_zero() const {
  for (const auto& w : c_)
    if (!w.is_zero()) return false;
  return true;
}

bool TruncatedSeries::is_unit() const { return denom_ == 0 && c_[0].is_unit(); }

int TruncatedSeries::min_prec() const {
  int p = ring_->witt()->precision();
  for (const auto& w : c_) p = std::min(p, w.prec());
  return p;
}

TruncatedSeries TruncatedSeries::normalized() const {
  if (denom_ == 0) return *this;
  auto c = c_;
  int denom = denom_;
  while (denom > 0) {
    bool ok = true;
    for (const auto& w : c)
      if (w.valuation() < 1 || w.prec() < 2) {
        ok = false;
        break;
      }
    if (!ok) break;
    for (auto& w : c) w = w.div_exact_p();
    --denom;
  }
  return TruncatedSeries(ring_, std::move(c), denom);
}

TruncatedSeries TruncatedSeries::operator-() const {
  auto c = c_;
  for (auto& w : c) w = -w;
  return TruncatedSeries(ring_, std::move(c), denom_);
}

TruncatedSeries TruncatedSeries::operator+(const TruncatedSeries& o) const {
  if (!same_ring(*ring_, *o.ring_)) throw Error("TruncatedSeries: ring mismatch");
  int d = std::max(denom_, o.denom_);
  auto c = c_;
  for (std::size_t i = 0; i < c.size(); ++i) {
    WittElem x = denom_ < d ? c[i].mul_p(d - denom_) : c[i];
    WittElem y = o.denom_ < d ? o.c_[i].mul_p(d - o.denom_) : o.c_[i];
    c[i] = x + y;
  }
  return TruncatedSeries(ring_, std::move(c), d).normalized();
}

TruncatedSeries TruncatedSeries::operator-(const TruncatedSeries& o) const { return *this + (-o); }

TruncatedSeries TruncatedSeries::operator*(const TruncatedSeries& o) const {
  if (!same_ring(*ring_, *o.ring_)) throw Error("TruncatedSeries: ring mismatch");
  std::vector<WittElem> out;
  if (kernels::parallel_enabled())
    kernels::convolve_parallel(*ring_, c_, o.c_, out);
  else
    kernels::convolve_serial(*ring_, c_, o.c_, out);
  return TruncatedSeries(ring_, std::move(out), denom_ + o.denom_).normalized();
}

TruncatedSeries TruncatedSeries::scale(const WittElem& w) const {
  auto c = c_;
  for (auto& x : c) x = x * w;
  return TruncatedSeries(ring_, std::move(c), denom_).normalized();
}

TruncatedSeries TruncatedSeries::mul_int(std::int64_t k) const {
  return scale(ring_->witt()->from_int(k));
}

TruncatedSeries TruncatedSeries::mul_p(int k) const {
  if (k == 0) return *this;
  int off = std::min(k, denom_);
  auto c = c_;
  if (k > off)
    for (auto& w : c) w = w.mul_p(k - off);
  return TruncatedSeries(ring_, std::move(c), denom_ - off);
}

TruncatedSeries TruncatedSeries::div_p_value(int k) const {
  return TruncatedSeries(ring_, c_, denom_ + k).normalized();
}

TruncatedSeries TruncatedSeries::div_int_value(std::int64_t n) const {
  if (n == 0) throw Error("TruncatedSeries: division by zero");
  bool neg = n < 0;
  std::uint64_t m = neg ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
  int v = 0;
  auto p = static_cast<std::uint64_t>(ring_->witt()->prime());
  while (m % p == 0) {
    m /= p;
    ++v;
  }
  auto unit_inv = ring_->witt()->from_int(static_cast<std::int64_t>(m)).inv();
  auto out = scale(neg ? -unit_inv : unit_inv);
  return out.div_p_value(v);
}

TruncatedSeries TruncatedSeries::inv() const {
  if (!is_unit()) throw Error("TruncatedSeries: inverse of a non-unit");
  const auto& R = *ring_;
  TruncatedSeries y = R.constant(c_[0].inv());
  TruncatedSeries two = R.constant_int(2);
  int steps = 1;
  while ((1 << steps) < R.trunc()) ++steps;
  for (int k = 0; k <= steps; ++k) y = y * (two - *this * y);
  return y;
}

TruncatedSeries TruncatedSeries::pow(std::uint64_t n) const {
  TruncatedSeries r = ring_->constant_int(1);
  TruncatedSeries b = *this;
  while (n) {
    if (n & 1) r = r * b;
    if (n >>= 1) b = b * b;
  }
  return r;
}

TruncatedSeries TruncatedSeries::sigma_coeffs(int k) const {
  auto c = c_;
  for (auto& w : c) w = w.sigma(k);
  return TruncatedSeries(ring_, std::move(c), denom_);
}

TruncatedSeries TruncatedSeries::theta(int i) const {
  const auto& R = *ring_;
  if (i < 0 || i >= R.vars()) throw Error("theta: index out of range");
  std::vector<WittElem> out(c_.size(), R.witt()->zero());
  for (std::size_t k = 0; k < c_.size(); ++k) {
    const auto& e = R.exponents(k);
    WittElem v = c_[k].mul_int(e[i]);
    if (i >= R.log_vars()) {
      Exponents up = e;
      up[i] += 1;
      long j = R.find_index(up);
      if (j >= 0) v = v + c_[static_cast<std::size_t>(j)].mul_int(e[i] + 1);
    }
    out[k] = v;
  }
  return TruncatedSeries(ring_, std::move(out), denom_).normalized();
}

TruncatedSeries TruncatedSeries::delta(int i) const {
  const auto& R = *ring_;
  if (i < 0 || i >= R.vars()) throw Error("delta: index out of range");
  std::vector<WittElem> out(c_.size(), R.witt()->zero());
  for (std::size_t k = 0; k < c_.size(); ++k) {
    Exponents up = R.exponents(k);
    up[i] += 1;
    long j = R.find_index(up);
    if (j >= 0) out[k] = c_[static_cast<std::size_t>(j)].mul_int(up[i]);
  }
  return TruncatedSeries(ring_, std::move(out), denom_).normalized();
}

TruncatedSeries TruncatedSeries::substitute(const std::vector<TruncatedSeries>& images) const {
  const auto& R = *ring_;
  if (static_cast<int>(images.size()) != R.vars()) throw Error("substitute: image count mismatch");
  for (const auto& im : images) {
    if (!same_ring(*im.ring(), R)) throw Error("substitute: ring mismatch");
    if (!im.is_integral() || im.constant_term().valuation() < 1)
      throw Error("substitution divergent: image constant term not in pW");
  }
  const int N = R.witt()->precision();
  std::vector<std::vector<TruncatedSeries>> pw(R.vars());
  for (int i = 0; i < R.vars(); ++i) pw[i].push_back(R.constant_int(1));
  auto power = [&](int i, int e) -> const TruncatedSeries& {
    while (static_cast<int>(pw[i].size()) <= e) pw[i].push_back(pw[i].back() * images[i]);
    return pw[i][e];
  };
  TruncatedSeries acc = R.zero();
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k].is_zero() && c_[k].prec() == N) continue;
    const auto& e = R.exponents(k);
    TruncatedSeries term = R.constant(c_[k]);
    for (int i = 0; i < R.vars(); ++i)
      if (e[i]) term = term * power(i, e[i]);
    acc = acc + term;
  }
  return TruncatedSeries(acc.ring(), acc.coeffs(), acc.denom() + denom_).normalized();
}

WittElem TruncatedSeries::evaluate(const std::vector<WittElem>& values) const {
  const auto& R = *ring_;
  if (static_cast<int>(values.size()) != R.vars()) throw Error("evaluate: value count mismatch");
  for (const auto& v : values)
    if (v.valuation() < 1) throw Error("evaluate: point coordinate not in pW");
  const int N = R.witt()->precision();
  std::vector<std::vector<WittElem>> pw(R.vars());
  for (int i = 0; i < R.vars(); ++i) pw[i].push_back(R.witt()->one());
  auto power = [&](int i, int e) -> const WittElem& {
    while (static_cast<int>(pw[i].size()) <= e) pw[i].push_back(pw[i].back() * values[i]);
    return pw[i][e];
  };
  WittElem acc = R.witt()->zero();
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k].is_zero() && c_[k].prec() == N) continue;
    const auto& e = R.exponents(k);
    WittElem term = c_[k];
    for (int i = 0; i < R.vars(); ++i)
      if (e[i]) term = term * power(i, e[i]);
    acc = acc + term;
  }
  if (denom_ > 0) acc = acc.div_exact_p(denom_);
  return acc;
}

TruncatedSeries TruncatedSeries::reduce(int prec) const {
  auto c = c_;
  for (auto& w : c)
    if (w.prec() > prec) w = w.reduce(prec);
  return TruncatedSeries(ring_, std::move(c), denom_);
}

TruncatedSeries TruncatedSeries::div_variable_power(int i, int k) const {
  const auto& R = *ring_;
  if (i < 0 || i >= R.vars()) throw Error("div_variable_power: index out of range");
  std::vector<WittElem> out(c_.size(), R.witt()->zero());
  for (std::size_t idx = 0; idx < c_.size(); ++idx) {
    const auto& e = R.exponents(idx);
    if (e[i] < k) {
      if (!c_[idx].is_zero()) throw Error("div_variable_power: not divisible");
      continue;
    }
    Exponents down = e;
    down[i] -= k;
    out[R.index(down)] = c_[idx];
  }
  return TruncatedSeries(ring_, std::move(out), denom_);
}

bool agree(const TruncatedSeries& a, const TruncatedSeries& b) { return (a - b).is_zero(); }

TruncatedSeries reembed(const TruncatedSeries& s, const SeriesRingPtr& target) {
  const auto& src = *s.ring();
  if (!same_ring(*src.witt(), *target->witt()) || src.vars() != target->vars() ||
      src.log_vars() != target->log_vars())
    throw Error("reembed: incompatible rings");
  std::vector<WittElem> out(target->size(), target->witt()->zero());
  for (std::size_t k = 0; k < target->size(); ++k) {
    long idx = src.find_index(target->exponents(k));
    if (idx >= 0) out[k] = s.coeff(static_cast<std::size_t>(idx));
  }
  return TruncatedSeries(target, std::move(out), s.denom());
}

// ---------------------------------------------------------------------------
// exp / log / coordinate inversion

TruncatedSeries exp_series(const TruncatedSeries& x) {
  const auto& R = *x.ring();
  const auto& W = R.witt();
  if (x.constant_term().valuation() - x.denom() < 1)
    throw Error("exp_series: constant term not in pW");
  long long p = W->prime();
  long long cap = ((W->precision() + static_cast<long long>(R.trunc()) * (x.denom() + 1) +
                    W->factorial_valuation(R.trunc()) + 2) *
                   (p - 1)) /
                      (p - 2) +
                  4;
  TruncatedSeries acc = R.constant_int(1);
  TruncatedSeries term = R.constant_int(1);
  for (long long n = 1; n <= cap; ++n) {
    term = term * x;
    term = term.div_int_value(n);
    acc = acc + term;
    if (term.is_zero() && n >= W->precision()) break;
  }
  return acc;
}

TruncatedSeries log_series(const TruncatedSeries& u) {
  const auto& R = *u.ring();
  const auto& W = R.witt();
  if (!u.is_integral() || (u.constant_term() - W->one()).valuation() < 1)
    throw Error("log_series: argument not congruent to 1 mod (p, t)");
  TruncatedSeries z = R.constant_int(1) - u;
  long long cap = W->precision() + R.trunc() + 8;
  TruncatedSeries acc = R.zero();
  TruncatedSeries term = R.constant_int(1);
  for (long long n = 1; n <= cap; ++n) {
    term = term * z;
    acc = acc - term.div_int_value(n);
    if (term.is_zero() && n >= W->precision()) break;
  }
  return acc;
}

std::vector<TruncatedSeries> invert_coordinates(const std::vector<TruncatedSeries>& q) {
  if (q.empty()) throw Error("invert_coordinates: empty tuple");
  auto ring = q.front().ring();
  const auto& R = *ring;
  const auto& W = R.witt();
  const int m = R.vars();
  if (static_cast<int>(q.size()) != m) throw Error("invert_coordinates: arity mismatch");

  // leading-part checks: q_i = t_i * unit (log) or 1 + unit linear part (twisted)
  Mat<WittElem> L(m, m, W->zero());
  for (int i = 0; i < m; ++i) {
    if (!q[i].is_integral()) throw Error("not a coordinate system: non-integral component");
    if (i < R.log_vars()) {
      for (std::size_t k = 0; k < R.size(); ++k)
        if (R.exponents(k)[i] == 0 && !q[i].coeff(k).is_zero())
          throw Error("not a coordinate system: log coordinate not divisible by its variable");
    } else if ((q[i].constant_term() - W->one()).valuation() < 1) {
      throw Error("not a coordinate system: twisted coordinate constant not 1 mod p");
    }
    for (int j = 0; j < m; ++j) {
      Exponents e(m, 0);
      e[j] = 1;
      long idx = R.find_index(e);
      if (idx >= 0) L(i, j) = q[i].coeff(static_cast<std::size_t>(idx));
    }
  }
  try {
    (void)mat_inverse(L, W->one(), W->zero());
  } catch (const Error&) {
    throw Error("not a coordinate system: leading Jacobian not invertible over W");
  }

  std::vector<TruncatedSeries> target;
  for (int i = 0; i < m; ++i)
    target.push_back(i < R.log_vars() ? R.variable(i) : R.constant_int(1) + R.variable(i));

  std::vector<TruncatedSeries> T;
  for (int i = 0; i < m; ++i) T.push_back(R.variable(i));

  Mat<TruncatedSeries> J(m, m, R.zero());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) J(i, j) = q[i].delta(j);

  int steps = 2;
  int goal = std::max(W->precision(), R.trunc());
  while ((1 << steps) < goal) ++steps;
  steps += 2;
  for (int it = 0; it < steps; ++it) {
    Mat<TruncatedSeries> Jt(m, m, R.zero());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) Jt(i, j) = J(i, j).substitute(T);
    Mat<TruncatedSeries> Jinv = mat_inverse(Jt, R.constant_int(1), R.zero());
    std::vector<TruncatedSeries> E;
    bool done = true;
    for (int i = 0; i < m; ++i) {
      E.push_back(q[i].substitute(T) - target[i]);
      if (!E.back().is_zero()) done = false;
    }
    if (done) break;
    for (int j = 0; j < m; ++j) {
      TruncatedSeries corr = R.zero();
      for (int k = 0; k < m; ++k) corr += Jinv(j, k) * E[k];
      T[j] = T[j] - corr;
    }
  }
  for (int i = 0; i < m; ++i)
    if (!agree(q[i].substitute(T), target[i]))
      throw Error("not a coordinate system: inversion did not converge");
  return T;
}

}  // namespace logcrys
