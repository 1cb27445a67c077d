#include "logcrys/witt.hpp"

#include <algorithm>
#include <cmath>

namespace logcrys {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((u128)a * b % m); }

u64 addmod(u64 a, u64 b, u64 m) {
  u64 r = a + b;
  return r >= m ? r - m : r;
}

u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

u64 powmod_int(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

// Dense polynomials over Z/m, low degree first; used only at ring build time.
using Poly = std::vector<u64>;

void poly_trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b, u64 m) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (size_t j = 0; j < b.size(); ++j)
      c[i + j] = addmod(c[i + j], mulmod(a[i], b[j], m), m);
  }
  poly_trim(c);
  return c;
}

// Remainder modulo a monic polynomial.
Poly poly_rem(Poly a, const Poly& g, u64 m) {
  size_t d = g.size() - 1;
  poly_trim(a);
  while (a.size() > d) {
    u64 lead = a.back();
    size_t k = a.size() - 1 - d;
    if (lead)
      for (size_t i = 0; i < d; ++i)
        a[k + i] = submod(a[k + i], mulmod(lead, g[i], m), m);
    a.pop_back();
    poly_trim(a);
  }
  return a;
}

Poly poly_powmod(Poly base, u64 e, const Poly& g, u64 m) {
  Poly r{1};
  base = poly_rem(std::move(base), g, m);
  while (e) {
    if (e & 1) r = poly_rem(poly_mul(r, base, m), g, m);
    base = poly_rem(poly_mul(base, base, m), g, m);
    e >>= 1;
  }
  return r;
}

Poly poly_gcd(Poly a, Poly b, u64 p) {
  poly_trim(a);
  poly_trim(b);
  while (!b.empty()) {
    u64 inv = powmod_int(b.back(), p - 2, p);
    for (auto& c : b) c = mulmod(c, inv, p);
    a = poly_rem(std::move(a), b, p);
    std::swap(a, b);
  }
  return a;
}

bool irreducible(const Poly& g, std::int64_t p, int s) {
  u64 up = static_cast<u64>(p);
  Poly acc = poly_powmod({0, 1}, up, g, up);  // x^{p^d} for d = 1, 2, ...
  for (int d = 1; d < s; ++d) {
    if (s % d == 0) {
      Poly diff = acc;
      diff.resize(std::max<size_t>(diff.size(), 2), 0);
      diff[1] = submod(diff[1], 1, up);
      poly_trim(diff);
      Poly gg = poly_gcd(g, diff, up);
      if (gg.size() != 1) return false;
    }
    acc = poly_powmod(acc, up, g, up);
  }
  Poly diff = acc;
  diff.resize(std::max<size_t>(diff.size(), 2), 0);
  diff[1] = submod(diff[1], 1, up);
  poly_trim(diff);
  return diff.empty();
}

// det of a k x k matrix over Z/m, Laplace expansion DP over column subsets.
u64 det_mod(const std::vector<std::vector<u64>>& a, u64 m) {
  int k = static_cast<int>(a.size());
  if (k == 0) return 1 % m;
  std::vector<u64> dp(size_t(1) << k, 0);
  dp[0] = 1 % m;
  for (u64 mask = 0; mask + 1 < (u64(1) << k); ++mask) {
    if (!dp[mask] && mask != 0) continue;
    int row = __builtin_popcountll(mask);
    int seen = 0;  // unused columns below j
    for (int j = 0; j < k; ++j) {
      if (mask & (u64(1) << j)) continue;
      u64 term = mulmod(dp[mask], a[row][j], m);
      if ((row + j - seen) & 1) term = submod(0, term, m);
      u64 nm = mask | (u64(1) << j);
      dp[nm] = addmod(dp[nm], term, m);
      ++seen;
    }
  }
  return dp[(u64(1) << k) - 1];
}

}  // namespace

// ---------------------------------------------------------------------------
// WittRing construction

WittRingPtr WittRing::make(std::int64_t p, int s, int N) {
  if (!is_prime(p) || p == 2) throw Error("WittRing: p must be an odd prime");
  if (s < 1 || N < 1) throw Error("WittRing: need s >= 1 and N >= 1");
  if (N * std::log2(static_cast<double>(p)) > 61.0)
    throw Error("WittRing: p^N exceeds the 64-bit coordinate range");

  auto ring = std::shared_ptr<WittRing>(new WittRing());
  ring->p_ = p;
  ring->s_ = s;
  ring->N_ = N;
  ring->ppow_.resize(N + 1);
  ring->ppow_[0] = 1;
  for (int k = 1; k <= N; ++k) ring->ppow_[k] = ring->ppow_[k - 1] * static_cast<u64>(p);
  ring->build_tables();
  return ring;
}

void WittRing::build_tables() {
  const u64 up = static_cast<u64>(p_);
  const u64 M = ppow_[N_];

  if (s_ == 1) {
    minpoly_ = {M - 1, 1};  // x - 1, zeta = 1
    sigma_mat_.assign(1, {{1}});
    return;
  }

  // First irreducible monic polynomial of degree s over F_p in lex order.
  Poly g0;
  {
    std::vector<u64> coef(s_, 0);
    while (true) {
      Poly g(coef.begin(), coef.end());
      g.push_back(1);
      if (irreducible(g, p_, s_)) {
        g0 = g;
        break;
      }
      int i = 0;
      while (i < s_ && ++coef[i] == up) coef[i++] = 0;
      if (i == s_) throw Error("WittRing: no irreducible polynomial found");
    }
  }

  // Teichmuller fixed point of x in Z/p^N[x]/(g0): iterate y -> y^{p^s}.
  u64 q = 1;
  for (int i = 0; i < s_; ++i) q *= up;
  Poly glift(g0.begin(), g0.end());
  Poly y{0, 1};
  for (int it = 0; it < N_ + 1; ++it) y = poly_powmod(y, q, glift, M);

  // Minimal polynomial of the fixed point = char poly of multiplication by y.
  std::vector<std::vector<u64>> mult(s_, std::vector<u64>(s_, 0));
  for (int j = 0; j < s_; ++j) {
    Poly colp = poly_rem(poly_mul(y, poly_powmod({0, 1}, j, glift, M), M), glift, M);
    for (int i = 0; i < static_cast<int>(colp.size()); ++i) mult[i][j] = colp[i];
  }
  minpoly_.assign(s_ + 1, 0);
  minpoly_[s_] = 1;
  for (int k = 1; k <= s_; ++k) {
    u64 sum = 0;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<std::vector<u64>> sub(k, std::vector<u64>(k));
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub[i][j] = mult[idx[i]][idx[j]];
      sum = addmod(sum, det_mod(sub, M), M);
      int i = k - 1;
      while (i >= 0 && idx[i] == s_ - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    u64 v = sum;
    if (k % 2 == 1) v = submod(0, v, M);
    minpoly_[s_ - k] = v;  // coefficient of x^{s-k} is (-1)^k e_k
  }

  for (int i = 0; i < s_; ++i)
    if (minpoly_[i] % up != g0[i]) throw Error("WittRing: minimal polynomial lift failed");

  // zeta^s .. zeta^{2s-2} reduced mod the minimal polynomial.
  Poly mp(minpoly_.begin(), minpoly_.end());
  zeta_pow_.clear();
  Poly cur(minpoly_.begin(), minpoly_.end() - 1);
  for (auto& c : cur) c = submod(0, c, M);  // x^s = -(low part)
  poly_trim(cur);
  for (int k = 0; k <= s_ - 2; ++k) {
    std::vector<u64> row(s_, 0);
    for (int i = 0; i < s_ && i < static_cast<int>(cur.size()); ++i) row[i] = cur[i];
    zeta_pow_.push_back(row);
    cur = poly_rem(poly_mul(cur, {0, 1}, M), mp, M);
  }

  // sigma^k matrices: column j = zeta^{j p^k} mod minpoly.
  const u64 order = q - 1;  // multiplicative order of zeta
  sigma_mat_.resize(s_);
  for (int k = 0; k < s_; ++k) {
    sigma_mat_[k].assign(s_, std::vector<u64>(s_, 0));
    for (int j = 0; j < s_; ++j) {
      u128 e = j;
      for (int t = 0; t < k; ++t) e = e * up % order;
      Poly ze = poly_powmod({0, 1}, static_cast<u64>(e), mp, M);
      if (j == 0) ze = {1};
      for (int i = 0; i < s_ && i < static_cast<int>(ze.size()); ++i)
        sigma_mat_[k][i][j] = ze[i];
    }
  }

  Poly check = poly_powmod({0, 1}, order, mp, M);
  if (!(check.size() == 1 && check[0] == 1))
    throw Error("WittRing: Teichmuller generator check failed");
}

std::uint64_t WittRing::pow_p(int k) const {
  if (k < 0 || k > N_) throw Error("WittRing: p-power out of range");
  return ppow_[k];
}

std::vector<u64> WittRing::mul_raw(const std::vector<u64>& a, const std::vector<u64>& b,
                                   u64 mod) const {
  if (s_ == 1) return {mulmod(a[0], b[0], mod)};
  std::vector<u64> conv(2 * s_ - 1, 0);
  for (int i = 0; i < s_; ++i) {
    if (!a[i]) continue;
    for (int j = 0; j < s_; ++j)
      conv[i + j] = addmod(conv[i + j], mulmod(a[i], b[j], mod), mod);
  }
  std::vector<u64> out(conv.begin(), conv.begin() + s_);
  for (int k = s_; k <= 2 * s_ - 2; ++k) {
    if (!conv[k]) continue;
    const auto& rep = zeta_pow_[k - s_];
    for (int i = 0; i < s_; ++i)
      out[i] = addmod(out[i], mulmod(conv[k], rep[i] % mod, mod), mod);
  }
  return out;
}

WittElem WittRing::zero(int prec) const {
  if (prec < 0) prec = N_;
  return WittElem(shared_from_this(), std::vector<u64>(s_, 0), prec);
}

WittElem WittRing::one(int prec) const { return from_int(1, prec); }

WittElem WittRing::from_int(std::int64_t v, int prec) const {
  if (prec < 0) prec = N_;
  u64 m = ppow_[prec];
  std::int64_t r = v % static_cast<std::int64_t>(m);
  if (r < 0) r += static_cast<std::int64_t>(m);
  std::vector<u64> c(s_, 0);
  c[0] = static_cast<u64>(r);
  return WittElem(shared_from_this(), std::move(c), prec);
}

WittElem WittRing::from_coords(const std::vector<u64>& c, int prec) const {
  if (prec < 0) prec = N_;
  if (static_cast<int>(c.size()) != s_) throw Error("WittRing: coordinate count mismatch");
  return WittElem(shared_from_this(), c, prec);
}

WittElem WittRing::from_strings(const std::vector<std::string>& c, int prec) const {
  if (static_cast<int>(c.size()) != s_) throw Error("WittRing: coordinate count mismatch");
  std::vector<u64> r(s_);
  for (int i = 0; i < s_; ++i) r[i] = std::stoull(c[i]);
  return from_coords(r, prec);
}

WittElem WittRing::zeta() const {
  std::vector<u64> c(s_, 0);
  if (s_ == 1)
    c[0] = 1;
  else
    c[1] = 1;
  return WittElem(shared_from_this(), std::move(c), N_);
}

WittElem WittRing::teichmuller(const std::vector<u64>& residue) const {
  if (static_cast<int>(residue.size()) != s_) throw Error("teichmuller: bad residue");
  std::vector<u64> c(residue);
  for (auto& x : c) x %= static_cast<u64>(p_);
  bool zero_res = true;
  for (auto x : c)
    if (x) zero_res = false;
  if (zero_res) return zero();
  WittElem x(shared_from_this(), std::move(c), N_);
  u64 q = 1;
  for (int i = 0; i < s_; ++i) q *= static_cast<u64>(p_);
  for (int it = 0; it < N_ + 1; ++it) x = x.pow(q);
  return x;
}

int WittRing::factorial_valuation(std::uint64_t n) const {
  int v = 0;
  u64 q = static_cast<u64>(p_);
  while (q <= n) {
    v += static_cast<int>(n / q);
    if (q > n / static_cast<u64>(p_)) break;
    q *= static_cast<u64>(p_);
  }
  return v;
}

WittElem WittRing::factorial_unit(std::uint64_t n) const {
  u64 m = ppow_[N_];
  u64 acc = 1;
  for (u64 k = 2; k <= n; ++k) {
    u64 kk = k;
    while (kk % static_cast<u64>(p_) == 0) kk /= static_cast<u64>(p_);
    acc = mulmod(acc, kk % m, m);
  }
  return from_int(static_cast<std::int64_t>(acc));
}

WittElem WittRing::divided_power(const WittElem& x, std::uint64_t n) const {
  if (!same_ring(*this, *x.ring())) throw Error("divided_power: ring mismatch");
  if (n == 0) return one(x.prec());
  if (n == 1) return x;
  if (x.valuation() < 1) throw Error("divided power undefined: argument not divisible by p");
  WittElem num = x.pow(n);
  int v = factorial_valuation(n);
  num = num.div_exact_p(v);
  return num * factorial_unit(n).inv().reduce(num.prec());
}

WittElem WittRing::log_unit(const WittElem& u) const {
  WittElem z = one(u.prec()) - u;
  if (!z.is_zero() && z.valuation() < 1)
    throw Error("log_unit: argument not congruent to 1 mod p");
  auto floor_log_p = [&](u64 n) {
    int k = 0;
    while (n >= static_cast<u64>(p_)) {
      n /= static_cast<u64>(p_);
      ++k;
    }
    return k;
  };
  WittElem acc = zero(u.prec());
  WittElem term = one(u.prec());
  for (u64 n = 1;; ++n) {
    if (n > 1 && static_cast<int>(n) - floor_log_p(n) >= N_) break;
    term = term * z;
    int v = 0;
    u64 nn = n;
    while (nn % static_cast<u64>(p_) == 0) {
      nn /= static_cast<u64>(p_);
      ++v;
    }
    WittElem t = term.div_exact_p(v);
    t = t * from_int(static_cast<std::int64_t>(nn)).inv().reduce(t.prec());
    acc = acc - t;
  }
  return acc;
}

WittElem WittRing::exp_p(const WittElem& x) const {
  if (!x.is_zero() && x.valuation() < 1) throw Error("exp_p: argument not divisible by p");
  // gamma_n(x) vanishes mod p^N once n (p-2)/(p-1) >= N
  u64 cap = static_cast<u64>((static_cast<long long>(N_) * (p_ - 1) + (p_ - 3)) / (p_ - 2)) + 1;
  WittElem acc = one(x.prec());
  WittElem term = one(x.prec());
  for (u64 n = 1; n <= cap; ++n) {
    term = term * x;
    int v = 0;
    u64 nn = n;
    while (nn % static_cast<u64>(p_) == 0) {
      nn /= static_cast<u64>(p_);
      ++v;
    }
    term = term.div_exact_p(v);
    term = term * from_int(static_cast<std::int64_t>(nn)).inv().reduce(term.prec());
    acc = acc + term;
  }
  return acc;
}

WittElem WittRing::trace(const WittElem& x) const {
  WittElem acc = x;
  for (int k = 1; k < s_; ++k) acc = acc + x.sigma(k);
  if (!acc.in_prime_subring()) throw Error("trace: result escaped the prime subring");
  return acc;
}

// ---------------------------------------------------------------------------
// WittElem

WittElem::WittElem(WittRingPtr ring, std::vector<u64> coords, int prec)
    : ring_(std::move(ring)), c_(std::move(coords)), prec_(prec) {
  if (prec_ < 1 || prec_ > ring_->precision()) throw Error("precision exhausted");
  u64 m = ring_->pow_p(prec_);
  for (auto& x : c_) x %= m;
}

bool WittElem::is_zero() const {
  for (auto x : c_)
    if (x) return false;
  return true;
}

int WittElem::valuation() const {
  int best = prec_;
  for (auto x : c_) {
    if (!x) continue;
    int v = 0;
    u64 y = x;
    while (y % static_cast<u64>(ring_->prime()) == 0) {
      y /= static_cast<u64>(ring_->prime());
      ++v;
    }
    best = std::min(best, v);
  }
  return best;
}

bool WittElem::is_unit() const { return valuation() == 0; }

bool WittElem::in_prime_subring() const {
  for (size_t i = 1; i < c_.size(); ++i)
    if (c_[i]) return false;
  return true;
}

WittElem WittElem::operator-() const {
  u64 m = ring_->pow_p(prec_);
  std::vector<u64> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) r[i] = c_[i] ? m - c_[i] : 0;
  return WittElem(ring_, std::move(r), prec_);
}

WittElem WittElem::operator+(const WittElem& o) const {
  if (!same_ring(*ring_, *o.ring_)) throw Error("WittElem: ring mismatch");
  int prec = std::min(prec_, o.prec_);
  u64 m = ring_->pow_p(prec);
  std::vector<u64> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) r[i] = addmod(c_[i] % m, o.c_[i] % m, m);
  return WittElem(ring_, std::move(r), prec);
}

WittElem WittElem::operator-(const WittElem& o) const { return *this + (-o); }

WittElem WittElem::operator*(const WittElem& o) const {
  if (!same_ring(*ring_, *o.ring_)) throw Error("WittElem: ring mismatch");
  // known mod p^min(a_x + v(y), a_y + v(x)), capped at N
  int prec = std::min(prec_ + o.valuation(), o.prec_ + valuation());
  prec = std::min(prec, ring_->precision());
  auto raw = ring_->mul_raw(c_, o.c_, ring_->pow_p(ring_->precision()));
  return WittElem(ring_, std::move(raw), prec);
}

WittElem WittElem::mul_int(std::int64_t k) const { return *this * ring_->from_int(k); }

WittElem WittElem::mul_p(int k) const {
  if (k == 0) return *this;
  int prec = std::min(prec_ + k, ring_->precision());
  u64 m = ring_->pow_p(prec);
  u64 f = 1;
  for (int i = 0; i < k; ++i) f *= static_cast<u64>(ring_->prime());
  std::vector<u64> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) r[i] = mulmod(c_[i], f % m, m);
  return WittElem(ring_, std::move(r), prec);
}

WittElem WittElem::div_exact_p(int k) const {
  if (k == 0) return *this;
  u64 f = 1;
  for (int i = 0; i < k; ++i) f *= static_cast<u64>(ring_->prime());
  std::vector<u64> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] % f) throw Error("exact division by p fails");
    r[i] = c_[i] / f;
  }
  if (prec_ - k < 1) throw Error("precision exhausted");
  return WittElem(ring_, std::move(r), prec_ - k);
}

WittElem WittElem::inv() const {
  if (!is_unit()) throw Error("WittElem: inverse of a non-unit");
  const auto& R = *ring_;
  u64 q = 1;
  for (int i = 0; i < R.degree(); ++i) q *= static_cast<u64>(R.prime());
  WittElem seed = reduce(1).pow(q - 2);  // residue-field inverse by Fermat
  WittElem cur(ring_, seed.coords(), prec_);
  WittElem two = R.from_int(2, prec_);
  for (int reach = 1; reach < prec_; reach *= 2) cur = cur * (two - *this * cur);
  return cur;
}

WittElem WittElem::pow(std::uint64_t e) const {
  WittElem r = ring_->one(prec_);
  WittElem b = *this;
  while (e) {
    if (e & 1) r = r * b;
    if (e >>= 1) b = b * b;
  }
  return r;
}

WittElem WittElem::sigma(int k) const {
  int s = ring_->degree();
  int kk = ((k % s) + s) % s;
  if (kk == 0 || s == 1) return *this;
  const auto& mat = ring_->sigma_mat_[kk];
  u64 m = ring_->pow_p(prec_);
  std::vector<u64> r(c_.size(), 0);
  for (int j = 0; j < s; ++j) {
    if (!c_[j]) continue;
    for (int i = 0; i < s; ++i) r[i] = addmod(r[i], mulmod(c_[j], mat[i][j] % m, m), m);
  }
  return WittElem(ring_, std::move(r), prec_);
}

WittElem WittElem::reduce(int prec) const {
  if (prec == prec_) return *this;
  if (prec > prec_) throw Error("WittElem: cannot raise precision");
  return WittElem(ring_, c_, prec);
}

std::vector<std::string> WittElem::to_strings() const {
  std::vector<std::string> out;
  out.reserve(c_.size());
  for (auto x : c_) out.push_back(std::to_string(x));
  return out;
}

WittElem vee(const WittElem& x) { return x.sigma(-1).mul_p(1); }

bool same_ring(const WittRing& a, const WittRing& b) {
  return &a == &b || (a.prime() == b.prime() && a.degree() == b.degree() &&
                      a.precision() == b.precision());
}

}  // namespace logcrys
