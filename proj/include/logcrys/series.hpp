#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "logcrys/witt.hpp"

namespace logcrys {

class SeriesRing;
using SeriesRingPtr = std::shared_ptr<const SeriesRing>;

using Exponents = std::vector<int>;

/// Multivariate power series over the Witt ring, truncated at total degree < D.
/// The first r variables are the log directions (t'_i = t_i); the remaining
/// ones are twisted (t'_i = 1 + t_i).  Coefficients are stored densely in
/// graded-lex order.  A K-valued series is a WittElem numerator table plus one
/// global denominator exponent: value = p^{-denom} * stored.
class TruncatedSeries {
 public:
  TruncatedSeries() = default;
  TruncatedSeries(SeriesRingPtr ring, std::vector<WittElem> coeffs, int denom = 0);

  const SeriesRingPtr& ring() const { return ring_; }
  const std::vector<WittElem>& coeffs() const { return c_; }
  int denom() const { return denom_; }

  const WittElem& coeff(std::size_t idx) const { return c_[idx]; }
  const WittElem& coeff(const Exponents& e) const;
  TruncatedSeries with_coeff(const Exponents& e, const WittElem& v) const;

  bool is_zero() const;  // all stored residues vanish
  bool is_integral() const { return denom_ == 0; }
  bool is_unit() const;  // integral with unit constant term
  WittElem constant_term() const { return c_[0]; }
  int min_prec() const;            // min stored precision over all coefficients
  int value_prec() const { return min_prec() - denom_; }

  TruncatedSeries operator-() const;
  TruncatedSeries operator+(const TruncatedSeries& o) const;
  TruncatedSeries operator-(const TruncatedSeries& o) const;
  TruncatedSeries operator*(const TruncatedSeries& o) const;
  TruncatedSeries& operator+=(const TruncatedSeries& o) { return *this = *this + o; }
  TruncatedSeries& operator-=(const TruncatedSeries& o) { return *this = *this - o; }
  TruncatedSeries& operator*=(const TruncatedSeries& o) { return *this = *this * o; }

  TruncatedSeries scale(const WittElem& w) const;
  TruncatedSeries mul_int(std::int64_t k) const;
  TruncatedSeries mul_p(int k = 1) const;        // multiply the value by p^k
  TruncatedSeries div_p_value(int k = 1) const;  // divide the value by p^k
  TruncatedSeries div_int_value(std::int64_t n) const;
  TruncatedSeries inv() const;  // inverse of a unit
  TruncatedSeries pow(std::uint64_t n) const;
  TruncatedSeries sigma_coeffs(int k = 1) const;  // Frobenius on coefficients

  TruncatedSeries theta(int i) const;  // t'_i d/dt_i
  TruncatedSeries delta(int i) const;  // d/dt'_i = d/dt_i

  /// Composition g(images).  Every image must be integral with constant term
  /// in pW; throws "substitution divergent" otherwise.
  TruncatedSeries substitute(const std::vector<TruncatedSeries>& images) const;

  /// Evaluation at a W-point; every value must have valuation >= 1.
  WittElem evaluate(const std::vector<WittElem>& values) const;

  TruncatedSeries reduce(int prec) const;  // cap every coefficient precision
  TruncatedSeries normalized() const;      // strip p factors against the denominator

  /// Exact division by t_i^k; throws when a monomial with e_i < k survives.
  TruncatedSeries div_variable_power(int i, int k) const;

 private:
  SeriesRingPtr ring_;
  std::vector<WittElem> c_;
  int denom_ = 0;
};

/// exp on series with constant term in pW; may produce a denominator.
TruncatedSeries exp_series(const TruncatedSeries& x);
/// log on units congruent to 1 mod (p, t).
TruncatedSeries log_series(const TruncatedSeries& u);

/// Inverts a coordinate system q (q_i = t_i * unit for i < r, q_i = 1 + unit t_i + ...
/// for i >= r): returns x with q(x) = identity chart and x(q) = identity chart.
std::vector<TruncatedSeries> invert_coordinates(const std::vector<TruncatedSeries>& q);

bool agree(const TruncatedSeries& a, const TruncatedSeries& b);

/// Copies a series into another ring over the same Witt ring with the same
/// variable split; monomials outside the target truncation are dropped, and
/// monomials missing from the source are taken as zero.
TruncatedSeries reembed(const TruncatedSeries& s, const SeriesRingPtr& target);

class SeriesRing : public std::enable_shared_from_this<SeriesRing> {
 public:
  static SeriesRingPtr make(WittRingPtr base, int m, int r, int D);

  const WittRingPtr& witt() const { return witt_; }
  int vars() const { return m_; }
  int log_vars() const { return r_; }
  int trunc() const { return D_; }
  std::size_t size() const { return exps_.size(); }  // number of monomials

  const Exponents& exponents(std::size_t idx) const { return exps_[idx]; }
  int degree(std::size_t idx) const { return deg_[idx]; }
  std::size_t index(const Exponents& e) const;         // throws when out of range
  long find_index(const Exponents& e) const;           // -1 when truncated away
  std::size_t degree_begin(int d) const { return off_[d]; }
  std::size_t degree_end(int d) const { return off_[d + 1]; }

  TruncatedSeries zero() const;
  TruncatedSeries constant(const WittElem& w) const;
  TruncatedSeries constant_int(std::int64_t v) const;
  TruncatedSeries variable(int i) const;            // t_i
  TruncatedSeries twisted_variable(int i) const;    // t'_i
  TruncatedSeries monomial(const Exponents& e, const WittElem& w) const;

 private:
  SeriesRing() = default;
  friend class TruncatedSeries;

  WittRingPtr witt_;
  int m_ = 1, r_ = 0, D_ = 1;
  std::vector<Exponents> exps_;
  std::vector<int> deg_;
  std::vector<std::size_t> off_;
  std::vector<long> radix_;  // dense index lookup, -1 for truncated monomials
  std::size_t radix_stride(int i) const;
};

bool same_ring(const SeriesRing& a, const SeriesRing& b);

namespace kernels {

/// Serial reference convolution: out[k] = sum_{e_i + e_j = e_k} a_i b_j.
void convolve_serial(const SeriesRing& R, const std::vector<WittElem>& a,
                     const std::vector<WittElem>& b, std::vector<WittElem>& out);

/// OpenMP kernel, parallel over output monomials; bitwise-identical to the
/// serial reference (exact arithmetic, fixed per-output accumulation order).
void convolve_parallel(const SeriesRing& R, const std::vector<WittElem>& a,
                       const std::vector<WittElem>& b, std::vector<WittElem>& out);

/// Global switch consulted by TruncatedSeries::operator*; default off so CLI
/// jobs stay single-threaded.  The benchmark and tests turn it on explicitly.
bool parallel_enabled();
void set_parallel(bool on);

}  // namespace kernels

}  // namespace logcrys
