#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace logcrys {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class WittRing;
using WittRingPtr = std::shared_ptr<const WittRing>;

/// Element of W(F_{p^s}) mod p^N, written on the power basis 1, z, ..., z^{s-1}
/// of a Teichmuller generator z.  Each element carries its own absolute
/// precision a <= N: coordinates are kept reduced mod p^a, and arithmetic
/// propagates the precision.
class WittElem {
 public:
  WittElem() = default;
  WittElem(WittRingPtr ring, std::vector<std::uint64_t> coords, int prec);

  const WittRingPtr& ring() const { return ring_; }
  const std::vector<std::uint64_t>& coords() const { return c_; }
  int prec() const { return prec_; }

  bool is_zero() const;        // zero at the tracked precision
  bool is_unit() const;        // valuation 0
  int valuation() const;       // min over coordinates, capped at prec
  bool in_prime_subring() const;  // all coordinates above the first vanish

  WittElem operator-() const;
  WittElem operator+(const WittElem& o) const;
  WittElem operator-(const WittElem& o) const;
  WittElem operator*(const WittElem& o) const;
  WittElem& operator+=(const WittElem& o) { return *this = *this + o; }
  WittElem& operator-=(const WittElem& o) { return *this = *this - o; }
  WittElem& operator*=(const WittElem& o) { return *this = *this * o; }

  WittElem mul_int(std::int64_t k) const;
  WittElem mul_p(int k = 1) const;        // multiply by p^k (precision gains, capped)
  WittElem div_exact_p(int k = 1) const;  // exact division; costs k digits
  WittElem inv() const;                   // unit inverse (Newton from the residue field)
  WittElem pow(std::uint64_t e) const;

  WittElem sigma(int k = 1) const;      // Frobenius automorphism, z -> z^p
  WittElem sigma_inv() const { return sigma(-1); }
  WittElem reduce(int prec) const;      // forget digits down to the given precision

  std::vector<std::string> to_strings() const;

 private:
  friend class WittRing;
  WittRingPtr ring_;
  std::vector<std::uint64_t> c_;
  int prec_ = 0;
};

/// The truncated Witt ring W(F_{p^s}) mod p^N.  The residue field is presented
/// as F_p[x]/(g0) for the first irreducible monic g0 of degree s (lex order),
/// and the stored minimal polynomial is the Hensel lift whose root z is the
/// Teichmuller representative: it divides x^{p^s-1} - 1 mod p^N.
class WittRing : public std::enable_shared_from_this<WittRing> {
 public:
  static WittRingPtr make(std::int64_t p, int s, int N);

  std::int64_t prime() const { return p_; }
  int degree() const { return s_; }
  int precision() const { return N_; }
  std::uint64_t pow_p(int k) const;  // p^k for 0 <= k <= N
  const std::vector<std::uint64_t>& min_poly() const { return minpoly_; }

  WittElem zero(int prec = -1) const;
  WittElem one(int prec = -1) const;
  WittElem from_int(std::int64_t v, int prec = -1) const;
  WittElem from_coords(const std::vector<std::uint64_t>& c, int prec = -1) const;
  WittElem from_strings(const std::vector<std::string>& c, int prec) const;
  WittElem zeta() const;

  /// Teichmuller lifting of a residue-field element (s coordinates mod p):
  /// the unique x with x^{p^s} = x and x = a mod p; maps 0 to 0.
  WittElem teichmuller(const std::vector<std::uint64_t>& residue) const;

  /// x^n / n! for x divisible by p (p odd).  Loses v_p(n!) digits.
  WittElem divided_power(const WittElem& x, std::uint64_t n) const;

  /// log on 1 + pW and its inverse exp on pW.
  WittElem log_unit(const WittElem& u) const;
  WittElem exp_p(const WittElem& x) const;

  /// Sum of the s conjugates; lands in the prime subring.
  WittElem trace(const WittElem& x) const;

  int factorial_valuation(std::uint64_t n) const;  // v_p(n!)
  WittElem factorial_unit(std::uint64_t n) const;  // n! / p^{v_p(n!)}

 private:
  WittRing() = default;
  void build_tables();
  std::vector<std::uint64_t> mul_raw(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b,
                                     std::uint64_t mod) const;
  friend class WittElem;

  std::int64_t p_ = 0;
  int s_ = 1;
  int N_ = 1;
  std::vector<std::uint64_t> ppow_;     // p^0 .. p^N
  std::vector<std::uint64_t> minpoly_;  // monic, low coefficients c_0..c_{s-1} mod p^N
  std::vector<std::vector<std::uint64_t>> zeta_pow_;   // z^s .. z^{2s-2}
  std::vector<std::vector<std::vector<std::uint64_t>>> sigma_mat_;  // sigma^k, k < s
};

/// V x = p * sigma^{-1}(x); sigma o V = V o sigma = multiplication by p.
WittElem vee(const WittElem& x);

bool same_ring(const WittRing& a, const WittRing& b);

}  // namespace logcrys
