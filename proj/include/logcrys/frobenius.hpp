#pragma once

#include "logcrys/connection.hpp"
#include "logcrys/logdiff.hpp"

namespace logcrys {

/// A lifting of the absolute Frobenius: t'_i -> (t'_i)^p f_i with f_i = 1 mod p,
/// acting sigma-semilinearly on coefficients.
class FrobLift {
 public:
  static FrobLift standard(SeriesRingPtr ring);  // all f_i = 1
  static FrobLift make(std::vector<TruncatedSeries> f);

  const SeriesRingPtr& ring() const { return ring_; }
  bool standard_lift() const { return standard_; }
  const std::vector<TruncatedSeries>& twists() const { return f_; }

  /// substitution images of the plain variables t_i
  const std::vector<TruncatedSeries>& images() const { return images_; }

  TruncatedSeries operator()(const TruncatedSeries& g) const;  // pullback phi^*
  Mat<TruncatedSeries> operator()(const Mat<TruncatedSeries>& m) const;
  LogOneForm pullback_form(const LogOneForm& eta) const;

  /// coefficients c_ij with phi^*(dlog t'_j) = sum_i c_ij dlog t'_i
  Mat<TruncatedSeries> dlog_pullback_matrix() const;

 private:
  FrobLift() = default;
  SeriesRingPtr ring_;
  std::vector<TruncatedSeries> f_;
  std::vector<TruncatedSeries> images_;
  bool standard_ = false;
};

/// Divided power x^n / n! of a series whose value has positive valuation.
TruncatedSeries divided_power_series(const TruncatedSeries& x, int n);

/// The change-of-lifting transport chi(phi1, phi2): phi1^* H -> phi2^* H in the
/// standard bases, as the divided-power series in the connection operators.
/// Satisfies F(phi1) = F(phi2) chi(phi1, phi2).
Mat<TruncatedSeries> chi_transport(const Connection& nabla, const FrobLift& phi1,
                                   const FrobLift& phi2);

}  // namespace logcrys
