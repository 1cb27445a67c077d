#pragma once

#include "logcrys/matrix.hpp"
#include "logcrys/series.hpp"

namespace logcrys {

/// Logarithmic 1-form: m series coefficients on the basis dlog t'_1..dlog t'_m.
struct LogOneForm {
  SeriesRingPtr ring;
  std::vector<TruncatedSeries> comp;

  explicit LogOneForm(SeriesRingPtr r);
  LogOneForm(SeriesRingPtr r, std::vector<TruncatedSeries> c);

  bool is_zero() const;
  LogOneForm operator+(const LogOneForm& o) const;
  LogOneForm operator-(const LogOneForm& o) const;
  LogOneForm scale(const TruncatedSeries& f) const;
  LogOneForm mul_int(std::int64_t k) const;
};

/// Logarithmic 2-form on the basis dlog t'_i ^ dlog t'_j (i < j); stored as an
/// exactly antisymmetric matrix of series.
struct LogTwoForm {
  SeriesRingPtr ring;
  Mat<TruncatedSeries> comp;

  explicit LogTwoForm(SeriesRingPtr r);
  bool is_zero() const;
};

/// tau = sum_l logpart_l log t_l + analytic, the shape produced by the log
/// Poincare lemma; the analytic part may carry denominators.
struct LogPrimitive {
  SeriesRingPtr ring;
  std::vector<WittElem> logpart;  // r entries
  TruncatedSeries analytic;

  explicit LogPrimitive(SeriesRingPtr r);
  LogOneForm d() const;  // component i: logpart_i [i<r] + theta_i(analytic)
};

LogOneForm exterior_d(const TruncatedSeries& g);
LogTwoForm exterior_d(const LogOneForm& eta);

/// Integrates a closed log 1-form: d(result) = eta, residues read off as the
/// constant terms of the log components, analytic constant term set to 0.
/// Throws when eta is not closed at the working precision.
LogPrimitive poincare_integrate(const LogOneForm& eta);

}  // namespace logcrys
