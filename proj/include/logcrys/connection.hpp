#pragma once

#include "logcrys/matrix.hpp"
#include "logcrys/series.hpp"

namespace logcrys {

/// Integrable log connection on a free module of the given rank, presented by
/// the m matrices M_i of nabla(theta_i) on the standard basis: a coordinate
/// column v maps to theta_i(v) + M_i v.
struct Connection {
  SeriesRingPtr ring;
  int rank = 0;
  std::vector<Mat<TruncatedSeries>> M;  // one per variable

  Connection() = default;
  Connection(SeriesRingPtr r, int rk);
  Connection(SeriesRingPtr r, std::vector<Mat<TruncatedSeries>> mats);

  /// nabla(theta_i) applied columnwise to a coordinate matrix.
  Mat<TruncatedSeries> apply_theta(int i, const Mat<TruncatedSeries>& cols) const;

  /// theta_i(M_j) - theta_j(M_i) + M_i M_j - M_j M_i; zero iff integrable.
  Mat<TruncatedSeries> integrability_defect(int i, int j) const;

  /// prod_{j<n} (nabla(theta_i) - j) applied to the identity columns; used by
  /// the quasi-nilpotence certificate.
  Mat<TruncatedSeries> theta_falling_power(int i, int n) const;
};

Mat<TruncatedSeries> mat_theta(const Mat<TruncatedSeries>& m, int i);
Mat<TruncatedSeries> zero_matrix(const SeriesRingPtr& R, int rows, int cols);
Mat<TruncatedSeries> identity_matrix(const SeriesRingPtr& R, int n);
Mat<WittElem> zero_wmatrix(const WittRingPtr& W, int rows, int cols);
Mat<WittElem> identity_wmatrix(const WittRingPtr& W, int n);

}  // namespace logcrys
