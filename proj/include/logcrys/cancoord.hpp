#pragma once

#include "logcrys/logdiff.hpp"
#include "logcrys/logpoint.hpp"

namespace logcrys {

/// Distinguished frame of an ordinary weight-1 crystal: horizontal F-fixed
/// columns a spanning the unit-root part, columns b spanning Fil^1 with
/// nabla b_i = sum_j eta_ij a_j and F psi^* b_i = p b_i + p sum_j u_ij a_j.
struct Weight1Frame {
  SeriesRingPtr ring;
  int g = 0, h = 0;
  Mat<TruncatedSeries> a;  // rank x g
  Mat<TruncatedSeries> b;  // rank x h
  std::vector<std::vector<LogOneForm>> eta;  // h x g
  Mat<TruncatedSeries> u;                    // h x g, for the standard lifting
};

/// tau_ij = tau^log_ij + tau'_ij with d tau = eta and the bigstar-normalized
/// analytic constant term.
struct TauData {
  SeriesRingPtr ring;
  std::vector<std::vector<LogPrimitive>> tau;  // h x g
};

struct CanonicalCoordinates {
  std::vector<TruncatedSeries> q;        // m series, q_j = t_j q'_j resp. q'_j
  std::vector<TruncatedSeries> inverse;  // t expressed in the q-chart
  Weight1Frame frame;                    // residue-normalized frame
  TauData tau;
};

/// The crystal rewritten in the canonical chart (truncation shrinks by one);
/// a and b are the transported frame columns.
struct QChart {
  HodgeFCrystal X;
  Mat<TruncatedSeries> a, b;
};

Weight1Frame weight1_frame(const HodgeFCrystal& X);

/// The frame sub-crystal on the basis [a | b] (rank g + h).
HodgeFCrystal frame_crystal(const HodgeFCrystal& X, const Weight1Frame& fr);

TauData tau_from_frame(const Weight1Frame& fr);

/// phi^* tau - p tau - p u(phi), with u(phi) derived through the chi
/// transport; vanishes for every lifting on valid crystals.
Mat<TruncatedSeries> verify_club(const HodgeFCrystal& X, const Weight1Frame& fr,
                                 const TauData& tau, const FrobLift& phi);

/// q'_ij = exp(tau'_ij); p-integrality is a theorem and is asserted.
std::vector<std::vector<TruncatedSeries>> qprime(const TauData& tau);

/// Cor wt1: g = 1, residues normalizable to the standard arrangement.
CanonicalCoordinates canonical_coordinates(const HodgeFCrystal& X);

QChart to_q_chart(const HodgeFCrystal& X, const CanonicalCoordinates& qc);

/// Helper shared with the CY3 pipeline: the crystal induced on the span of a
/// column basis (columns must be F- and nabla-stable at precision).
HodgeFCrystal restrict_to_span(const HodgeFCrystal& X, const Mat<TruncatedSeries>& basis,
                               const std::vector<std::vector<int>>& fil, int weight);

}  // namespace logcrys
