#pragma once

#include "logcrys/crystal.hpp"

namespace logcrys {

/// F-crystal over the log point: commuting nilpotent operators N_1..N_l, a
/// sigma-semilinear Frobenius with N_i F = p F N_i, and an optional flag.
struct LogPointFCrystal {
  WittRingPtr W;
  int rank = 0;
  int log_rank = 0;
  std::vector<Mat<WittElem>> N;
  Mat<WittElem> F;
  std::vector<std::vector<int>> fil;

  LogPointFCrystal() = default;
  LogPointFCrystal(WittRingPtr w, int rk, int l);

  bool nilpotents_commute() const;
  bool nilpotents_nilpotent() const;  // N_i^k = 0 mod p^N for some k
  bool twist_relation() const;        // N_i F = p F sigma-twisted N_i
};

/// The log-point connection presentation: nabla(h) = sum lambda_i (x) N_i(h).
/// The categories agree, so both directions are matrix repackaging plus the
/// integrability <-> commutativity check.
std::vector<Mat<WittElem>> connection_to_nilpotents(const std::vector<Mat<WittElem>>& nabla);
std::vector<Mat<WittElem>> nilpotents_to_connection(const std::vector<Mat<WittElem>>& N);

/// A W-valued log point of S with prescribed residue data: monoid images
/// f0(alpha_i) in N^l and units x_i for the log directions, displacement
/// values eps_i in pW for the twisted ones.
struct LogWPointMap {
  SeriesRingPtr ring;
  int log_rank = 0;                  // l of the target log point
  std::vector<std::vector<int>> f0;  // r vectors in N^l, f0(n)=0 only if n=0
  std::vector<WittElem> x;           // r units
  std::vector<WittElem> eps;         // m - r values in pW

  std::vector<WittElem> point_values() const;  // (0,..,0, eps) for evaluation
  std::vector<WittElem> gamma() const;         // x_i resp. 1 + eps_i, length m
};

/// Residue data for a morphism to the log point: g0 residues for the log
/// directions; the augmentation takes l = r, f0 = standard basis, g0 = 1.
struct LogPointResidueData {
  int log_rank = 0;
  std::vector<std::vector<int>> f0;
  std::vector<std::vector<std::uint64_t>> g0;  // residue coordinates, r entries

  static LogPointResidueData augmentation(const SeriesRingPtr& ring);
};

/// The unique lifting e with e o phi = sigma o e over the given residue data.
LogWPointMap teichmuller_point(const FrobLift& phi, const LogPointResidueData& e0);

/// sigma(e(t'_i)) - e(phi(t'_i)) on the monoid/unit coordinates; zero iff the
/// point intertwines phi with sigma.
std::vector<WittElem> teichmuller_defect(const FrobLift& phi, const LogWPointMap& e);

/// e^* of a Hodge F-crystal: N from the residues of the connection through
/// f0, F from F(phi) evaluated at the point, flag transported.
LogPointFCrystal pullback(const HodgeFCrystal& X, const LogWPointMap& e, const FrobLift& phi);

/// The divided-power identification e(phi1)^* H = e(phi2)^* H; conjugating by
/// it carries the first pullback onto the second.
Mat<WittElem> compare_pullbacks(const HodgeFCrystal& X, const LogPointResidueData& e0,
                                const FrobLift& phi1, const FrobLift& phi2);

/// N and F transported through a fiber identification T (sigma-semilinear F).
LogPointFCrystal transport_fiber(const LogPointFCrystal& A, const Mat<WittElem>& T);

}  // namespace logcrys
