#pragma once

#include <optional>
#include <string>

#include "logcrys/frobenius.hpp"

namespace logcrys {

/// Hodge F-crystal over S_0: connection, Frobenius matrix for the standard
/// lifting psi, adapted Hodge flag (index sets into the standard basis), and
/// an optional pairing for the Calabi-Yau case.
struct HodgeFCrystal {
  SeriesRingPtr ring;
  int rank = 0;
  Connection nabla;
  Mat<TruncatedSeries> frob;          // F(psi) on the standard basis
  std::vector<std::vector<int>> fil;  // fil[i] = basis indices of Fil^i; fil[0] = all
  int weight = 0;
  std::optional<Mat<TruncatedSeries>> pairing;

  HodgeFCrystal() = default;
  HodgeFCrystal(SeriesRingPtr r, int rk);

  bool in_fil(int level, int index) const;
  std::vector<int> fil_set(int level) const;  // empty beyond the stored flag
  int fil_rank(int level) const { return static_cast<int>(fil_set(level).size()); }
};

struct AxiomReport {
  struct Item {
    std::string axiom;
    bool pass;
    std::string witness;  // empty when passing
  };
  std::vector<Item> items;
  bool all_pass() const;
  const Item* first_failure() const;
};

/// Verifies integrability, flag shape, Griffiths transversality, p-divisibility,
/// horizontality of the Frobenius, quasi-nilpotence at truncation level, weight
/// bookkeeping and (when present) the pairing axioms.
AxiomReport check_axioms(const HodgeFCrystal& X);

/// Slope multiset; entries are reduced fractions with multiplicity expanded.
struct Polygon {
  std::vector<std::pair<long, long>> slopes;  // (num, den), sorted ascending
  bool operator==(const Polygon& o) const = default;
  std::string to_string() const;
};

Polygon hodge_polygon(const HodgeFCrystal& X);
/// Newton polygon of the fiber at the augmentation (t = 0), computed from the
/// s-fold linearization of the Frobenius; throws "raise N" when the tracked
/// precision cannot separate the slopes.
Polygon newton_polygon(const HodgeFCrystal& X);
bool is_ordinary(const HodgeFCrystal& X);

/// Prop UH data: U[i] is a basis of the slope-<= i part, Hi[i] a basis of the
/// i-th splitting summand U_i cap Fil^i; columns live in the standard basis.
struct SlopeFiltration {
  std::vector<Mat<TruncatedSeries>> U;
  std::vector<Mat<TruncatedSeries>> Hi;
};

SlopeFiltration slope_filtration(const HodgeFCrystal& X);

/// Basis matrix B with F(psi) psi^* B = B and nabla B = 0 for a unit-root
/// crystal; requires the constant-term Lang equation to be solvable over the
/// configured residue field.
Mat<TruncatedSeries> unit_root_basis(const HodgeFCrystal& X);

/// F(phi) derived from the stored F(psi) through the chi transport.
Mat<TruncatedSeries> derive_frobenius(const HodgeFCrystal& X, const FrobLift& phi);

/// theta_i(F) + M_i F - F * sum_j c_ij phi(M_j); zero iff F(phi) is horizontal.
Mat<TruncatedSeries> horizontality_defect(const HodgeFCrystal& X, const FrobLift& phi,
                                          const Mat<TruncatedSeries>& frob_phi, int i);

/// Solves B x = v over the series ring for a split-injective B (unit pivots);
/// throws when v is not in the column span at the tracked precision.
Mat<TruncatedSeries> solve_in_span(const Mat<TruncatedSeries>& B, const Mat<TruncatedSeries>& v);

/// Constant-term Lang equation B = Phi0 sigma(B) with B invertible, solved by
/// an F_p-linear kernel computation plus digit lifting.  Throws
/// "extend residue field" with the minimal degree found by brute force.
Mat<WittElem> solve_lang(const WittRingPtr& W, const Mat<WittElem>& phi0);

Mat<WittElem> evaluate_at_origin(const Mat<TruncatedSeries>& m);

}  // namespace logcrys
