#pragma once

#include <random>

#include "logcrys/series.hpp"

namespace logcrys::testutil {

inline WittElem random_elem(const WittRingPtr& R, std::mt19937_64& rng) {
  std::vector<std::uint64_t> c(R->degree());
  for (auto& x : c) x = rng() % R->pow_p(R->precision());
  return R->from_coords(c);
}

inline TruncatedSeries random_series(const SeriesRingPtr& R, std::mt19937_64& rng,
                                     double density = 0.6) {
  auto s = R->zero();
  std::vector<WittElem> c(R->size(), R->witt()->zero());
  for (std::size_t k = 0; k < R->size(); ++k)
    if (std::uniform_real_distribution<double>(0, 1)(rng) < density)
      c[k] = random_elem(R->witt(), rng);
  return TruncatedSeries(R, std::move(c), 0);
}

// coefficientwise agreement modulo p^{min(prec, order - deg)}; the natural
// comparison for maps that move the (p,t)-adic filtration around
inline bool agree_pt_adic(const TruncatedSeries& a, const TruncatedSeries& b, int order) {
  auto d = a - b;
  if (d.denom() != 0) return false;
  const auto& R = *d.ring();
  for (std::size_t k = 0; k < R.size(); ++k) {
    int need = order - R.degree(k);
    if (need <= 0) continue;
    const auto& w = d.coeff(k);
    if (w.valuation() < std::min(w.prec(), need)) return false;
  }
  return true;
}

// zero out all coefficients of total degree >= d
inline TruncatedSeries truncate_below(const TruncatedSeries& s, int d) {
  const auto& R = *s.ring();
  auto c = s.coeffs();
  for (std::size_t k = 0; k < R.size(); ++k)
    if (R.degree(k) >= d) c[k] = R.witt()->zero();
  return TruncatedSeries(s.ring(), std::move(c), s.denom());
}

}  // namespace logcrys::testutil
