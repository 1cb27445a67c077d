#include "logcrys/logdiff.hpp"

#include <string>

namespace logcrys {

LogOneForm::LogOneForm(SeriesRingPtr r) : ring(std::move(r)) {
  comp.assign(ring->vars(), ring->zero());
}

LogOneForm::LogOneForm(SeriesRingPtr r, std::vector<TruncatedSeries> c)
    : ring(std::move(r)), comp(std::move(c)) {
  if (static_cast<int>(comp.size()) != ring->vars())
    throw Error("LogOneForm: component count mismatch");
}

bool LogOneForm::is_zero() const {
  for (const auto& c : comp)
    if (!c.is_zero()) return false;
  return true;
}

LogOneForm LogOneForm::operator+(const LogOneForm& o) const {
  LogOneForm out(ring);
  for (int i = 0; i < ring->vars(); ++i) out.comp[i] = comp[i] + o.comp[i];
  return out;
}

LogOneForm LogOneForm::operator-(const LogOneForm& o) const {
  LogOneForm out(ring);
  for (int i = 0; i < ring->vars(); ++i) out.comp[i] = comp[i] - o.comp[i];
  return out;
}

LogOneForm LogOneForm::scale(const TruncatedSeries& f) const {
  LogOneForm out(ring);
  for (int i = 0; i < ring->vars(); ++i) out.comp[i] = comp[i] * f;
  return out;
}

LogOneForm LogOneForm::mul_int(std::int64_t k) const {
  LogOneForm out(ring);
  for (int i = 0; i < ring->vars(); ++i) out.comp[i] = comp[i].mul_int(k);
  return out;
}

LogTwoForm::LogTwoForm(SeriesRingPtr r) : ring(std::move(r)) {
  comp = Mat<TruncatedSeries>(ring->vars(), ring->vars(), ring->zero());
}

bool LogTwoForm::is_zero() const { return mat_is_zero(comp); }

LogPrimitive::LogPrimitive(SeriesRingPtr r) : ring(std::move(r)), analytic(ring->zero()) {
  logpart.assign(ring->log_vars(), ring->witt()->zero());
}

LogOneForm LogPrimitive::d() const {
  LogOneForm out(ring);
  for (int i = 0; i < ring->vars(); ++i) {
    out.comp[i] = analytic.theta(i);
    if (i < ring->log_vars()) out.comp[i] += ring->constant(logpart[i]);
  }
  return out;
}

LogOneForm exterior_d(const TruncatedSeries& g) {
  LogOneForm out(g.ring());
  for (int i = 0; i < g.ring()->vars(); ++i) out.comp[i] = g.theta(i);
  return out;
}

LogTwoForm exterior_d(const LogOneForm& eta) {
  LogTwoForm out(eta.ring);
  int m = eta.ring->vars();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      auto e = eta.comp[j].theta(i) - eta.comp[i].theta(j);
      out.comp(i, j) = e;
      out.comp(j, i) = -e;
    }
  return out;
}

LogPrimitive poincare_integrate(const LogOneForm& eta) {
  const auto ring = eta.ring;
  const auto& R = *ring;
  const auto& W = R.witt();
  const int m = R.vars();
  const int r = R.log_vars();
  const int D = R.trunc();

  auto dd = exterior_d(eta);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (!dd.comp(i, j).is_zero())
        throw Error("poincare_integrate: form not closed at dlog components (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");

  LogPrimitive tau(ring);
  std::vector<TruncatedSeries> rest = eta.comp;

  // log directions first, following the variable-by-variable induction;
  // components may have picked up denominators from earlier steps
  for (int i = 0; i < r; ++i) {
    const auto& a = rest[i];
    int ad = a.denom();
    WittElem c0 = a.constant_term();
    if (c0.valuation() < ad)
      throw Error("poincare_integrate: residue of dlog t_" + std::to_string(i) +
                  " is not integral");
    tau.logpart[i] = ad > 0 ? c0.div_exact_p(ad) : c0;
    auto g = R.zero();
    for (std::size_t k = 1; k < R.size(); ++k) {
      int ei = R.exponents(k)[i];
      if (ei == 0) {
        if (!a.coeff(k).is_zero())
          throw Error("poincare_integrate: form not closed (dlog t_" + std::to_string(i) +
                      " residue obstruction)");
        continue;
      }
      if (a.coeff(k).is_zero() && a.coeff(k).prec() == W->precision()) continue;
      auto mono = R.monomial(R.exponents(k), a.coeff(k)).div_int_value(ei);
      if (ad > 0) mono = mono.div_p_value(ad);
      g += mono;
    }
    tau.analytic += g;
    rest[i] -= R.constant(tau.logpart[i]);
    for (int j = 0; j < m; ++j) rest[j] -= g.theta(j);
  }

  // twisted directions: solve (1 + t_i) d/dt_i f = a_i
  for (int i = r; i < m; ++i) {
    auto b = rest[i] * (R.constant_int(1) + R.variable(i)).inv();
    int bd = b.denom();
    auto g = R.zero();
    for (std::size_t k = 0; k < R.size(); ++k) {
      if (b.coeff(k).is_zero() && b.coeff(k).prec() == W->precision()) continue;
      Exponents up = R.exponents(k);
      up[i] += 1;
      long idx = R.find_index(up);
      if (idx < 0) continue;  // antiderivative escapes the truncation order
      auto mono = R.monomial(up, b.coeff(k)).div_int_value(up[i]);
      if (bd > 0) mono = mono.div_p_value(bd);
      g += mono;
    }
    tau.analytic += g;
    for (int j = 0; j < m; ++j) rest[j] -= g.theta(j);
  }

  // residual must vanish, up to the inherent top-degree boundary of the
  // twisted directions
  for (int j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < R.size(); ++k) {
      if (m > r && R.degree(k) >= D - 1) continue;
      if (!rest[j].coeff(k).is_zero())
        throw Error("poincare_integrate: form not closed (residual in component " +
                    std::to_string(j) + ")");
    }
  }
  return tau;
}

}  // namespace logcrys
