#include <atomic>

#include "logcrys/series.hpp"

#ifdef LOGCRYS_HAVE_OPENMP
#include <omp.h>
#endif

namespace logcrys::kernels {

namespace {
std::atomic<bool> g_parallel{false};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void convolve_serial(const SeriesRing& R, const std::vector<WittElem>& a,
                     const std::vector<WittElem>& b, std::vector<WittElem>& out) {
  const int N = R.witt()->precision();
  const int D = R.trunc();
  out.assign(R.size(), R.witt()->zero());
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool skip_i = a[i].is_zero() && a[i].prec() == N;
    if (skip_i) continue;
    const int di = R.degree(i);
    const auto& ei = R.exponents(i);
    const std::size_t jmax = R.degree_end(D - 1 - di);
    for (std::size_t j = 0; j < jmax; ++j) {
      if (b[j].is_zero() && b[j].prec() == N) continue;
      Exponents e = ei;
      const auto& ej = R.exponents(j);
      for (int v = 0; v < R.vars(); ++v) e[v] += ej[v];
      std::size_t k = R.index(e);
      out[k] = out[k] + a[i] * b[j];
    }
  }
}

void convolve_parallel(const SeriesRing& R, const std::vector<WittElem>& a,
                       const std::vector<WittElem>& b, std::vector<WittElem>& out) {
#ifndef LOGCRYS_HAVE_OPENMP
  convolve_serial(R, a, b, out);
#else
  const int N = R.witt()->precision();
  out.assign(R.size(), R.witt()->zero());
  const long n = static_cast<long>(R.size());
  // Each output coefficient is an independent sum over the divisors of its
  // monomial, accumulated in a fixed order: results match the serial kernel
  // exactly for any thread count.
#pragma omp parallel for schedule(dynamic, 16)
  for (long k = 0; k < n; ++k) {
    const auto& ek = R.exponents(k);
    WittElem acc = R.witt()->zero();
    Exponents ei(R.vars(), 0);
    // enumerate ei <= ek componentwise
    while (true) {
      long i = R.find_index(ei);
      if (i >= 0 && !(a[i].is_zero() && a[i].prec() == N)) {
        Exponents ej(R.vars());
        for (int v = 0; v < R.vars(); ++v) ej[v] = ek[v] - ei[v];
        long j = R.find_index(ej);
        if (j >= 0 && !(b[j].is_zero() && b[j].prec() == N)) acc = acc + a[i] * b[j];
      }
      int v = 0;
      while (v < R.vars() && ei[v] == ek[v]) ei[v++] = 0;
      if (v == R.vars()) break;
      ++ei[v];
    }
    out[k] = acc;
  }
#endif
}

}  // namespace logcrys::kernels
