#pragma once

#include <vector>

#include "logcrys/witt.hpp"

namespace logcrys {

/// Dense matrix over a local-ring element type (WittElem or TruncatedSeries).
/// Inversion pivots on unit entries only; every invertible matrix over these
/// rings admits such pivots.
template <class T>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c, const T& fill) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

template <class T>
Mat<T> mat_identity(int n, const T& one, const T& zero) {
  Mat<T> m(n, n, zero);
  for (int i = 0; i < n; ++i) m(i, i) = one;
  return m;
}

template <class T>
Mat<T> matmul(const Mat<T>& x, const Mat<T>& y) {
  if (x.cols != y.rows) throw Error("matmul: shape mismatch");
  Mat<T> z(x.rows, y.cols, x.a.empty() ? y.a.front() : x.a.front());
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < y.cols; ++j) {
      T acc = x(i, 0) * y(0, j);
      for (int k = 1; k < x.cols; ++k) acc += x(i, k) * y(k, j);
      z(i, j) = acc;
    }
  return z;
}

template <class T>
Mat<T> matadd(const Mat<T>& x, const Mat<T>& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw Error("matadd: shape mismatch");
  Mat<T> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = z.a[i] + y.a[i];
  return z;
}

template <class T>
Mat<T> matsub(const Mat<T>& x, const Mat<T>& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw Error("matsub: shape mismatch");
  Mat<T> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = z.a[i] - y.a[i];
  return z;
}

template <class T>
Mat<T> mat_scale(const Mat<T>& x, const T& s) {
  Mat<T> z = x;
  for (auto& v : z.a) v = v * s;
  return z;
}

template <class T>
Mat<T> mat_transpose(const Mat<T>& x) {
  Mat<T> z(x.cols, x.rows, x.a.front());
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) z(j, i) = x(i, j);
  return z;
}

template <class T, class F>
Mat<T> mat_apply(const Mat<T>& x, F&& f) {
  Mat<T> z = x;
  for (auto& v : z.a) v = f(v);
  return z;
}

template <class T>
bool mat_is_zero(const Mat<T>& x) {
  for (const auto& v : x.a)
    if (!v.is_zero()) return false;
  return true;
}

/// Gauss-Jordan inverse with unit pivoting (deterministic: lowest row first).
template <class T>
Mat<T> mat_inverse(const Mat<T>& m, const T& one, const T& zero) {
  if (m.rows != m.cols) throw Error("mat_inverse: not square");
  int n = m.rows;
  Mat<T> a = m;
  Mat<T> inv = mat_identity(n, one, zero);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (a(i, col).is_unit()) {
        piv = i;
        break;
      }
    if (piv < 0) throw Error("matrix not invertible over the local ring");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    T d = a(col, col).inv();
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) * d;
      inv(col, j) = inv(col, j) * d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      T f = a(i, col);
      if (f.is_zero()) continue;
      for (int j = 0; j < n; ++j) {
        a(i, j) = a(i, j) - f * a(col, j);
        inv(i, j) = inv(i, j) - f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace logcrys
