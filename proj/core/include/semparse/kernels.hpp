#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "semparse/real.hpp"

// Elementary forward kernels shared by the autodiff tape and the
// gradient-free inference path, so both compute identical values.

namespace semparse::kernels {

inline void matvec(const real* W, const real* x, real* out, int m, int n) {
  for (int i = 0; i < m; ++i) {
    real acc = 0;
    const real* row = W + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

// out[j] += sum_i W[i][j] * g[i]
inline void matvec_transposed_accum(const real* W, const real* g, real* out,
                                    int m, int n) {
  for (int i = 0; i < m; ++i) {
    const real gi = g[i];
    if (gi == real(0)) continue;
    const real* row = W + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) out[j] += row[j] * gi;
  }
}

inline void add(const real* a, const real* b, real* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

inline void tanh_vec(const real* x, real* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

inline real logistic(real x) { return real(1) / (real(1) + std::exp(-x)); }

inline void logistic_vec(const real* x, real* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = logistic(x[i]);
}

inline real dot(const real* a, const real* b, int n) {
  real acc = 0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline real logaddexp(real a, real b) {
  if (a == -std::numeric_limits<real>::infinity()) return b;
  if (b == -std::numeric_limits<real>::infinity()) return a;
  real hi = a > b ? a : b;
  real lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline void mul(const real* a, const real* b, real* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

// Masked distributions; entries with mask 0 come out exactly 0 (resp. -inf).
// Returns false when no entry is legal.
inline bool masked_softmax(const real* x, const unsigned char* mask, real* out,
                           int n) {
  bool any = false;
  real mx = -std::numeric_limits<real>::infinity();
  for (int i = 0; i < n; ++i)
    if (mask[i]) {
      any = true;
      if (x[i] > mx) mx = x[i];
    }
  if (!any) return false;
  real z = 0;
  for (int i = 0; i < n; ++i) {
    out[i] = 0;
    if (mask[i]) {
      out[i] = std::exp(x[i] - mx);
      z += out[i];
    }
  }
  for (int i = 0; i < n; ++i)
    if (mask[i]) out[i] /= z;
  return true;
}

inline bool masked_log_softmax(const real* x, const unsigned char* mask,
                               real* out, int n) {
  bool any = false;
  real mx = -std::numeric_limits<real>::infinity();
  for (int i = 0; i < n; ++i)
    if (mask[i]) {
      any = true;
      if (x[i] > mx) mx = x[i];
    }
  if (!any) return false;
  real z = 0;
  for (int i = 0; i < n; ++i)
    if (mask[i]) z += std::exp(x[i] - mx);
  const real lse = mx + std::log(z);
  for (int i = 0; i < n; ++i)
    out[i] = mask[i] ? x[i] - lse : -std::numeric_limits<real>::infinity();
  return true;
}

}  // namespace semparse::kernels
