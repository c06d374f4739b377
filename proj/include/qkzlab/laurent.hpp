#pragma once

// Sparse Laurent polynomials over C, keyed by exponent.  All products in
// this project stay small (degree window of a few dozen), so an ordered
// map keeps the code simple and exact.

#include <map>

#include "qkzlab/params.hpp"

namespace qkzlab {

using laurent = std::map<int, cplx>;

inline laurent lp_const(cplx c) { return c == cplx(0) ? laurent{} : laurent{{0, c}}; }

inline laurent lp_monomial(int k, cplx c = cplx(1)) {
  return c == cplx(0) ? laurent{} : laurent{{k, c}};
}

// drops coefficients below rel * max|coeff|; zero polynomial stays empty
inline laurent lp_clean(const laurent& f, double rel = 1e-13) {
  double mx = 0.0;
  for (const auto& [k, c] : f) mx = std::max(mx, std::abs(c));
  laurent out;
  if (mx == 0.0) return out;
  for (const auto& [k, c] : f)
    if (std::abs(c) > rel * mx) out[k] = c;
  return out;
}

inline laurent lp_add(const laurent& f, const laurent& g) {
  laurent out = f;
  for (const auto& [k, c] : g) out[k] += c;
  return out;
}

inline laurent lp_sub(const laurent& f, const laurent& g) {
  laurent out = f;
  for (const auto& [k, c] : g) out[k] -= c;
  return out;
}

inline laurent lp_scale(const laurent& f, cplx a) {
  laurent out;
  for (const auto& [k, c] : f) out[k] = a * c;
  return out;
}

inline laurent lp_mul(const laurent& f, const laurent& g) {
  laurent out;
  for (const auto& [kf, cf] : f)
    for (const auto& [kg, cg] : g) out[kf + kg] += cf * cg;
  return out;
}

// f(t) -> f(a t)
inline laurent lp_scale_arg(const laurent& f, cplx a) {
  laurent out;
  for (const auto& [k, c] : f) out[k] = c * ipow(a, k);
  return out;
}

// f(t) -> t^m f(t)
inline laurent lp_shift(const laurent& f, int m) {
  laurent out;
  for (const auto& [k, c] : f) out[k + m] = c;
  return out;
}

// keeps the regular part: exponents >= 0
inline laurent lp_plus(const laurent& f) {
  laurent out;
  for (const auto& [k, c] : f)
    if (k >= 0) out[k] = c;
  return out;
}

inline cplx lp_eval(const laurent& f, cplx t) {
  cplx s = 0;
  for (const auto& [k, c] : f) s += c * ipow(t, k);
  return s;
}

// (t - r0)(t - r1)...
inline laurent lp_from_roots(const std::vector<cplx>& roots) {
  laurent out = lp_const(1);
  for (cplx r : roots) out = lp_mul(out, laurent{{0, -r}, {1, cplx(1)}});
  return out;
}

// Euclidean quotient f / g by leading-term elimination; the remainder
// (top degree below deg g) is discarded. Laurent input is fine: the loop
// stops once the leading exponent of the running remainder drops below
// the leading exponent of g.
inline laurent lp_quot(const laurent& f, const laurent& g) {
  if (g.empty()) throw std::invalid_argument("lp_quot: division by zero polynomial");
  laurent rem = f;
  laurent quo;
  const int dg = g.rbegin()->first;
  const cplx lead = g.rbegin()->second;
  while (!rem.empty()) {
    const int dn = rem.rbegin()->first;
    if (dn < dg) break;
    const cplx c = rem.rbegin()->second / lead;
    quo[dn - dg] += c;
    for (const auto& [k, gc] : g) rem[dn - dg + k] -= c * gc;
    rem.erase(dn);
    for (auto it = rem.begin(); it != rem.end();)
      it = (std::abs(it->second) < 1e-16) ? rem.erase(it) : std::next(it);
  }
  return lp_clean(quo);
}

}  // namespace qkzlab
