#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkzlab/params.hpp"

namespace qkzlab {

using cvec = std::vector<cplx>;

// dense row-major complex matrix, sized for spaces up to 2^n
struct cmat {
  int rows = 0, cols = 0;
  cvec a;

  cmat() = default;
  cmat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

  cplx& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const cplx& operator()(int r, int c) const {
    return a[static_cast<std::size_t>(r) * cols + c];
  }

  static cmat identity(int d) {
    cmat m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline cmat mat_mul(const cmat& A, const cmat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("mat_mul: shape mismatch");
  cmat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      cplx aik = A(i, k);
      if (aik == cplx{}) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

inline cvec mat_vec(const cmat& A, const cvec& v) {
  if (A.cols != static_cast<int>(v.size()))
    throw std::invalid_argument("mat_vec: shape mismatch");
  cvec out(static_cast<std::size_t>(A.rows));
  for (int i = 0; i < A.rows; ++i) {
    cplx s{};
    for (int j = 0; j < A.cols; ++j) s += A(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

inline double inf_norm(const cvec& v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double inf_dist(const cvec& a, const cvec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// embed a 2x2 operator acting on site j of an n-site chain
inline cmat embed_one_site(const cmat& A2, int j, int n) {
  int dim = 1 << n;
  cmat out(dim, dim);
  for (int col = 0; col < dim; ++col) {
    int bj = (col >> (n - j)) & 1;
    int base = col & ~(1 << (n - j));
    for (int aj = 0; aj < 2; ++aj) {
      cplx amp = A2(aj, bj);
      if (amp != cplx{}) out(base | (aj << (n - j)), col) += amp;
    }
  }
  return out;
}

// embed a two-site operator with its first slot on site j, second on site k
inline cmat embed_two_site(const cmat& R4, int j, int k, int n) {
  int dim = 1 << n;
  cmat out(dim, dim);
  for (int col = 0; col < dim; ++col) {
    int bj = (col >> (n - j)) & 1;
    int bk = (col >> (n - k)) & 1;
    int base = (col & ~(1 << (n - j))) & ~(1 << (n - k));
    for (int aj = 0; aj < 2; ++aj)
      for (int ak = 0; ak < 2; ++ak) {
        cplx amp = R4(2 * aj + ak, 2 * bj + bk);
        if (amp != cplx{})
          out(base | (aj << (n - j)) | (ak << (n - k)), col) += amp;
      }
  }
  return out;
}

struct det_result {
  cplx value;
  double min_pivot;  // smallest pivot magnitude met during elimination
};

// determinant by partial-pivot elimination; inputs here are tiny
inline det_result det_pivot(cmat A) {
  if (A.rows != A.cols) throw std::invalid_argument("det_pivot: not square");
  int d = A.rows;
  cplx det{1.0, 0.0};
  double minp = 1e300;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(A(c, j), A(piv, j));
      det = -det;
    }
    cplx pc = A(c, c);
    minp = std::min(minp, std::abs(pc));
    if (pc == cplx{}) return {cplx{}, 0.0};
    det *= pc;
    for (int r = c + 1; r < d; ++r) {
      cplx f = A(r, c) / pc;
      if (f == cplx{}) continue;
      for (int j = c; j < d; ++j) A(r, j) -= f * A(c, j);
    }
  }
  return {det, minp};
}

// Singular values of a small complex matrix via cyclic Jacobi on A^H A.
// Good to ~1e-14 relative for the well-separated spectra met here; used
// only for the basis independence certificate.
inline std::vector<double> singular_values(const cmat& A) {
  int nc = A.cols;
  cmat H(nc, nc);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) {
      cplx s{};
      for (int r = 0; r < A.rows; ++r) s += std::conj(A(r, i)) * A(r, j);
      H(i, j) = s;
    }
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < nc; ++i)
      for (int j = i + 1; j < nc; ++j) off = std::max(off, std::abs(H(i, j)));
    double diag = 0.0;
    for (int i = 0; i < nc; ++i) diag = std::max(diag, std::abs(H(i, i)));
    if (off <= 1e-15 * std::max(diag, 1e-300)) break;
    for (int pcol = 0; pcol < nc; ++pcol)
      for (int qcol = pcol + 1; qcol < nc; ++qcol) {
        cplx hpq = H(pcol, qcol);
        if (std::abs(hpq) == 0.0) continue;
        double hpp = H(pcol, pcol).real();
        double hqq = H(qcol, qcol).real();
        // unitary 2x2 diagonalization of [[hpp, hpq],[conj(hpq), hqq]]:
        // U = diag(1, phi) * real rotation, phi chosen to make hpq real
        cplx phi = std::conj(hpq) / std::abs(hpq);
        double tau = (hqq - hpp) / (2.0 * std::abs(hpq));
        double t = (tau >= 0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double sr = t * c;
        for (int k = 0; k < nc; ++k) {
          cplx hkp = H(k, pcol), hkq = H(k, qcol);
          H(k, pcol) = c * hkp - phi * sr * hkq;
          H(k, qcol) = sr * hkp + phi * c * hkq;
        }
        for (int k = 0; k < nc; ++k) {
          cplx hpk = H(pcol, k), hqk = H(qcol, k);
          H(pcol, k) = c * hpk - std::conj(phi) * sr * hqk;
          H(qcol, k) = sr * hpk + std::conj(phi) * c * hqk;
        }
      }
  }
  std::vector<double> sv(static_cast<std::size_t>(nc));
  for (int i = 0; i < nc; ++i)
    sv[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, H(i, i).real()));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace qkzlab
