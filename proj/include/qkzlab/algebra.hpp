#pragma once

// Finite-dimensional layer: the trigonometric exchange matrix, the
// transport operator of the difference system, the symmetry action on the
// chain, and the three nested bases indexed by site subsets.

#include <string>
#include <vector>

#include "qkzlab/params.hpp"
#include "qkzlab/ratfun.hpp"
#include "qkzlab/tensor.hpp"

namespace qkzlab {

// 4x4 exchange matrix in the (00, 01, 10, 11) product basis, first factor
// most significant.  R(1) is the flip, R_21(1/z) R(z) = Id.
inline cmat r_matrix(cplx zr, const model_params& par) {
  const cplx q = par.q;
  cplx den = q * zr - 1.0 / q;
  if (std::abs(den) < 1e-13)
    throw std::domain_error("exchange matrix evaluated at its pole q z = 1/q");
  cplx b = (zr - 1.0) / den;
  cplx c = (q - 1.0 / q) / den;
  cmat R(4, 4);
  R(0, 0) = 1.0;
  R(3, 3) = 1.0;
  R(1, 1) = b;
  R(2, 2) = b;
  R(1, 2) = c * zr;
  R(2, 1) = c;
  return R;
}

// transport operator for the shift z_j -> p z_j: exchange with every site
// to the right at the plain ratios, the diagonal twist diag(1, kappa) on
// site j, then exchange with every site to the left at the p-shifted
// ratios.  Preserves the weight decomposition.
inline cmat k_operator(int j, const model_params& par) {
  const int n = par.n;
  const int dim = 1 << n;
  auto site_ratio = [&](int k, bool shifted) {
    cplx zr = (shifted ? par.p : cplx{1.0, 0.0}) *
              par.z[static_cast<std::size_t>(j - 1)] /
              par.z[static_cast<std::size_t>(k - 1)];
    if (std::abs(par.q * zr - 1.0 / par.q) < 1e-13)
      throw std::domain_error("transport operator hits an exchange pole "
                              "between sites " +
                              std::to_string(j) + " and " + std::to_string(k));
    return zr;
  };
  cmat op = cmat::identity(dim);
  for (int k = j + 1; k <= n; ++k)
    op = mat_mul(embed_two_site(r_matrix(site_ratio(k, false), par), j, k, n),
                 op);
  cmat twist(2, 2);
  twist(0, 0) = 1.0;
  twist(1, 1) = par.kappa;
  op = mat_mul(embed_one_site(twist, j, n), op);
  for (int k = 1; k < j; ++k)
    op = mat_mul(embed_two_site(r_matrix(site_ratio(k, true), par), j, k, n),
                 op);
  return op;
}

// ---- symmetry action ---------------------------------------------------

enum class uq_gen { e, f, k };

// chain action of the quantum-group generators with the left-nested
// comultiplication: e acts as sum_j K^{-1} x ... x K^{-1} x sigma+ x 1 ...,
// f as sum_j 1 x ... x sigma- x K x ... x K, k as K x ... x K
inline cvec quantum_group_action(uq_gen gen, const cvec& v,
                                 const model_params& par) {
  const int n = par.n;
  const int dim = 1 << n;
  if (static_cast<int>(v.size()) != dim)
    throw std::invalid_argument("quantum_group_action: dimension mismatch");
  const cplx q = par.q;
  cmat sp(2, 2), sm(2, 2), kmat(2, 2), kinv(2, 2);
  sp(0, 1) = 1.0;
  sm(1, 0) = 1.0;
  kmat(0, 0) = q;
  kmat(1, 1) = 1.0 / q;
  kinv(0, 0) = 1.0 / q;
  kinv(1, 1) = q;
  if (gen == uq_gen::k) {
    cvec out = v;
    for (int j = 1; j <= n; ++j) out = mat_vec(embed_one_site(kmat, j, n), out);
    return out;
  }
  cvec out(static_cast<std::size_t>(dim));
  for (int j = 1; j <= n; ++j) {
    cvec cur = v;
    if (gen == uq_gen::e) {
      for (int i = 1; i < j; ++i)
        cur = mat_vec(embed_one_site(kinv, i, n), cur);
      cur = mat_vec(embed_one_site(sp, j, n), cur);
    } else {
      cur = mat_vec(embed_one_site(sm, j, n), cur);
      for (int i = j + 1; i <= n; ++i)
        cur = mat_vec(embed_one_site(kmat, i, n), cur);
    }
    for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i)] +=
        cur[static_cast<std::size_t>(i)];
  }
  return out;
}

// ---- subset-indexed bases ------------------------------------------------

inline cvec unit_vector(const subset& M, int n) {
  cvec v(static_cast<std::size_t>(1) << n);
  v[static_cast<std::size_t>(basis_index(M, n))] = 1.0;
  return v;
}

// triangular change of basis built from the residue table: the tilde vector
// of M collects every N >= M with coefficient Res w_N at the site tuple of M
inline cvec tilde_vector(const subset& M, const model_params& par,
                         const std::vector<subset>& subs, const cmat& T) {
  cvec out(static_cast<std::size_t>(1) << par.n);
  int iM = -1;
  for (std::size_t k = 0; k < subs.size(); ++k)
    if (subs[k] == M) iM = static_cast<int>(k);
  if (iM < 0) throw std::invalid_argument("tilde_vector: subset not in list");
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subset_leq(M, subs[k])) continue;
    out[static_cast<std::size_t>(basis_index(subs[k], par.n))] +=
        T(static_cast<int>(k), iM);
  }
  return out;
}

// rescaled tilde vector; the prefactor is the pairwise cross ratio over M
inline cplx bar_prefactor(const subset& M, const model_params& par) {
  const cplx q = par.q;
  cplx pref{1.0, 0.0};
  for (std::size_t a = 0; a < M.size(); ++a)
    for (std::size_t b = a + 1; b < M.size(); ++b) {
      cplx za = par.z[static_cast<std::size_t>(M[a] - 1)];
      cplx zb = par.z[static_cast<std::size_t>(M[b] - 1)];
      pref *= (za - zb) / ((za / (q * q) - zb) * (za - zb / (q * q)));
    }
  return pref;
}

inline cvec bar_vector(const subset& M, const model_params& par,
                       const std::vector<subset>& subs, const cmat& T) {
  cvec out = tilde_vector(M, par, subs, T);
  cplx pref = bar_prefactor(M, par);
  for (cplx& c : out) c *= pref;
  return out;
}

enum class vec_kind { plain, tilde, bar };

inline cvec subset_basis_vector(vec_kind kind, const subset& M,
                                const model_params& par,
                                const std::vector<subset>& subs,
                                const cmat& T) {
  switch (kind) {
    case vec_kind::plain: return unit_vector(M, par.n);
    case vec_kind::tilde: return tilde_vector(M, par, subs, T);
    default: return bar_vector(M, par, subs, T);
  }
}

// ---- weight and singularity ------------------------------------------------

struct weight_report {
  bool homogeneous = false;  // supported on a single weight block
  int weight = -1;           // lowered-site count of that block
  bool singular = false;     // annihilated by the raising generator
  bool trivial = false;      // the zero vector; flagged, not celebrated
  double raising_norm = 0.0;
};

inline weight_report weight_and_singular(const cvec& v,
                                         const model_params& par,
                                         double tol = 1e-10) {
  weight_report rep;
  double nv = inf_norm(v);
  if (nv == 0.0) {
    rep.trivial = true;
    rep.singular = true;
    return rep;
  }
  int w = -1;
  bool homo = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= tol * nv) continue;
    int pc = weight_of_index(static_cast<int>(i));
    if (w < 0) w = pc;
    else if (pc != w) homo = false;
  }
  rep.homogeneous = homo;
  rep.weight = homo ? w : -1;
  cvec ev = quantum_group_action(uq_gen::e, v, par);
  rep.raising_norm = inf_norm(ev) / nv;
  rep.singular = rep.raising_norm <= tol;
  return rep;
}

}  // namespace qkzlab
