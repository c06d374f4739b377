#pragma once

// Rational layer: the per-site source functions, their antisymmetrized
// products, residue extraction, and the polynomial identities feeding the
// determinant reductions.

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "qkzlab/laurent.hpp"
#include "qkzlab/params.hpp"
#include "qkzlab/tensor.hpp"

namespace qkzlab {

// ---- structured rational functions ----------------------------------------

// numerator / prod_i (t - poles[i]); the pole list is exact and every pole
// is simple.  Keeping the denominator as a root list makes residues exact
// (no quadrature involved).
struct rational_fn {
  laurent numerator;
  std::vector<cplx> poles;

  cplx operator()(cplx t) const {
    cplx den{1.0, 0.0};
    for (cplx u : poles) den *= (t - u);
    return lp_eval(numerator, t) / den;
  }
};

// residue at a declared pole; a point not on the list has residue zero
inline cplx residue_at(const rational_fn& f, cplx u, double rel = 1e-9) {
  int hit = -1;
  for (std::size_t i = 0; i < f.poles.size(); ++i)
    if (std::abs(u - f.poles[i]) <=
        rel * std::max(std::abs(u), std::abs(f.poles[i])))
      { hit = static_cast<int>(i); break; }
  if (hit < 0) return {0.0, 0.0};
  cplx at = f.poles[static_cast<std::size_t>(hit)];
  cplx den{1.0, 0.0};
  for (std::size_t i = 0; i < f.poles.size(); ++i)
    if (static_cast<int>(i) != hit) den *= (at - f.poles[i]);
  return lp_eval(f.numerator, at) / den;
}

// max growth ratio of |g(t) prod_i (t - poles[i])| approaching each listed
// pole (probed at relative distances 1e-3, 1e-4, 1e-5).  A value near 1
// certifies the list: no pole of order > 1 hides at a declared location.
inline double pole_probe_growth(const std::function<cplx(cplx)>& g,
                                const std::vector<cplx>& poles) {
  double worst = 0.0;
  const cplx dir = std::polar(1.0, 0.37);
  for (cplx u : poles) {
    double base = std::max(1.0, std::abs(u));
    double prev = -1.0;
    for (double d : {1e-3, 1e-4, 1e-5}) {
      cplx t = u + d * base * dir;
      cplx prod{1.0, 0.0};
      for (cplx v : poles) prod *= (t - v);
      double mag = std::abs(g(t) * prod);
      if (prev > 0.0) worst = std::max(worst, mag / std::max(prev, 1e-300));
      prev = mag;
    }
  }
  return worst;
}

// ---- source functions ------------------------------------------------------

// one-variable source attached to site m inside M: a single simple pole at
// z_m, zeros at q^2 z_j for the other members, normalized so the residue
// of (1/t) mu at z_m equals 1
inline rational_fn mu_fn(const subset& M, int m, const model_params& par) {
  const cplx q2 = par.q * par.q;
  std::vector<cplx> roots;
  cplx norm{1.0, 0.0};
  cplx zm = par.z[static_cast<std::size_t>(m - 1)];
  for (int j : M) {
    if (j == m) continue;
    cplx zj = par.z[static_cast<std::size_t>(j - 1)];
    roots.push_back(q2 * zj);
    norm *= (zm - q2 * zj);
  }
  laurent num = lp_shift(lp_from_roots(roots), 1);  // extra factor t
  num = lp_scale(num, cplx{1.0, 0.0} / norm);
  return {std::move(num), {zm}};
}

// multi-variable evaluator; `poles` lists the candidate pole locations of
// each variable (used to place residue circles)
struct multi_fn {
  int arity = 0;
  std::vector<cplx> poles;
  std::function<cplx(const std::vector<cplx>&)> eval;

  cplx operator()(const std::vector<cplx>& ts) const { return eval(ts); }
};

inline cplx g_eval(const subset& M, const model_params& par,
                   const std::vector<cplx>& ts) {
  const cplx q = par.q;
  cplx val{1.0, 0.0};
  const int ell = static_cast<int>(M.size());
  for (int a = 0; a < ell; ++a) {
    cplx ta = ts[static_cast<std::size_t>(a)];
    int m = M[static_cast<std::size_t>(a)];
    cplx cur = ta / (ta - par.z[static_cast<std::size_t>(m - 1)]);
    for (int j = 1; j < m; ++j) {
      cplx zj = par.z[static_cast<std::size_t>(j - 1)];
      cur *= (ta / q - q * zj) / (ta - zj);
    }
    val *= cur;
  }
  for (int a = 0; a < ell; ++a)
    for (int b = a + 1; b < ell; ++b)
      val *= (ts[static_cast<std::size_t>(a)] / (q * q) -
              ts[static_cast<std::size_t>(b)]);
  return val;
}

inline multi_fn g_fn(const subset& M, const model_params& par) {
  multi_fn f;
  f.arity = static_cast<int>(M.size());
  f.poles = par.z;
  f.eval = [M, par](const std::vector<cplx>& ts) { return g_eval(M, par, ts); };
  return f;
}

// ---- signed symmetrization -------------------------------------------------

struct signed_perm {
  std::vector<int> idx;
  int sign = 1;
};

inline std::vector<signed_perm> permutations_signed(int ell) {
  if (ell < 0 || ell > 6)
    throw std::invalid_argument("permutations_signed: arity must be in [0, 6]");
  std::vector<int> p(static_cast<std::size_t>(ell));
  std::iota(p.begin(), p.end(), 0);
  std::vector<signed_perm> out;
  do {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j)
        if (p[i] > p[j]) ++inv;
    out.push_back({p, (inv % 2) ? -1 : 1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// signed symmetrization over the variables: sum_sigma sgn(sigma) f(t_sigma)
inline multi_fn asym(const multi_fn& f) {
  auto perms = permutations_signed(f.arity);
  multi_fn out;
  out.arity = f.arity;
  out.poles = f.poles;
  out.eval = [inner = f.eval, perms,
              ell = f.arity](const std::vector<cplx>& ts) {
    cplx tot{0.0, 0.0};
    std::vector<cplx> arg(static_cast<std::size_t>(ell));
    for (const auto& sp : perms) {
      for (int a = 0; a < ell; ++a)
        arg[static_cast<std::size_t>(a)] =
            ts[static_cast<std::size_t>(sp.idx[static_cast<std::size_t>(a)])];
      tot += static_cast<double>(sp.sign) * inner(arg);
    }
    return tot;
  };
  return out;
}

enum class w_kind { plain, tilde };

inline multi_fn w_fn(const subset& M, const model_params& par) {
  return asym(g_fn(M, par));
}

// determinant det[ mu^{(m_a)}(t_b) ] expanded over signed permutations
inline multi_fn wtilde_fn(const subset& M, const model_params& par) {
  const int ell = static_cast<int>(M.size());
  std::vector<rational_fn> mus;
  for (int m : M) mus.push_back(mu_fn(M, m, par));
  auto perms = permutations_signed(ell);
  multi_fn out;
  out.arity = ell;
  out.poles = par.z;
  out.eval = [mus, perms, ell](const std::vector<cplx>& ts) {
    cplx tot{0.0, 0.0};
    for (const auto& sp : perms) {
      cplx v{1.0, 0.0};
      for (int a = 0; a < ell; ++a)
        v *= mus[static_cast<std::size_t>(a)](
            ts[static_cast<std::size_t>(sp.idx[static_cast<std::size_t>(a)])]);
      tot += static_cast<double>(sp.sign) * v;
    }
    return tot;
  };
  return out;
}

inline multi_fn make_w(w_kind kind, const subset& M, const model_params& par) {
  return kind == w_kind::plain ? w_fn(M, par) : wtilde_fn(M, par);
}

// value of the symmetrized source at one point tuple
inline cplx w_eval(w_kind kind, const subset& M, const model_params& par,
                   const std::vector<cplx>& ts) {
  return make_w(kind, M, par).eval(ts);
}

// proportionality constant between the two symmetrizations on the extremal
// subset (smallest in the componentwise order)
inline cplx extremal_constant(const subset& M, const model_params& par) {
  const cplx q = par.q;
  cplx c{1.0, 0.0};
  for (std::size_t a = 0; a < M.size(); ++a)
    for (std::size_t b = a + 1; b < M.size(); ++b) {
      cplx za = par.z[static_cast<std::size_t>(M[a] - 1)];
      cplx zb = par.z[static_cast<std::size_t>(M[b] - 1)];
      c *= (za / (q * q) - zb) * (za - zb / (q * q)) / ((za - zb) / q);
    }
  return c;
}

// ---- residues by quadrature ------------------------------------------------

// residue of f at u over a radius-delta circle; nodes sit between the
// lattice angles so a sample never lands on a real-axis singularity
inline cplx residue1(const std::function<cplx(cplx)>& f, cplx u, double delta,
                     int N = 64) {
  cplx tot{0.0, 0.0};
  for (int k = 0; k < N; ++k) {
    double th = 2.0 * pi * (k + 0.5) / N;
    cplx t = u + delta * std::polar(1.0, th);
    tot += f(t) * (t - u);
  }
  return tot / static_cast<double>(N);
}

namespace detail {
inline cplx iterated_residue_once(const multi_fn& f,
                                  const std::vector<cplx>& us,
                                  const std::vector<cplx>& sing, double dscale,
                                  int N) {
  const int ell = static_cast<int>(us.size());
  std::vector<cplx> prefix(static_cast<std::size_t>(ell));
  auto rec = [&](auto&& self, int k) -> cplx {
    cplx u = us[static_cast<std::size_t>(k)];
    double dmin = 1.0;
    bool found = false;
    for (cplx s : sing) {
      double d = std::abs(u - s);
      if (d > 1e-9 * std::abs(u)) {
        dmin = found ? std::min(dmin, d) : d;
        found = true;
      }
    }
    double delta = 0.1 * dscale * dmin;
    cplx tot{0.0, 0.0};
    for (int i = 0; i < N; ++i) {
      double th = 2.0 * pi * (i + 0.5) / N;
      cplx t = u + delta * std::polar(1.0, th);
      prefix[static_cast<std::size_t>(k)] = t;
      cplx v = (k == ell - 1) ? f.eval(prefix) : self(self, k + 1);
      tot += v / t * (t - u);
    }
    return tot / static_cast<double>(N);
  };
  return rec(rec, 0);
}
}  // namespace detail

// nested residues, innermost variable last, each level weighted by 1/t.
// Runs twice with the circle radii halved and insists the two values agree:
// a drift flags a pole that is not simple at the requested point.
inline cplx iterated_residue(const multi_fn& f, const std::vector<cplx>& us,
                             const std::vector<cplx>& sing, int N = 64) {
  if (static_cast<int>(us.size()) != f.arity)
    throw std::invalid_argument("iterated_residue: point arity mismatch");
  cplx a = detail::iterated_residue_once(f, us, sing, 1.0, N);
  cplx b = detail::iterated_residue_once(f, us, sing, 0.5, N);
  double tol = std::max(1e-9 * std::max(std::abs(a), std::abs(b)), 1e-12);
  if (std::abs(a - b) > tol)
    throw std::runtime_error(
        "non-simple pole detected (residue value unstable under delta "
        "halving)");
  return a;
}

// T[i][k] = iterated residue of the symmetrized source for subs[i] at the
// site tuple of subs[k]
inline cmat res_table(const model_params& par, const std::vector<subset>& subs,
                      w_kind kind = w_kind::plain, int N = 64) {
  const int s = static_cast<int>(subs.size());
  cmat T(s, s);
  for (int i = 0; i < s; ++i) {
    multi_fn w = make_w(kind, subs[static_cast<std::size_t>(i)], par);
    for (int k = 0; k < s; ++k) {
      std::vector<cplx> us;
      for (int m : subs[static_cast<std::size_t>(k)])
        us.push_back(par.z[static_cast<std::size_t>(m - 1)]);
      T(i, k) = iterated_residue(w, us, par.z, N);
    }
  }
  return T;
}

// ---- polynomial layer ------------------------------------------------------

// prod over M (sign > 0) or its complement (sign < 0) of (q^{-4} t - z_m);
// degrees ell and n - ell respectively
inline laurent p_polynomial(const subset& M, int sign,
                            const model_params& par) {
  const cplx q4 = ipow(par.q, -4);
  laurent out = lp_const({1.0, 0.0});
  auto in_M = [&](int k) { return std::find(M.begin(), M.end(), k) != M.end(); };
  for (int k = 1; k <= par.n; ++k) {
    if ((sign > 0) != in_M(k)) continue;
    out = lp_mul(out, laurent{{0, -par.z[static_cast<std::size_t>(k - 1)]},
                              {1, q4}});
  }
  return out;
}

// A(t) - A(q^2 t)
inline laurent t_q2(const laurent& A, const model_params& par) {
  return lp_sub(A, lp_scale_arg(A, par.q * par.q));
}

namespace detail {
// drop coefficients below rel * build-scale; clears polynomials that are
// pure cancellation residue of an O(scale) construction
inline laurent lp_clean_scaled(const laurent& f, double scale,
                               double rel = 1e-13) {
  laurent out;
  for (const auto& [k, c] : f)
    if (std::abs(c) > rel * scale) out[k] = c;
  return out;
}

inline double lp_coeff_scale(const laurent& f) {
  double mx = 0.0;
  for (const auto& [k, c] : f) mx = std::max(mx, std::abs(c));
  return mx;
}
}  // namespace detail

enum class q_form { automatic, general, simplified };

inline laurent q_polynomial_general(const subset& M, int a,
                                    const model_params& par) {
  const cplx q = par.q;
  laurent Pp = p_polynomial(M, +1, par);
  laurent Pm = p_polynomial(M, -1, par);
  laurent term1 = lp_mul(Pm, lp_plus(t_q2(lp_shift(Pp, -a), par)));
  term1 = lp_scale(term1, ipow(q, 4 * a));
  laurent Ppq2 = lp_scale_arg(Pp, q * q);
  laurent G = lp_plus(lp_shift(Ppq2, -a));
  laurent Qt = lp_quot(lp_mul(Pm, G), Ppq2);
  laurent inner = lp_sub(Qt, lp_scale_arg(Qt, q * q));
  laurent term2 = lp_mul(Ppq2, lp_plus(inner));
  term2 = lp_scale(term2, ipow(q, 2 * a));
  double scale = std::max(detail::lp_coeff_scale(term1),
                          detail::lp_coeff_scale(term2));
  return detail::lp_clean_scaled(lp_add(term1, term2), scale);
}

inline laurent q_polynomial_simplified(const subset& M, int a,
                                       const model_params& par) {
  const cplx q = par.q;
  laurent Pp = p_polynomial(M, +1, par);
  laurent Pm = p_polynomial(M, -1, par);
  laurent t1 = lp_mul(Pm, lp_plus(t_q2(lp_shift(Pp, -a), par)));
  t1 = lp_scale(t1, ipow(q, 4 * a));
  laurent t2 = lp_mul(lp_scale_arg(Pp, q * q),
                      lp_plus(t_q2(lp_shift(Pm, -a), par)));
  t2 = lp_scale(t2, ipow(q, 2 * a));
  double scale =
      std::max(detail::lp_coeff_scale(t1), detail::lp_coeff_scale(t2));
  return detail::lp_clean_scaled(lp_add(t1, t2), scale);
}

// The two-term form is valid exactly in the half-filled sector and is the
// cheap one; elsewhere the general construction applies.  `automatic`
// selects by sector.
inline laurent q_polynomial(const subset& M, int a, const model_params& par,
                            q_form form = q_form::automatic) {
  bool simple = form == q_form::simplified ||
                (form == q_form::automatic && 2 * par.ell == par.n);
  return simple ? q_polynomial_simplified(M, a, par)
                : q_polynomial_general(M, a, par);
}

// ---- the difference operator -----------------------------------------------

// D f (t) = f(t) - alpha f(p t) prod_j (t/q^2 - z_j)/(t - z_j), black-box form
inline std::function<cplx(cplx)> total_difference(
    const std::function<cplx(cplx)>& f, const model_params& par) {
  return [f, par](cplx t) {
    cplx fac{1.0, 0.0};
    for (cplx zj : par.z) fac *= (t / (par.q * par.q) - zj) / (t - zj);
    return f(t) - par.alpha * f(par.p * t) * fac;
  };
}

// structured form with exact pole bookkeeping.  The image has poles at the
// original poles, at every z_j, and at the p-shifted copies u/p of the
// original poles; a shifted copy landing on an existing pole would make a
// double pole, which this representation cannot hold.
inline rational_fn total_difference(const rational_fn& f,
                                    const model_params& par) {
  const cplx q = par.q, p = par.p;
  auto matches = [](cplx a, cplx b) {
    return std::abs(a - b) <=
           1e-9 * std::max({std::abs(a), std::abs(b), 1e-30});
  };
  std::vector<cplx> target = f.poles;
  auto add = [&](cplx u, bool must_be_new) {
    for (cplx v : target)
      if (matches(u, v)) {
        if (must_be_new)
          throw std::invalid_argument(
              "total_difference: shifted pole collides with an existing one");
        return;
      }
    target.push_back(u);
  };
  for (cplx zj : par.z) add(zj, false);
  for (cplx u : f.poles) add(u / p, true);

  auto missing_product = [&](const std::vector<cplx>& own) {
    laurent out = lp_const({1.0, 0.0});
    for (cplx v : target) {
      bool mine = false;
      for (cplx u : own)
        if (matches(u, v)) { mine = true; break; }
      if (!mine) out = lp_mul(out, laurent{{0, -v}, {1, cplx{1.0, 0.0}}});
    }
    return out;
  };

  laurent term1 = lp_mul(f.numerator, missing_product(f.poles));

  std::vector<cplx> own2;
  for (cplx u : f.poles) own2.push_back(u / p);
  for (cplx zj : par.z) own2.push_back(zj);
  std::vector<cplx> q2z;
  for (cplx zj : par.z) q2z.push_back(q * q * zj);
  laurent term2 = lp_mul(lp_scale_arg(f.numerator, p), lp_from_roots(q2z));
  term2 = lp_mul(term2, missing_product(own2));
  cplx pref = par.alpha * ipow(q, -2 * par.n) /
              ipow(p, static_cast<int>(f.poles.size()));
  term2 = lp_scale(term2, pref);

  double scale = std::max(detail::lp_coeff_scale(term1),
                          detail::lp_coeff_scale(term2));
  return {detail::lp_clean_scaled(lp_sub(term1, term2), scale), target};
}

// ---- the distinguished singular member --------------------------------------

// xi_M = D applied to the complement product; pairs to the discrepancy of
// the partner factor and to nothing else
inline rational_fn xi_fn(const subset& M, const model_params& par) {
  return total_difference(rational_fn{p_polynomial(M, -1, par), {}}, par);
}

// closed form for the residue of xi_M at z_m, m in M
inline cplx xi_residue(const subset& M, int m, const model_params& par) {
  const cplx q = par.q;
  cplx zm = par.z[static_cast<std::size_t>(m - 1)];
  cplx num{1.0, 0.0};
  for (int j = 1; j <= par.n; ++j) {
    if (j == m) continue;
    num *= (zm / (q * q) - par.z[static_cast<std::size_t>(j - 1)]);
  }
  cplx den{1.0, 0.0};
  for (int j : M) {
    if (j == m) continue;
    den *= (zm - par.z[static_cast<std::size_t>(j - 1)]);
  }
  return -par.alpha * (cplx{1.0, 0.0} / (q * q) - cplx{1.0, 0.0}) * zm * num /
         den;
}

}  // namespace qkzlab
