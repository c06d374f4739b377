#pragma once

// Solution assembly: the weighted pairing of the rational layer against a
// tuple of multiplier functions, in four algebraically equivalent forms,
// plus the machinery that verifies the difference equation they satisfy.

#include <string>
#include <utility>
#include <vector>

#include "qkzlab/algebra.hpp"
#include "qkzlab/elliptic.hpp"
#include "qkzlab/hyperint.hpp"
#include "qkzlab/params.hpp"
#include "qkzlab/ratfun.hpp"
#include "qkzlab/tensor.hpp"

namespace qkzlab {

// shared per-instance scaffolding: subset list, residue table, node set
struct solution_workspace {
  model_params par;
  std::vector<subset> subs;
  cmat T;  // residue table of the plain symmetrization
  pairing_context ctx;

  static solution_workspace make(const model_params& par,
                                 const contour_spec& spec) {
    solution_workspace ws;
    ws.par = par;
    ws.subs = subsets_colex(par.n, par.ell);
    ws.T = res_table(par, ws.subs);
    ws.ctx = pairing_context::make(par, spec);
    return ws;
  }

  static solution_workspace make(const model_params& par, int nodes = 512) {
    return make(par, make_contour(par, nodes));
  }
};

enum class psi_method { direct, det, detq, det0 };

struct psi_result {
  cvec vec;
  double scale = 0.0;        // magnitude floor accumulated over all terms
  double max_corr = 0.0;     // worst correction residue / entry scale
  double max_conv = 0.0;     // worst half-rule disagreement / entry scale
};

namespace detail {
// permanent of the entrywise-magnitude matrix, the natural scale of a det
inline double abs_permanent(const std::vector<std::vector<double>>& S) {
  int ell = static_cast<int>(S.size());
  if (ell == 0) return 1.0;
  double tot = 0.0;
  for (const auto& sp : permutations_signed(ell)) {
    double v = 1.0;
    for (int a = 0; a < ell; ++a)
      v *= S[static_cast<std::size_t>(a)]
            [static_cast<std::size_t>(sp.idx[static_cast<std::size_t>(a)])];
    tot += v;
  }
  return tot;
}

inline void track(psi_result& out, const quad_result& r) {
  double floor = std::max(r.scale, 1e-300);
  out.max_corr = std::max(out.max_corr, r.max_correction / floor);
  out.max_conv = std::max(out.max_conv, r.conv_rel);
}
}  // namespace detail

// direct grid pairing of the symmetrized source against the factor tuple
inline psi_result psi_direct(const solution_workspace& ws,
                             const std::vector<family_member>& members) {
  const model_params& par = ws.par;
  psi_result out;
  out.vec.assign(static_cast<std::size_t>(1) << par.n, cplx{0.0, 0.0});
  std::vector<std::function<cplx(const model_params&, cplx)>> Fs;
  for (const auto& m : members) Fs.push_back(m.eval);
  for (const subset& M : ws.subs) {
    quad_result r = pair_integral_multi(w_fn(M, par), Fs, ws.ctx);
    detail::track(out, r);
    out.vec[static_cast<std::size_t>(basis_index(M, par.n))] += r.value;
    out.scale += r.scale;
  }
  return out;
}

// determinant form over the single-pole sources, assembled in the
// triangular basis
inline psi_result psi_det(const solution_workspace& ws,
                          const std::vector<family_member>& members) {
  const model_params& par = ws.par;
  const int ell = static_cast<int>(members.size());
  psi_result out;
  out.vec.assign(static_cast<std::size_t>(1) << par.n, cplx{0.0, 0.0});
  std::vector<std::vector<cplx>> cs;
  for (const auto& m : members) cs.push_back(ws.ctx.coeffs(m.eval));
  const std::size_t K = ws.ctx.ns.t.size();
  for (const subset& M : ws.subs) {
    cmat A(ell, ell);
    std::vector<std::vector<double>> S(
        static_cast<std::size_t>(ell),
        std::vector<double>(static_cast<std::size_t>(ell), 0.0));
    for (int a = 0; a < ell; ++a) {
      rational_fn mua = mu_fn(M, M[static_cast<std::size_t>(a)], par);
      std::vector<cplx> muv(K);
      for (std::size_t k = 0; k < K; ++k) muv[k] = mua(ws.ctx.ns.t[k]);
      for (int b = 0; b < ell; ++b) {
        quad_result r = pair_sum(cs[static_cast<std::size_t>(b)], muv, ws.ctx.ns);
        detail::track(out, r);
        A(a, b) = r.value;
        S[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = r.scale;
      }
    }
    cvec tv = tilde_vector(M, par, ws.subs, ws.T);
    cplx dt = det_pivot(A).value;
    double tsc = detail::abs_permanent(S) * inf_norm(tv);
    for (std::size_t i = 0; i < tv.size(); ++i) out.vec[i] += dt * tv[i];
    out.scale += tsc;
  }
  return out;
}

// determinant form over the compensating polynomials; valid for periodic
// factor tuples
inline psi_result psi_detq(const solution_workspace& ws,
                           const std::vector<family_member>& members) {
  const model_params& par = ws.par;
  const cplx q = par.q;
  const int ell = static_cast<int>(members.size());
  psi_result out;
  out.vec.assign(static_cast<std::size_t>(1) << par.n, cplx{0.0, 0.0});
  std::vector<std::vector<cplx>> cs;
  for (const auto& m : members) cs.push_back(ws.ctx.coeffs(m.eval));
  const std::size_t K = ws.ctx.ns.t.size();
  for (const subset& M : ws.subs) {
    cmat A(ell, ell);
    std::vector<std::vector<double>> S(
        static_cast<std::size_t>(ell),
        std::vector<double>(static_cast<std::size_t>(ell), 0.0));
    for (int a = 1; a <= ell; ++a) {
      laurent Qa = q_polynomial(M, a, par);
      std::vector<cplx> Qv(K);
      for (std::size_t k = 0; k < K; ++k) Qv[k] = lp_eval(Qa, ws.ctx.ns.t[k]);
      for (int b = 0; b < ell; ++b) {
        quad_result r = pair_sum(cs[static_cast<std::size_t>(b)], Qv, ws.ctx.ns);
        detail::track(out, r);
        A(a - 1, b) = r.value;
        S[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)] = r.scale;
      }
    }
    cplx pref{1.0, 0.0};
    for (int m : M)
      for (int k = 1; k <= par.n; ++k) {
        if (std::find(M.begin(), M.end(), k) != M.end()) continue;
        pref /= (par.z[static_cast<std::size_t>(m - 1)] / (q * q) -
                 par.z[static_cast<std::size_t>(k - 1)]);
      }
    cvec bv = bar_vector(M, par, ws.subs, ws.T);
    cplx dt = det_pivot(A).value;
    double tsc = std::abs(pref) * detail::abs_permanent(S) * inf_norm(bv);
    for (std::size_t i = 0; i < bv.size(); ++i) out.vec[i] += pref * dt * bv[i];
    out.scale += tsc;
  }
  cplx global = ipow(cplx{1.0, 0.0} / (q * q) - cplx{1.0, 0.0}, -ell);
  for (cplx& c : out.vec) c *= global;
  out.scale *= std::abs(global);
  return out;
}

// rank-reduced determinant form for the half-filled sector: the final
// factor enters only through its discrepancy grad_last
inline psi_result psi_det0(const solution_workspace& ws,
                           const std::vector<family_member>& members,
                           cplx grad_last) {
  const model_params& par = ws.par;
  const cplx q = par.q;
  const int ell = par.ell;
  psi_result out;
  out.vec.assign(static_cast<std::size_t>(1) << par.n, cplx{0.0, 0.0});
  std::vector<std::vector<cplx>> cs;
  for (int b = 0; b + 1 < static_cast<int>(members.size()); ++b)
    cs.push_back(ws.ctx.coeffs(members[static_cast<std::size_t>(b)].eval));
  const std::size_t K = ws.ctx.ns.t.size();
  for (const subset& M : ws.subs) {
    cplx dt{1.0, 0.0};
    double psc = 1.0;
    if (ell > 1) {
      cmat A(ell - 1, ell - 1);
      std::vector<std::vector<double>> S(
          static_cast<std::size_t>(ell - 1),
          std::vector<double>(static_cast<std::size_t>(ell - 1), 0.0));
      for (int a = 1; a < ell; ++a) {
        laurent Qa = q_polynomial(M, a, par);
        std::vector<cplx> Qv(K);
        for (std::size_t k = 0; k < K; ++k) Qv[k] = lp_eval(Qa, ws.ctx.ns.t[k]);
        for (int b = 0; b < ell - 1; ++b) {
          quad_result r =
              pair_sum(cs[static_cast<std::size_t>(b)], Qv, ws.ctx.ns);
          detail::track(out, r);
          A(a - 1, b) = r.value;
          S[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)] =
              r.scale;
        }
      }
      dt = det_pivot(A).value;
      psc = detail::abs_permanent(S);
    }
    cplx pref{1.0, 0.0};
    for (int m : M)
      for (int k = 1; k <= par.n; ++k) {
        if (std::find(M.begin(), M.end(), k) != M.end()) continue;
        pref /= (par.z[static_cast<std::size_t>(m - 1)] / (q * q) -
                 par.z[static_cast<std::size_t>(k - 1)]);
      }
    cvec bv = bar_vector(M, par, ws.subs, ws.T);
    double tsc = std::abs(pref) * psc * inf_norm(bv);
    for (std::size_t i = 0; i < bv.size(); ++i) out.vec[i] += pref * dt * bv[i];
    out.scale += tsc;
  }
  cplx global = ipow(q * q - ipow(q, 4), -ell) * grad_last;
  for (cplx& c : out.vec) c *= global;
  out.scale *= std::abs(global);
  return out;
}

// intermediate reduction: single-pole sources over the leading factors and
// an explicit prefactor carrying the last site
inline psi_result psi_det_mu_reduced(const solution_workspace& ws,
                                     const std::vector<family_member>& members,
                                     cplx grad_last) {
  const model_params& par = ws.par;
  const cplx q = par.q;
  const int ell = par.ell;
  psi_result out;
  out.vec.assign(static_cast<std::size_t>(1) << par.n, cplx{0.0, 0.0});
  std::vector<std::vector<cplx>> cs;
  for (int b = 0; b + 1 < static_cast<int>(members.size()); ++b)
    cs.push_back(ws.ctx.coeffs(members[static_cast<std::size_t>(b)].eval));
  const std::size_t K = ws.ctx.ns.t.size();
  for (const subset& M : ws.subs) {
    cplx dt{1.0, 0.0};
    if (ell > 1) {
      cmat A(ell - 1, ell - 1);
      for (int a = 0; a < ell - 1; ++a) {
        rational_fn mua = mu_fn(M, M[static_cast<std::size_t>(a)], par);
        std::vector<cplx> muv(K);
        for (std::size_t k = 0; k < K; ++k) muv[k] = mua(ws.ctx.ns.t[k]);
        for (int b = 0; b < ell - 1; ++b) {
          quad_result r =
              pair_sum(cs[static_cast<std::size_t>(b)], muv, ws.ctx.ns);
          A(a, b) = r.value;
        }
      }
      dt = det_pivot(A).value;
    }
    cplx zl = par.z[static_cast<std::size_t>(M[static_cast<std::size_t>(ell - 1)] - 1)];
    cplx num{1.0, 0.0};
    for (int a = 0; a < ell - 1; ++a)
      num *= (zl - par.z[static_cast<std::size_t>(M[static_cast<std::size_t>(a)] - 1)]);
    cplx den{1.0, 0.0};
    for (int k = 1; k <= par.n; ++k)
      den *= (zl - q * q * par.z[static_cast<std::size_t>(k - 1)]);
    cvec tv = tilde_vector(M, par, ws.subs, ws.T);
    cplx coef = zl * num / den * dt;
    for (std::size_t i = 0; i < tv.size(); ++i) out.vec[i] += coef * tv[i];
  }
  for (cplx& c : out.vec) c *= grad_last;
  return out;
}

// ---- requests -----------------------------------------------------------------

struct solution_request {
  model_params par;
  w_family family;
  psi_method method = psi_method::det;
  int nodes = 512;
};

struct request_check {
  bool ok = true;
  std::vector<std::string> reasons;
};

// measured admission: the restricted forms demand periodic factors, and
// periodicity is probed, never assumed
inline request_check validate_request(const solution_request& req) {
  request_check rc;
  auto rej = [&](std::string why) {
    rc.ok = false;
    rc.reasons.push_back(std::move(why));
  };
  validation_report vr = validate(req.par);
  for (const auto& e : vr.errors) rej(e);
  if (!rc.ok) return rc;
  if (static_cast<int>(req.family.members.size()) != req.par.ell)
    rej("family must supply exactly ell factors");
  bool alpha_one = std::abs(req.par.alpha - cplx{1.0, 0.0}) < 1e-12;
  if (req.method == psi_method::detq || req.method == psi_method::det0) {
    if (!alpha_one)
      rej("the polynomial determinant forms are stated at alpha = 1");
    int upto = static_cast<int>(req.family.members.size()) -
               (req.method == psi_method::det0 ? 1 : 0);
    for (int i = 0; i < upto; ++i) {
      discrepancy_result d =
          discrepancy(req.par, req.family.members[static_cast<std::size_t>(i)].eval);
      if (std::abs(d.value) > 1e-6)
        rej("factor " + req.family.members[static_cast<std::size_t>(i)].label +
            " is not periodic (measured discrepancy " +
            std::to_string(std::abs(d.value)) + ")");
    }
  }
  if (req.method == psi_method::det0) {
    if (2 * req.par.ell != req.par.n)
      rej("the rank-reduced form applies only in the half-filled sector");
    if (!req.family.members.empty()) {
      discrepancy_result d =
          discrepancy(req.par, req.family.members.back().eval);
      if (d.spread > 1e-6)
        rej("final factor has no well-defined discrepancy (spread " +
            std::to_string(d.spread) + ")");
    }
  }
  return rc;
}

inline psi_result solve(const solution_request& req) {
  request_check rc = validate_request(req);
  if (!rc.ok) {
    std::string msg = "solution request rejected:";
    for (const auto& r : rc.reasons) msg += " " + r + ";";
    throw std::invalid_argument(msg);
  }
  solution_workspace ws = solution_workspace::make(req.par, req.nodes);
  switch (req.method) {
    case psi_method::direct: return psi_direct(ws, req.family.members);
    case psi_method::det: return psi_det(ws, req.family.members);
    case psi_method::detq: return psi_detq(ws, req.family.members);
    default: {
      discrepancy_result d = discrepancy(req.par, req.family.members.back().eval);
      return psi_det0(ws, req.family.members, d.value);
    }
  }
}

// scale-floored componentwise distance for vector comparisons
inline double scaled_rel_diff(const cvec& a, const cvec& b,
                              std::initializer_list<double> floors = {}) {
  double floor = std::max(inf_norm(a), inf_norm(b));
  for (double f : floors) floor = std::max(floor, f);
  return inf_dist(a, b) / std::max(floor, 1e-300);
}

// ---- the difference equation ----------------------------------------------------

struct qkz_step_result {
  int site = 0;
  bool conclusive = false;
  cplx rho{1.0, 0.0};
  double residual = 0.0;
  double psi_norm = 0.0;
  contour_mode mode = contour_mode::standard;
  std::string note;
};

// verify the shift equation at one site: the solution at z_j -> p z_j must
// equal (measured covariance factor) q^ell (transport operator) times the
// unshifted solution.  Covariance of each factor is measured pointwise; a
// non-constant ratio makes the site inconclusive for this family.
inline qkz_step_result verify_qkz_step(const model_params& par,
                                       const w_family& fam, int j,
                                       int nodes = 256) {
  qkz_step_result res;
  res.site = j;
  cplx rho{1.0, 0.0};
  for (const auto& member : fam.members) {
    shift_ratio_result sr = member_shift_ratio(par, j, member);
    if (!sr.constant) {
      res.note = "factor " + member.label +
                 " is not covariant under the site-" + std::to_string(j) +
                 " shift (ratio spread " + std::to_string(sr.spread) + ")";
      return res;
    }
    rho *= sr.value;
  }
  res.rho = rho;

  solution_workspace ws0 =
      solution_workspace::make(par, standard_contour(par, nodes));
  psi_result p0 = psi_det(ws0, fam.members);

  model_params shifted = par.shifted(j);
  contour_spec spec_s;
  try {
    spec_s = standard_contour(shifted, nodes);
    res.mode = contour_mode::standard;
  } catch (const std::runtime_error&) {
    spec_s = safe_contour(shifted, nodes);
    res.mode = contour_mode::safe;
  }
  solution_workspace wss = solution_workspace::make(shifted, spec_s);
  psi_result ps = psi_det(wss, fam.members);

  cvec pred = mat_vec(k_operator(j, par), p0.vec);
  cplx fac = rho * ipow(par.q, par.ell);
  for (cplx& c : pred) c *= fac;

  double scale = std::max({inf_norm(ps.vec), inf_norm(pred),
                           1e-3 * ps.scale, 1e-3 * p0.scale});
  res.residual = inf_dist(ps.vec, pred) / std::max(scale, 1e-300);
  res.psi_norm = inf_norm(ps.vec);
  res.conclusive = true;
  if (res.note.empty() && res.psi_norm < 1e-8 * ps.scale)
    res.note = "solution vanishes here; residual is measured against the "
               "quadrature scale";
  return res;
}

// ---- singular-vector verification -----------------------------------------------

struct singular_result {
  std::string family;
  bool conclusive = false;
  double psi_norm = 0.0;
  double raising_rel = 0.0;  // |e Psi| / |Psi|
  std::string note;
};

inline singular_result verify_singular(const solution_workspace& ws,
                                       const w_family& fam) {
  singular_result out;
  out.family = fam.label;
  psi_result pr = psi_det(ws, fam.members);
  out.psi_norm = inf_norm(pr.vec);
  if (out.psi_norm < 1e-8 * std::max(pr.scale, 1e-300)) {
    out.note = "solution vanishes for this family; singularity holds only "
               "in the trivial sense";
    return out;
  }
  cvec ev = quantum_group_action(uq_gen::e, pr.vec, ws.par);
  out.raising_rel = inf_norm(ev) / out.psi_norm;
  out.conclusive = true;
  return out;
}

}  // namespace qkzlab
