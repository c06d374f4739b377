#pragma once

// Multiplicative theta layer and the periodic / quasi-periodic function
// spaces the solution families live in.  theta and its log-derivative E are
// evaluated after normalizing the argument into the fundamental annulus via
//   theta(p u) = -u^{-1} theta(u),   E(u/p) = E(u) + 1,
// which keeps the truncated products accurate for arguments as deep as
// |u| ~ 1e-17 (needed by the residue-series oracle).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkzlab/params.hpp"

namespace qkzlab {

// smallest K with |p|^K |u| / (1 - |p|) < 1e-17
inline int qpoch_terms(double p_abs, double u_abs) {
  double rhs = 1e-17 * (1.0 - p_abs) / std::max(u_abs, 1e-300);
  if (rhs >= 1.0) return 1;
  int k = static_cast<int>(std::ceil(std::log(rhs) / std::log(p_abs)));
  return std::max(1, std::min(k, 4000));
}

// (u; p)_inf = prod_{k>=0} (1 - u p^k)
inline cplx qpochhammer_inf(cplx u, cplx p) {
  int K = qpoch_terms(std::abs(p), std::abs(u));
  cplx prod = 1, pk = 1;
  for (int k = 0; k < K; ++k) {
    prod *= cplx(1) - u * pk;
    pk *= p;
  }
  return prod;
}

// theta(u) = (u)_inf (p/u)_inf (p)_inf
inline cplx theta(cplx u, cplx p) {
  long k = std::lround(std::log(std::abs(u)) / std::log(std::abs(p)));
  cplx w = u * ipow(p, static_cast<int>(-k));
  cplx mult = 1, v = w;
  if (k > 0) {
    for (long i = 0; i < k; ++i) {
      mult *= -1.0 / v;
      v *= p;
    }
  } else {
    for (long i = 0; i < -k; ++i) {
      mult *= -v / p;
      v /= p;
    }
  }
  return mult * qpochhammer_inf(w, p) * qpochhammer_inf(p / w, p) *
         qpochhammer_inf(p, p);
}

// E(u) = u theta'(u) / theta(u); satisfies E(u/p) = E(u) + 1, E(p/u) = 1 - E(u)
inline cplx log_derivative_E(cplx u, cplx p) {
  long k = std::lround(std::log(std::abs(u)) / std::log(std::abs(p)));
  cplx w = u * ipow(p, static_cast<int>(-k));
  double wa = std::abs(w);
  int K = qpoch_terms(std::abs(p), std::max(wa, 1.0 / wa)) + 2;
  cplx s = 0, pj = 1;
  for (int j = 0; j < K; ++j) {
    s -= w * pj / (cplx(1) - w * pj);
    cplx r = p * pj / w;
    s += r / (cplx(1) - r);
    pj *= p;
  }
  return s - static_cast<double>(k);
}

// Theta(t) = t^{-n/2} prod_j theta(q^{-2} t / z_j) / theta(t / z_j).
// p-periodic in t; rescaling z_j -> p z_j multiplies it by q^{-2}.  Needs n even.
inline cplx big_theta(const model_params& par, cplx t) {
  if (par.n % 2 != 0)
    throw std::invalid_argument("big_theta needs an even number of sites");
  cplx qi2 = cplx(1) / (par.q * par.q);
  cplx val = ipow(t, -par.n / 2);
  for (int j = 0; j < par.n; ++j)
    val *= theta(qi2 * t / par.z[j], par.p) / theta(t / par.z[j], par.p);
  return val;
}

// phi(t) = prod_j (t/z_j)_inf / (q^{-2} t/z_j)_inf, the scalar weight of the
// pairing integrand
inline cplx phase(const model_params& par, cplx t) {
  cplx qi2 = cplx(1) / (par.q * par.q);
  cplx val = 1;
  for (int j = 0; j < par.n; ++j)
    val *= qpochhammer_inf(t / par.z[j], par.p) /
           qpochhammer_inf(qi2 * t / par.z[j], par.p);
  return val;
}

// fixed twist used to build the alpha = 1 basis; any primitive phase off the
// lattice works, this one stays clear of q and p powers
inline cplx twist_c() { return std::polar(1.0, pi / 7.0); }

// probe points in an annulus around the site scale, kept clear of every
// zero / pole orbit the basis functions can produce
inline std::vector<cplx> safe_probe_points(const model_params& par, int count,
                                           std::uint64_t seed) {
  std::vector<cplx> orbit;
  cplx q2 = par.q * par.q;
  cplx c = twist_c();
  for (int j = 0; j < par.n; ++j)
    for (int m = -3; m <= 4; ++m) {
      cplx base = par.z[j] * ipow(par.p, m);
      for (cplx f : {cplx(1), q2, cplx(1) / q2, par.alpha, c, cplx(1) / c})
        orbit.push_back(base * f);
    }
  double scale = 0;
  for (cplx zj : par.z) scale += std::abs(zj);
  scale /= par.n;
  det_rng rng(seed);
  std::vector<cplx> pts;
  int guard = 0;
  while (static_cast<int>(pts.size()) < count && ++guard < 100000) {
    double r = std::exp(rng.range(std::log(0.55), std::log(1.9))) * scale;
    double a = rng.range(0.0, 2.0 * pi);
    cplx t = std::polar(r, a);
    bool ok = true;
    for (cplx u : orbit)
      if (std::abs(t - u) < 0.22 * std::abs(u)) {
        ok = false;
        break;
      }
    if (ok) pts.push_back(t);
  }
  return pts;
}

// a named scalar function of (params, t); families of these are paired
// against the rational layer
struct family_member {
  std::string label;
  std::function<cplx(const model_params&, cplx)> eval;
};

inline family_member basis_one() {
  return {"1", [](const model_params&, cplx) { return cplx(1); }};
}

// B_j(t) = theta(t/(alpha z_j)) / theta(t/z_j): multiplier alpha under
// t -> p t, multiplier 1/alpha under z_j -> p z_j.  Degenerates at alpha = 1.
inline family_member basis_b(int j) {
  return {"B" + std::to_string(j), [j](const model_params& par, cplx t) {
            return theta(t / (par.alpha * par.z[j - 1]), par.p) /
                   theta(t / par.z[j - 1], par.p);
          }};
}

// C_j(t) = theta(c t/z_j) theta(t/(c z_{j+1})) / (theta(t/z_j) theta(t/z_{j+1}));
// p-periodic in t, so it spans the alpha = 1 periodic space together with 1
inline family_member basis_c(int j) {
  return {"C" + std::to_string(j), [j](const model_params& par, cplx t) {
            cplx c = twist_c();
            return theta(c * t / par.z[j - 1], par.p) *
                   theta(t / (c * par.z[j]), par.p) /
                   (theta(t / par.z[j - 1], par.p) *
                    theta(t / par.z[j], par.p));
          }};
}

// Ehat(t) = E(t/(q^2 z_anchor)) Theta(t): Ehat(pt) = Ehat(t) - Theta(t), so
// it completes the periodic space at alpha = 1 with unit discrepancy.  Any
// anchor site gives the same completion (the difference of two anchors is
// p-periodic); the anchor only decides which z-shift is non-covariant.
inline family_member basis_ehat(int anchor = 1) {
  std::string label = anchor == 1 ? "Ehat" : "Ehat@" + std::to_string(anchor);
  return {label, [anchor](const model_params& par, cplx t) {
            return log_derivative_E(t / (par.q * par.q * par.z[anchor - 1]), par.p) *
                   big_theta(par, t);
          }};
}

enum class space_kind { f_ell, f_hat };

// basis of the target function space.  f_ell: multiplier-alpha functions
// (dimension n).  f_hat: the alpha = 1 periodic space completed by Ehat
// (dimension n + 1); only defined at alpha = 1.
inline std::vector<family_member> space_basis(const model_params& par,
                                              space_kind kind) {
  bool alpha_one = std::abs(par.alpha - cplx(1)) < 1e-12;
  if (kind == space_kind::f_hat && !alpha_one)
    throw std::invalid_argument("f_hat basis is built at alpha = 1");
  std::vector<family_member> base;
  if (alpha_one) {
    base.push_back(basis_one());
    for (int j = 1; j < par.n; ++j) base.push_back(basis_c(j));
  } else {
    for (int j = 1; j <= par.n; ++j) base.push_back(basis_b(j));
  }
  if (kind == space_kind::f_hat) base.push_back(basis_ehat());
  return base;
}

struct discrepancy_result {
  cplx value;      // nabla F: F(t) - F(p t) = (nabla F) Theta(t)
  double spread;   // max deviation across probes, relative
};

inline discrepancy_result discrepancy(
    const model_params& par,
    const std::function<cplx(const model_params&, cplx)>& F) {
  auto pts = safe_probe_points(par, 5, 424242);
  std::vector<cplx> vals;
  for (cplx t : pts)
    vals.push_back((F(par, t) - F(par, par.p * t)) / big_theta(par, t));
  cplx mean = 0;
  for (cplx v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double spread = 0;
  for (cplx v : vals) spread = std::max(spread, std::abs(v - mean));
  return {mean, spread / std::max(1.0, std::abs(mean))};
}

struct shift_ratio_result {
  cplx value;      // member(shifted params) / member(params), if constant
  double spread;
  bool constant;   // ratio agrees across probes to 1e-9
};

// how a family member rescales when z_site -> p z_site (site is 1-based);
// measured, never assumed.  Non-constant ratio means the member is not
// covariant for that site (e.g. Ehat at its anchor site).
inline shift_ratio_result member_shift_ratio(const model_params& par, int site,
                                             const family_member& m) {
  model_params shifted = par.shifted(site);
  auto pts = safe_probe_points(par, 10, 9001 + static_cast<std::uint64_t>(site));
  std::vector<cplx> ratios;
  for (cplx t : pts) {
    cplx base = m.eval(par, t);
    if (std::abs(base) < 1e-300) continue;
    ratios.push_back(m.eval(shifted, t) / base);
  }
  if (ratios.empty()) return {cplx(0), 1.0, false};
  cplx mean = 0;
  for (cplx r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double spread = 0;
  for (cplx r : ratios) spread = std::max(spread, std::abs(r - mean));
  double rel = spread / std::max(1.0, std::abs(mean));
  return {mean, rel, rel < 1e-9};
}

// an ell-tuple of members; the solution vector is multilinear in these
struct w_family {
  std::string label;
  std::vector<family_member> members;
};

inline w_family make_family(std::vector<family_member> members) {
  std::string label = "(";
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) label += ",";
    label += members[i].label;
  }
  label += ")";
  return {label, std::move(members)};
}

enum class family_kind { generic_alpha, alpha_one, alpha_one_hat };

// default test families.  generic_alpha: windows over B_1..B_n.
// alpha_one: spread picks over {1, C_j} with one deliberately adjacent pair
// last (it pairs degenerately and should be reported, not hidden).
// alpha_one_hat: Ehat completed by spread picks over the C_j.
inline std::vector<w_family> solution_families(const model_params& par,
                                               family_kind kind) {
  int n = par.n, ell = par.ell;
  std::vector<w_family> out;
  auto window = [&](const std::vector<family_member>& base, int start) {
    std::vector<family_member> mem(base.begin() + start,
                                   base.begin() + start + ell);
    return make_family(std::move(mem));
  };
  if (kind == family_kind::generic_alpha) {
    std::vector<family_member> base;
    for (int j = 1; j <= n; ++j) base.push_back(basis_b(j));
    for (int s = 0; s + ell <= n && s < 3; ++s) out.push_back(window(base, s));
    return out;
  }
  std::vector<family_member> odd, even;
  for (int j = 1; j < n; j += 2) odd.push_back(basis_c(j));
  for (int j = 2; j < n; j += 2) even.push_back(basis_c(j));
  if (kind == family_kind::alpha_one) {
    if (static_cast<int>(odd.size()) >= ell)
      out.push_back(window(odd, 0));
    {
      std::vector<family_member> mix;
      mix.push_back(basis_one());
      for (auto& m : even) mix.push_back(m);
      for (auto& m : odd) mix.push_back(m);
      if (static_cast<int>(mix.size()) >= ell) out.push_back(window(mix, 0));
    }
    if (ell >= 2 && n >= 3) {
      std::vector<family_member> adj;
      for (int j = 1; j < n && static_cast<int>(adj.size()) < ell; ++j)
        adj.push_back(basis_c(j));
      if (static_cast<int>(adj.size()) == ell)
        out.push_back(make_family(std::move(adj)));
    }
    return out;
  }
  // alpha_one_hat.  Ehat goes last: the rank-one reduction of the
  // determinant formula peels off the final factor, which must be the one
  // carrying the discrepancy.
  auto hat_with = [&](const std::vector<family_member>& rest) {
    std::vector<family_member> mem;
    for (int i = 0; i < ell - 1 && i < static_cast<int>(rest.size()); ++i)
      mem.push_back(rest[i]);
    mem.push_back(basis_ehat());
    return mem;
  };
  auto m1 = hat_with(even);
  if (static_cast<int>(m1.size()) == ell) out.push_back(make_family(m1));
  auto m2 = hat_with(odd);
  if (static_cast<int>(m2.size()) == ell &&
      (out.empty() || ell > 1))
    out.push_back(make_family(m2));
  if (out.empty()) out.push_back(make_family(hat_with({})));
  return out;
}

}  // namespace qkzlab
