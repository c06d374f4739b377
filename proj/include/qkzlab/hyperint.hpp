#pragma once

// Contour layer: a circle in the annulus between the shifted-site lattice
// and the q^2-scaled sites, plus small correction circles around lattice
// points that escaped outward.  All integrals reduce to one fixed linear
// functional over the node set, so pairings are dot products.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qkzlab/elliptic.hpp"
#include "qkzlab/params.hpp"
#include "qkzlab/ratfun.hpp"

namespace qkzlab {

enum class contour_mode { standard, safe };

struct contour_spec {
  double r = 0.0;
  int N = 512;
  contour_mode mode = contour_mode::standard;
  double rscale = 1.0;
  std::vector<cplx> corrections;  // lattice points outside the circle
  std::vector<cplx> avoid;        // poles the correction circles must dodge
  double clearance = 0.0;         // min | |u| - r | / r over all of the above
};

// poles of the pairing weight on the far side of the circle
inline std::vector<cplx> outside_poles(const model_params& par, int smax = 3) {
  std::vector<cplx> out;
  for (cplx zj : par.z)
    for (int s = 0; s < smax; ++s)
      out.push_back(par.q * par.q * zj * ipow(par.p, -s));
  return out;
}

// lattice points z_j p^m (m >= -1) that sit outside radius r; these carry
// residues the plain circle misses and get correction circles
inline std::vector<cplx> inside_orbit(const model_params& par, double r) {
  std::vector<cplx> out;
  for (cplx zj : par.z) {
    int m = -1;
    while (std::abs(zj * ipow(par.p, m)) > r) {
      out.push_back(zj * ipow(par.p, m));
      ++m;
    }
  }
  return out;
}

namespace detail {
inline contour_spec finish_spec(const model_params& par, double r, int N,
                                contour_mode mode, double rscale) {
  contour_spec spec;
  spec.r = r;
  spec.N = N;
  spec.mode = mode;
  spec.rscale = rscale;
  spec.corrections = inside_orbit(par, r);
  spec.avoid = outside_poles(par);
  double clr = 1e300;
  auto visit = [&](const std::vector<cplx>& pts) {
    for (cplx u : pts) clr = std::min(clr, std::abs(std::abs(u) - r));
  };
  visit(spec.corrections);
  visit(spec.avoid);
  // lattice points inside the circle also must keep distance
  for (cplx zj : par.z) {
    cplx u = zj;
    while (std::abs(u) > 1e-12) {
      if (std::abs(u) <= r) clr = std::min(clr, std::abs(std::abs(u) - r));
      u *= par.p;
      if (std::abs(u) < 1e-9 * r) break;
    }
  }
  spec.clearance = clr / r;
  if (spec.clearance < 1e-3)
    throw std::runtime_error(
        "contour circle passes within 1e-3 r of a pole; adjust the radius "
        "scale");
  return spec;
}
}  // namespace detail

// circle at the geometric mean of the standard window
// (|p| max|z|, |q|^2 min|z|); throws when the window is empty
inline contour_spec standard_contour(const model_params& par, int N = 512,
                                     double rscale = 1.0) {
  double zmax = 0.0, zmin = 1e300;
  for (cplx w : par.z) {
    zmax = std::max(zmax, std::abs(w));
    zmin = std::min(zmin, std::abs(w));
  }
  double lo = std::abs(par.p) * zmax;
  double hi = std::norm(par.q) * zmin;
  if (lo >= hi)
    throw std::runtime_error(
        "standard contour window is empty: |p| max|z| >= |q|^2 min|z|");
  double r = std::sqrt(lo * hi) * rscale;
  if (r <= lo || r >= hi)
    throw std::runtime_error("radius scale pushes the circle out of the window");
  return detail::finish_spec(par, r, N, contour_mode::standard, rscale);
}

// fallback for shifted-site configurations: place the circle in the widest
// radial gap of the decimated modulus ladder below the q^2 boundary
inline contour_spec safe_contour(const model_params& par, int N = 512) {
  double zmin = 1e300;
  for (cplx w : par.z) zmin = std::min(zmin, std::abs(w));
  double U = std::norm(par.q) * zmin;
  std::vector<double> mods;
  for (cplx zj : par.z)
    for (int k = 0; k < 80; ++k) {
      double m = std::abs(zj) * std::pow(std::abs(par.p), k);
      if (m < U) mods.push_back(m);
    }
  std::sort(mods.begin(), mods.end());
  mods.erase(std::unique(mods.begin(), mods.end(),
                         [](double a, double b) { return std::abs(a - b) <= 1e-12 * a; }),
             mods.end());
  std::vector<double> cands(mods.end() - std::min<std::ptrdiff_t>(4, mods.size()),
                            mods.end());
  cands.push_back(U);
  double best_ratio = 0.0;
  double r = cands.size() > 1 ? std::sqrt(cands[cands.size() - 2] * cands.back())
                              : U / 2.0;
  for (std::size_t i = 0; i + 1 < cands.size(); ++i)
    if (cands[i + 1] / cands[i] > best_ratio) {
      best_ratio = cands[i + 1] / cands[i];
      r = std::sqrt(cands[i] * cands[i + 1]);
    }
  return detail::finish_spec(par, r, N, contour_mode::safe, 1.0);
}

// standard placement when the window is open, safe placement otherwise
inline contour_spec make_contour(const model_params& par, int N = 512) {
  double zmax = 0.0, zmin = 1e300;
  for (cplx w : par.z) {
    zmax = std::max(zmax, std::abs(w));
    zmin = std::min(zmin, std::abs(w));
  }
  if (std::abs(par.p) * zmax < std::norm(par.q) * zmin)
    return standard_contour(par, N);
  return safe_contour(par, N);
}

// ---- node sets --------------------------------------------------------------

// fixed linear functional: sum_k w_k g(t_k) ~ (1/2 pi i) oint g dt over the
// circle plus corrections.  Every even-indexed node is also a member of the
// exact half-resolution rule, which prices the spectral convergence check
// at zero extra evaluations.
struct node_set {
  std::vector<cplx> t;
  std::vector<cplx> w;
  std::vector<unsigned char> coarse;
  std::vector<int> circle;  // 0 = main circle, i >= 1 = correction i
  contour_spec spec;
};

inline node_set build_nodes(const model_params& par, const contour_spec& spec) {
  node_set ns;
  ns.spec = spec;
  const int N = spec.N;
  for (int k = 0; k < N; ++k) {
    cplx t = spec.r * std::polar(1.0, 2.0 * pi * k / N);
    ns.t.push_back(t);
    ns.w.push_back(t / static_cast<double>(N));
    ns.coarse.push_back(k % 2 == 0);
    ns.circle.push_back(0);
  }
  std::vector<cplx> all = spec.corrections;
  all.insert(all.end(), spec.avoid.begin(), spec.avoid.end());
  for (std::size_t i = 0; i < spec.corrections.size(); ++i) {
    cplx u = spec.corrections[i];
    double dmin = std::abs(std::abs(u) - spec.r);
    for (cplx v : all) {
      double d = std::abs(u - v);
      if (d > 1e-9 * std::abs(u)) dmin = std::min(dmin, d);
    }
    double delta = 0.05 * dmin;
    for (int k = 0; k < 64; ++k) {
      cplx t = u + delta * std::polar(1.0, 2.0 * pi * (k + 0.5) / 64.0);
      ns.t.push_back(t);
      ns.w.push_back((t - u) / 64.0);
      ns.coarse.push_back(k % 2 == 0);
      ns.circle.push_back(static_cast<int>(i) + 1);
    }
  }
  return ns;
}

// ---- pairings ----------------------------------------------------------------

// one model instance + one node set; base coefficients fold in the pairing
// weight phi(t)/t so a pairing against F costs one multiply per node
struct pairing_context {
  model_params par;
  node_set ns;
  std::vector<cplx> base;

  static pairing_context make(const model_params& par, const contour_spec& spec) {
    pairing_context ctx;
    ctx.par = par;
    ctx.ns = build_nodes(par, spec);
    ctx.base.reserve(ctx.ns.t.size());
    for (std::size_t k = 0; k < ctx.ns.t.size(); ++k)
      ctx.base.push_back(ctx.ns.w[k] * phase(par, ctx.ns.t[k]) / ctx.ns.t[k]);
    return ctx;
  }

  pairing_context refined() const {
    contour_spec s = ns.spec;
    s.N *= 2;
    return make(par, s);
  }

  std::vector<cplx> coeffs(const std::function<cplx(const model_params&, cplx)>& F) const {
    std::vector<cplx> c(base);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= F(par, ns.t[k]);
    return c;
  }
};

struct quad_result {
  cplx value{0.0, 0.0};
  double scale = 0.0;           // sum of |term|, the natural comparison floor
  double max_correction = 0.0;  // largest single correction-circle residue
  double conv_rel = 0.0;        // fine-vs-half-rule disagreement over scale
};

// contract precomputed coefficients against per-node values of f
inline quad_result pair_sum(const std::vector<cplx>& c,
                            const std::vector<cplx>& fv, const node_set& ns) {
  quad_result out;
  cplx coarse{0.0, 0.0};
  std::vector<cplx> per_circle;
  for (std::size_t k = 0; k < c.size(); ++k) {
    cplx term = c[k] * fv[k];
    out.value += term;
    out.scale += std::abs(term);
    if (ns.coarse[k]) coarse += 2.0 * term;
    int ci = ns.circle[k];
    if (ci >= 1) {
      if (static_cast<std::size_t>(ci) > per_circle.size())
        per_circle.resize(static_cast<std::size_t>(ci));
      per_circle[static_cast<std::size_t>(ci - 1)] += term;
    }
  }
  for (cplx v : per_circle)
    out.max_correction = std::max(out.max_correction, std::abs(v));
  out.conv_rel = std::abs(out.value - coarse) / std::max(out.scale, 1e-300);
  return out;
}

inline quad_result pair_integral(const std::function<cplx(cplx)>& f,
                                 const std::function<cplx(const model_params&, cplx)>& F,
                                 const pairing_context& ctx) {
  std::vector<cplx> c = ctx.coeffs(F);
  std::vector<cplx> fv(ctx.ns.t.size());
  for (std::size_t k = 0; k < fv.size(); ++k) fv[k] = f(ctx.ns.t[k]);
  return pair_sum(c, fv, ctx.ns);
}

struct quad_options {
  int max_nodes = 8192;
  double conv_tol = 1e-11;
};

// pairing with automatic node doubling until the half-rule check settles
inline quad_result pair_integral_checked(
    const std::function<cplx(cplx)>& f,
    const std::function<cplx(const model_params&, cplx)>& F,
    const model_params& par, contour_spec spec, quad_options opt = {}) {
  while (true) {
    pairing_context ctx = pairing_context::make(par, spec);
    quad_result res = pair_integral(f, F, ctx);
    if (res.conv_rel <= opt.conv_tol) return res;
    spec.N *= 2;
    if (spec.N > opt.max_nodes)
      throw std::runtime_error(
          "pairing quadrature did not converge by " +
          std::to_string(opt.max_nodes) + " nodes");
  }
}

// multi-variable pairing: contract an arity-ell evaluator against one
// coefficient vector per slot.  Grid evaluation, so arity stays small.
inline quad_result pair_integral_multi(
    const multi_fn& f,
    const std::vector<std::function<cplx(const model_params&, cplx)>>& Fs,
    const pairing_context& ctx) {
  const int ell = f.arity;
  if (static_cast<int>(Fs.size()) != ell)
    throw std::invalid_argument("pair_integral_multi: factor count mismatch");
  if (ell < 1 || ell > 3)
    throw std::invalid_argument("pair_integral_multi: arity must be in [1, 3]");
  std::vector<std::vector<cplx>> cs;
  for (const auto& F : Fs) cs.push_back(ctx.coeffs(F));
  const std::size_t K = ctx.ns.t.size();
  quad_result out;
  cplx coarse{0.0, 0.0};
  std::vector<std::size_t> idx(static_cast<std::size_t>(ell), 0);
  std::vector<cplx> ts(static_cast<std::size_t>(ell));
  while (true) {
    cplx cw{1.0, 0.0};
    bool all_coarse = true;
    for (int a = 0; a < ell; ++a) {
      std::size_t k = idx[static_cast<std::size_t>(a)];
      ts[static_cast<std::size_t>(a)] = ctx.ns.t[k];
      cw *= cs[static_cast<std::size_t>(a)][k];
      all_coarse = all_coarse && ctx.ns.coarse[k];
    }
    cplx term = cw * f.eval(ts);
    out.value += term;
    out.scale += std::abs(term);
    if (all_coarse) coarse += std::pow(2.0, ell) * term;
    int a = ell - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == K) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
  out.conv_rel = std::abs(out.value - coarse) / std::max(out.scale, 1e-300);
  return out;
}

// ---- independent oracle -------------------------------------------------------

// sums the residues of phi f F / t over the shifted site lattice, shell by
// shell, until the shells decay; valid whenever f is regular and O(t) at
// the origin so the lattice is the only pole set inside
inline cplx residue_series_oracle(const std::function<cplx(cplx)>& f,
                                  const std::function<cplx(const model_params&, cplx)>& F,
                                  const model_params& par, int max_shell = 60,
                                  double tol = 1e-15) {
  auto g = [&](cplx t) { return phase(par, t) * f(t) * F(par, t) / t; };
  cplx total{0.0, 0.0};
  for (int m = -1; m < max_shell; ++m) {
    cplx shell{0.0, 0.0};
    for (cplx zj : par.z) {
      cplx u = zj * ipow(par.p, m);
      double dmin = 1e300;
      for (cplx zk : par.z) {
        for (int mm = m - 1; mm <= m + 1; ++mm) {
          cplx v = zk * ipow(par.p, mm);
          double d = std::abs(v - u);
          if (d > 1e-9 * std::abs(u)) dmin = std::min(dmin, d);
        }
        dmin = std::min(dmin, std::abs(par.q * par.q * zk - u));
      }
      shell += residue1(g, u, 0.05 * dmin, 64);
    }
    total += shell;
    if (m >= 1 && std::abs(shell) < tol * std::max(std::abs(total), 1e-300))
      return total;
  }
  throw std::runtime_error("residue ladder shows no decay over the lattice");
}

}  // namespace qkzlab
