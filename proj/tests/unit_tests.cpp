#include <catch2/catch_amalgamated.hpp>

#include "qkzlab/qkzlab.hpp"

using namespace qkzlab;

namespace {

model_params generic_params() {
  return model_params::make(cplx{0.6, 0.0}, 4, 2, cplx{1.3, 0.2},
                            default_sites(4, 12345, 0.05));
}

model_params unit_params() {
  return model_params::make(cplx{0.6, 0.0}, 4, 2, cplx{1.0, 0.0},
                            default_sites(4, 12345, 0.05));
}

cmat flip_matrix() {
  cmat P(4, 4);
  P(0, 0) = P(3, 3) = 1.0;
  P(1, 2) = P(2, 1) = 1.0;
  return P;
}

double mat_dist(const cmat& A, const cmat& B) {
  double worst = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k)
      worst = std::max(worst, std::abs(A(i, k) - B(i, k)));
  return worst;
}

}  // namespace

TEST_CASE("subset order and basis indexing", "[index]") {
  std::vector<subset> subs = subsets_colex(4, 2);
  std::vector<subset> expect = {{1, 2}, {1, 3}, {2, 3}, {1, 4}, {2, 4}, {3, 4}};
  REQUIRE(subs == expect);
  REQUIRE(subsets_colex(4, 0) == std::vector<subset>{{}});
  REQUIRE(subsets_colex(3, 3) == std::vector<subset>{{1, 2, 3}});

  REQUIRE(subset_leq({1, 3}, {2, 3}));
  REQUIRE(subset_leq({1, 2}, {1, 2}));
  REQUIRE_FALSE(subset_leq({2, 4}, {1, 4}));
  REQUIRE_FALSE(subset_leq({3, 4}, {1, 2}));

  // site m occupies bit n - m, so {1,2} in a 4-chain is 1100 binary
  REQUIRE(basis_index({1, 2}, 4) == 12);
  REQUIRE(basis_index({3, 4}, 4) == 3);
  REQUIRE(basis_index({}, 4) == 0);
  cvec v = unit_vector({2, 4}, 4);
  REQUIRE(std::abs(v[static_cast<std::size_t>(basis_index({2, 4}, 4))] - 1.0) ==
          0.0);
}

TEST_CASE("exchange matrix identities", "[algebra]") {
  model_params par = generic_params();
  cmat P = flip_matrix();

  REQUIRE(mat_dist(r_matrix(cplx{1.0, 0.0}, par), P) < 1e-12);

  det_rng rng(2024);
  int tried = 0;
  double worst_inv = 0.0, worst_yb = 0.0;
  while (tried < 20) {
    cplx zr{rng.box(-2.0, 2.0)};
    cplx zw{rng.box(-2.0, 2.0)};
    cplx q = par.q;
    if (std::abs(q * zr - 1.0 / q) < 0.1 || std::abs(q * zw - 1.0 / q) < 0.1 ||
        std::abs(q * zr * zw - 1.0 / q) < 0.1)
      continue;
    ++tried;
    cmat R = r_matrix(zr, par);
    cmat R21 = mat_mul(P, mat_mul(r_matrix(1.0 / zr, par), P));
    worst_inv = std::max(worst_inv,
                         mat_dist(mat_mul(R21, R), cmat::identity(4)));
    auto e3 = [&](cplx arg, int j, int k) {
      return embed_two_site(r_matrix(arg, par), j, k, 3);
    };
    cmat lhs = mat_mul(e3(zr, 1, 2), mat_mul(e3(zr * zw, 1, 3), e3(zw, 2, 3)));
    cmat rhs = mat_mul(e3(zw, 2, 3), mat_mul(e3(zr * zw, 1, 3), e3(zr, 1, 2)));
    worst_yb = std::max(worst_yb, mat_dist(lhs, rhs));
  }
  REQUIRE(worst_inv < 1e-12);
  REQUIRE(worst_yb < 1e-12);

  cplx pole = 1.0 / (par.q * par.q);
  REQUIRE_THROWS_AS(r_matrix(pole, par), std::domain_error);
}

TEST_CASE("transport operator structure", "[algebra]") {
  model_params par = generic_params();
  const int dim = 1 << par.n;
  cvec allplus(static_cast<std::size_t>(dim));
  allplus[0] = 1.0;

  double worst = 0.0;
  for (int j = 1; j <= par.n; ++j) {
    cmat K = k_operator(j, par);
    cvec moved = mat_vec(K, allplus);
    worst = std::max(worst, inf_dist(moved, allplus));
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        if (weight_of_index(r) != weight_of_index(c))
          worst = std::max(worst, std::abs(K(r, c)));
  }
  REQUIRE(worst < 1e-12);

  model_params p1 =
      model_params::make(par.q, 1, 1, par.alpha, {cplx{1.0, 0.0}});
  cmat K1 = k_operator(1, p1);
  REQUIRE(std::abs(K1(0, 0) - 1.0) < 1e-13);
  REQUIRE(std::abs(K1(1, 1) - p1.kappa) < 1e-13);
  REQUIRE(std::abs(K1(0, 1)) + std::abs(K1(1, 0)) < 1e-13);

  // z2 = q^2 z1 puts the site ratio on the exchange pole
  model_params clash = model_params::make(
      par.q, 2, 1, par.alpha, {cplx{1.0, 0.0}, par.q * par.q});
  REQUIRE_THROWS_WITH(k_operator(1, clash),
                      Catch::Matchers::ContainsSubstring("between sites"));
}

TEST_CASE("symmetry action on the chain", "[algebra]") {
  model_params par = generic_params();
  model_params p2 =
      model_params::make(par.q, 2, 1, cplx{1.0, 0.0},
                         {par.z[0], par.z[1]});
  const cplx q = par.q;

  cvec sing(4);
  sing[static_cast<std::size_t>(basis_index({1}, 2))] = 1.0;
  sing[static_cast<std::size_t>(basis_index({2}, 2))] = -q;
  REQUIRE(inf_norm(quantum_group_action(uq_gen::e, sing, p2)) < 1e-13);

  weight_report wr = weight_and_singular(sing, p2);
  REQUIRE(wr.homogeneous);
  REQUIRE(wr.weight == 1);
  REQUIRE(wr.singular);
  REQUIRE_FALSE(wr.trivial);

  cvec vpm(4);
  vpm[static_cast<std::size_t>(basis_index({2}, 2))] = 1.0;
  REQUIRE_FALSE(weight_and_singular(vpm, p2).singular);
  REQUIRE(weight_and_singular(cvec(4), p2).trivial);

  cvec allplus(static_cast<std::size_t>(1 << par.n));
  allplus[0] = 1.0;
  cvec kv = quantum_group_action(uq_gen::k, allplus, par);
  for (std::size_t i = 0; i < kv.size(); ++i) {
    cplx expect = i == 0 ? ipow(q, par.n) : cplx{0.0, 0.0};
    REQUIRE(std::abs(kv[i] - expect) < 1e-13);
  }

  cvec vpp(4);
  vpp[0] = 1.0;
  cvec fv = quantum_group_action(uq_gen::f, vpp, p2);
  cvec expect_fv(4);
  expect_fv[static_cast<std::size_t>(basis_index({2}, 2))] = 1.0;
  expect_fv[static_cast<std::size_t>(basis_index({1}, 2))] = q;
  REQUIRE(inf_dist(fv, expect_fv) < 1e-13);
}

TEST_CASE("sparse Laurent arithmetic", "[laurent]") {
  laurent f = lp_from_roots({cplx{1.0, 0.0}, cplx{-1.0, 0.0}});
  laurent t2m1 = lp_add(lp_monomial(2), lp_const(cplx{-1.0, 0.0}));
  REQUIRE(lp_clean(lp_sub(f, t2m1)).empty());

  laurent cube =
      lp_add(lp_monomial(3), lp_const(cplx{-1.0, 0.0}));
  laurent lin = lp_add(lp_monomial(1), lp_const(cplx{-1.0, 0.0}));
  laurent quot = lp_quot(cube, lin);
  laurent expect = lp_add(lp_add(lp_monomial(2), lp_monomial(1)), lp_const(1));
  REQUIRE(lp_clean(lp_sub(quot, expect)).empty());

  // exact Laurent division: (t - t^{-1}) = (1 - t^{-1})(t + 1)
  laurent ldiv = lp_sub(lp_monomial(1), lp_monomial(-1));
  laurent lgen = lp_sub(lp_const(1), lp_monomial(-1));
  laurent lq = lp_quot(ldiv, lgen);
  REQUIRE(lp_clean(lp_sub(lq, lp_add(lp_monomial(1), lp_const(1)))).empty());
  // the quotient drops any remainder below the divisor's span
  REQUIRE(lp_clean(lp_sub(lp_quot(ldiv, lin), lp_const(1))).empty());

  laurent mixed = lp_add(lp_monomial(-2, cplx{3.0, 0.0}), lp_monomial(1));
  laurent plus = lp_plus(mixed);
  REQUIRE(plus.size() == 1);
  REQUIRE(plus.count(1) == 1);

  cplx at = lp_eval(t2m1, cplx{2.0, 0.0});
  REQUIRE(std::abs(at - cplx{3.0, 0.0}) < 1e-15);
  // the cleanup threshold is relative: tiny-next-to-large goes, the exact
  // zero polynomial stays empty, a lone small coefficient survives
  REQUIRE(lp_clean(laurent{{0, cplx{0.0, 0.0}}}).empty());
  laurent noisy{{4, cplx{1e-30, 0.0}}, {0, cplx{1.0, 0.0}}};
  REQUIRE(lp_clean(noisy).size() == 1);
  REQUIRE(lp_clean(laurent{{4, cplx{1e-30, 0.0}}}).size() == 1);
}

TEST_CASE("dense matrix helpers", "[tensor]") {
  cmat D(2, 2);
  D(0, 0) = cplx{2.0, 0.0};
  D(1, 1) = cplx{0.0, 3.0};
  det_result dr = det_pivot(D);
  REQUIRE(std::abs(dr.value - cplx{0.0, 6.0}) < 1e-14);
  REQUIRE(dr.min_pivot > 1.0);

  cmat S(2, 2);
  S(0, 0) = cplx{3.0, 0.0};
  S(1, 1) = cplx{-4.0, 0.0};
  std::vector<double> sv = singular_values(S);
  REQUIRE(sv.size() == 2);
  double mx = std::max(sv[0], sv[1]), mn = std::min(sv[0], sv[1]);
  REQUIRE(std::abs(mx - 4.0) < 1e-12);
  REQUIRE(std::abs(mn - 3.0) < 1e-12);
}

TEST_CASE("theta and ladder identities", "[elliptic]") {
  const cplx p{0.1296, 0.0};
  det_rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    cplx u = rng.box(0.3, 1.8);
    cplx poch = qpochhammer_inf(u, p);
    REQUIRE(std::abs(poch - (1.0 - u) * qpochhammer_inf(p * u, p)) <
            1e-13 * std::abs(poch));
    cplx th = theta(u, p);
    REQUIRE(std::abs(theta(p * u, p) + th / u) < 1e-12 * std::abs(th / u));
    REQUIRE(std::abs(theta(p / u, p) - th) < 1e-12 * std::abs(th));
    cplx E = log_derivative_E(u, p);
    REQUIRE(std::abs(log_derivative_E(u / p, p) - E - 1.0) < 1e-11);
  }

  // ladder function against a centered finite difference of log theta
  cplx u0{1.13, 0.41};
  double h = 1e-6;
  cplx num = (std::log(theta(u0 * (1.0 + h), p)) -
              std::log(theta(u0 * (1.0 - h), p))) /
             (2.0 * h);
  REQUIRE(std::abs(log_derivative_E(u0, p) - num) < 1e-6);

  model_params par = generic_params();
  cplx t{0.21, 0.05};
  cplx bt = big_theta(par, t);
  REQUIRE(std::abs(big_theta(par, par.p * t) - bt) < 1e-11 * std::abs(bt));
  model_params odd =
      model_params::make(par.q, 3, 1, par.alpha,
                         {par.z[0], par.z[1], par.z[2]});
  REQUIRE_THROWS_AS(big_theta(odd, t), std::invalid_argument);

  // the phase function picks up a fixed rational multiplier per period step
  cplx lhs = phase(par, par.p * t) / phase(par, t);
  cplx rhs{1.0, 0.0};
  for (const cplx& zj : par.z)
    rhs *= (1.0 - t / (par.q * par.q * zj)) / (1.0 - t / zj);
  REQUIRE(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));

  REQUIRE(std::abs(std::abs(twist_c()) - 1.0) < 1e-15);
  REQUIRE(std::abs(twist_c() - cplx{1.0, 0.0}) > 0.1);
  REQUIRE(std::abs(twist_c() - cplx{0.0, 1.0}) > 0.1);
}

TEST_CASE("function catalogue and discrepancies", "[elliptic]") {
  model_params par1 = unit_params();

  REQUIRE(basis_one().label == "1");
  REQUIRE(basis_b(2).label == "B2");
  REQUIRE(basis_c(3).label == "C3");
  REQUIRE(basis_ehat().label == "Ehat");
  REQUIRE(basis_ehat(3).label == "Ehat@3");

  discrepancy_result dh = discrepancy(par1, basis_ehat().eval);
  REQUIRE(std::abs(dh.value - cplx{1.0, 0.0}) < 1e-9);
  REQUIRE(dh.spread < 1e-9);
  discrepancy_result dc = discrepancy(par1, basis_c(1).eval);
  REQUIRE(std::abs(dc.value) < 1e-9);

  std::vector<w_family> gen =
      solution_families(generic_params(), family_kind::generic_alpha);
  REQUIRE(gen.size() == 3);
  REQUIRE(gen.front().label == "(B1,B2)");
  std::vector<w_family> hat =
      solution_families(par1, family_kind::alpha_one_hat);
  REQUIRE_FALSE(hat.empty());
  for (const w_family& fam : hat)
    REQUIRE(fam.members.back().label == "Ehat");

  // the completion factor fails to transform cleanly only at its anchor
  shift_ratio_result at_anchor = member_shift_ratio(par1, 1, basis_ehat());
  REQUIRE_FALSE(at_anchor.constant);
  shift_ratio_result away = member_shift_ratio(par1, 3, basis_ehat());
  REQUIRE(away.constant);
  shift_ratio_result moved = member_shift_ratio(par1, 3, basis_ehat(3));
  REQUIRE_FALSE(moved.constant);
}

TEST_CASE("contour construction", "[hyperint]") {
  model_params par = generic_params();
  model_params grid = par.with_z(
      {cplx{1.0, 0.0}, cplx{0.0, 1.0}, cplx{-1.0, 0.0}, cplx{0.0, -1.0}});

  contour_spec spec = standard_contour(grid, 64);
  REQUIRE(std::abs(spec.r - 0.216) < 1e-12);  // |q|^3 for a unit-modulus grid

  contour_spec def = standard_contour(par, 64);
  double zmax = 0.0, zmin = 1e300;
  for (const cplx& w : par.z) {
    zmax = std::max(zmax, std::abs(w));
    zmin = std::min(zmin, std::abs(w));
  }
  REQUIRE(def.r > std::abs(par.p) * zmax);
  REQUIRE(def.r < std::norm(par.q) * zmin);

  model_params pushed = par.shifted(1);
  REQUIRE_THROWS_AS(standard_contour(pushed, 64), std::runtime_error);
  REQUIRE_NOTHROW(safe_contour(pushed, 64));
  REQUIRE_NOTHROW(make_contour(pushed, 64));
}

TEST_CASE("pairing oracle agreement", "[hyperint]") {
  model_params par = generic_params();
  pairing_context ctx = pairing_context::make(par, standard_contour(par, 256));

  rational_fn f;
  f.numerator = lp_monomial(1);
  f.poles = {par.z[0], par.z[1]};
  auto fe = [&f](cplx t) { return f(t); };
  auto Fe = basis_b(2);

  cplx quad = pair_integral(fe, Fe.eval, ctx).value;
  cplx orac = residue_series_oracle(f, Fe.eval, par);
  REQUIRE(std::abs(quad - orac) < 1e-8 * std::max(std::abs(quad), 1e-12));

  quad_result doubled =
      pair_integral_checked(fe, Fe.eval, par, standard_contour(par, 64));
  REQUIRE(std::abs(doubled.value - orac) <
          1e-8 * std::max(std::abs(orac), 1e-12));
  REQUIRE(doubled.conv_rel < 1e-10);
}

TEST_CASE("solution request admission", "[qkz]") {
  model_params par = generic_params();
  model_params par1 = unit_params();
  std::vector<w_family> gen =
      solution_families(par, family_kind::generic_alpha);
  std::vector<w_family> hat =
      solution_families(par1, family_kind::alpha_one_hat);

  solution_request bad_size{par, make_family({basis_b(1)}), psi_method::det,
                            128};
  request_check rc = validate_request(bad_size);
  REQUIRE_FALSE(rc.ok);
  REQUIRE_THAT(rc.reasons.front(),
               Catch::Matchers::ContainsSubstring("exactly ell factors"));

  solution_request detq_generic{par, gen.front(), psi_method::detq, 128};
  rc = validate_request(detq_generic);
  REQUIRE_FALSE(rc.ok);
  REQUIRE_THAT(rc.reasons.front(),
               Catch::Matchers::ContainsSubstring("alpha = 1"));

  model_params thin =
      model_params::make(par.q, 4, 1, cplx{1.0, 0.0}, par.z);
  solution_request det0_thin{thin, make_family({basis_c(1)}),
                             psi_method::det0, 128};
  rc = validate_request(det0_thin);
  REQUIRE_FALSE(rc.ok);
  bool mentions_sector = false;
  for (const std::string& r : rc.reasons)
    mentions_sector |= r.find("half-filled") != std::string::npos;
  REQUIRE(mentions_sector);

  REQUIRE_THROWS_AS(solve(bad_size), std::invalid_argument);
  REQUIRE_THROWS_WITH(solve(bad_size),
                      Catch::Matchers::ContainsSubstring("rejected"));

  solution_request good{par1, hat.back(), psi_method::det, 128};
  REQUIRE(validate_request(good).ok);
  psi_result psi = solve(good);
  REQUIRE(inf_norm(psi.vec) > 1e-6);
}

TEST_CASE("config parsing diagnostics", "[config]") {
  config_result good = parse_config(
      "[params]\nq = 0.6\nalpha = 1.3+0.2i\nn = 4\nell = 2\n"
      "[suites]\nrun = qkz res_lemma\n"
      "[run]\nseed = 42\n[output]\nformat = json\n");
  REQUIRE(good.ok());
  REQUIRE(good.cfg.suites == std::vector<std::string>{"res_lemma", "qkz"});
  REQUIRE(good.cfg.opt.seed == 42);
  REQUIRE(good.cfg.seed_set);
  REQUIRE(good.cfg.write_json);
  REQUIRE_FALSE(good.cfg.write_text);

  config_result deflt = parse_config("");
  REQUIRE(deflt.ok());
  REQUIRE(deflt.cfg.opt.seed == 12345);
  REQUIRE_FALSE(deflt.cfg.seed_set);
  REQUIRE(deflt.cfg.suites.size() == suite_names().size());

  config_result bad = parse_config(
      "[params]\nq = frog\nz = 1, 2\nn = 4\nbogus = 1\n"
      "[suites]\nrun = nope\n[junk]\na = 1\nb = 2\n");
  REQUIRE_FALSE(bad.ok());
  auto has = [&bad](const char* frag) {
    for (const std::string& e : bad.errors)
      if (e.find(frag) != std::string::npos) return true;
    return false;
  };
  REQUIRE(has("[params] q: not a number"));
  REQUIRE(has("[params] z: expected 4 entries"));
  REQUIRE(has("[params] bogus: unknown key"));
  REQUIRE(has("unknown suite 'nope'"));
  REQUIRE(has("[junk]: unknown section"));
  int junk_mentions = 0;
  for (const std::string& e : bad.errors)
    if (e.find("[junk]") != std::string::npos) ++junk_mentions;
  REQUIRE(junk_mentions == 1);

  cplx w;
  REQUIRE(qkzlab::detail::parse_complex("1.3+0.2i", w));
  REQUIRE(w == cplx{1.3, 0.2});
  REQUIRE(qkzlab::detail::parse_complex("-i", w));
  REQUIRE(w == cplx{0.0, -1.0});
  REQUIRE(qkzlab::detail::parse_complex("2e-3-4.5e-2i", w));
  REQUIRE(w == cplx{2e-3, -4.5e-2});
  REQUIRE_FALSE(qkzlab::detail::parse_complex("1.2.3", w));
  REQUIRE_FALSE(qkzlab::detail::parse_complex("", w));

  config_result missing = load_config("/nonexistent/path.cfg");
  REQUIRE_FALSE(missing.ok());
  REQUIRE_THAT(missing.errors.front(),
               Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("report rendering and digest stability", "[report]") {
  model_params par = generic_params();
  REQUIRE(inputs_digest(par, 12345) == "0b1a9ad06a3e2fd2");
  REQUIRE(inputs_digest(par, 12346) != inputs_digest(par, 12345));

  lab_instance li = lab_instance::make(par);
  suite_options opt;
  opt.nodes = 128;
  suite_report a = run_suite("res_lemma", li, opt);
  suite_report b = run_suite("res_lemma", li, opt);
  std::string ja = report_json(a).dump(2);
  std::string jb = report_json(b).dump(2);
  REQUIRE(ja == jb);
  REQUIRE(ja.find("elapsed") == std::string::npos);
  REQUIRE(report_text(a).find("ms") != std::string::npos);
  REQUIRE(a.all_passed());

  check_record edge = make_check("x", "boundary", 1.0, 1.0);
  REQUIRE(edge.status == check_status::fail);  // the bound is strict
  REQUIRE(std::string(status_name(check_status::inconclusive)) ==
          "inconclusive");

  REQUIRE_THROWS_AS(run_suite("nonsense", li, opt), std::invalid_argument);
}
