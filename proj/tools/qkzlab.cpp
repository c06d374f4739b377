// Command-line driver.  `validate` resolves a configuration and echoes the
// derived quantities; `run` executes the requested suites and writes one
// report pair per suite as each finishes, so partial results survive an
// aborted run.  Exit codes: 0 all checks passed, 1 configuration or I/O
// problem, 2 at least one check failed, 3 nothing conclusive either way.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qkzlab/qkzlab.hpp"

namespace {

using namespace qkzlab;
namespace fs = std::filesystem;

std::string cplx_str(const cplx& w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g%+.12gi", w.real(), w.imag());
  return buf;
}

int cmd_validate(const std::string& path) {
  config_result res = load_config(path);
  if (!res.ok()) {
    for (const std::string& e : res.errors)
      std::fprintf(stderr, "error: %s\n", e.c_str());
    std::printf("invalid: %zu problem(s)\n", res.errors.size());
    return 1;
  }
  const model_params& par = res.cfg.params;
  std::printf("config: %s\n", path.c_str());
  std::printf("  q      = %s\n", cplx_str(par.q).c_str());
  std::printf("  alpha  = %s\n", cplx_str(par.alpha).c_str());
  std::printf("  n      = %d, ell = %d\n", par.n, par.ell);
  std::printf("  p      = %s%s\n", cplx_str(par.p).c_str(),
              par.p_overridden ? "  (overridden)" : "  (= q^4)");
  std::printf("  kappa  = %s\n", cplx_str(par.kappa).c_str());
  for (std::size_t j = 0; j < par.z.size(); ++j)
    std::printf("  z[%zu]   = %s\n", j + 1, cplx_str(par.z[j]).c_str());

  double zmax = 0.0, zmin = 1e300;
  for (const cplx& w : par.z) {
    zmax = std::max(zmax, std::abs(w));
    zmin = std::min(zmin, std::abs(w));
  }
  double lo = std::abs(par.p) * zmax;
  double hi = std::norm(par.q) * zmin;
  std::printf("  contour window: |t| in (%.6g, %.6g)%s\n", lo, hi,
              lo < hi ? "" : "  EMPTY");

  validation_report v = validate(par);
  bool feasible = v.standard_contour_feasible;
  if (feasible) {
    contour_spec spec = standard_contour(par, res.cfg.opt.nodes,
                                         res.cfg.opt.rscale);
    std::printf("  contour radius: %.6g with %d nodes\n", spec.r,
                res.cfg.opt.nodes);
    if (spec.corrections.empty()) {
      std::printf("  corrections: none\n");
    } else {
      std::printf("  corrections: %zu lattice point(s) outside the circle\n",
                  spec.corrections.size());
      for (const cplx& u : spec.corrections)
        std::printf("    %s\n", cplx_str(u).c_str());
    }
  }
  std::printf("  suites: ");
  for (std::size_t i = 0; i < res.cfg.suites.size(); ++i)
    std::printf("%s%s", i ? " " : "", res.cfg.suites[i].c_str());
  std::printf("\n  seed: %llu, nodes: %d, jobs: %d\n",
              static_cast<unsigned long long>(res.cfg.opt.seed),
              res.cfg.opt.nodes, res.cfg.jobs);

  for (const std::string& w : res.warnings)
    std::printf("warning: %s\n", w.c_str());
  if (!feasible) {
    std::printf("invalid: contour feasibility\n");
    return 1;
  }
  std::printf("valid\n");
  return 0;
}

struct run_overrides {
  std::vector<std::string> suites;
  int jobs = 0;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool negative_controls = false;
  int site = 0;
};

// largest measured/tolerance among rows whose pass sense is "stay below";
// rows that pass by exceeding their tolerance (the negative controls) are
// excluded so they cannot masquerade as near-failures
double worst_ratio(const suite_report& rep) {
  double worst = 0.0;
  for (const check_record& r : rep.records) {
    if (r.tolerance <= 0.0) continue;
    bool below = r.measured < r.tolerance;
    if (r.status == check_status::pass && below)
      worst = std::max(worst, r.measured / r.tolerance);
    if (r.status == check_status::fail && !below)
      worst = std::max(worst, r.measured / r.tolerance);
  }
  return worst;
}

int cmd_run(const std::string& path, const run_overrides& ov) {
  config_result res = load_config(path);
  if (const char* env = std::getenv("QKZLAB_SEED")) {
    std::uint64_t s;
    if (!qkzlab::detail::parse_u64(env, s))
      res.errors.push_back("QKZLAB_SEED: not an unsigned integer: " +
                           std::string(env));
    else
      res.cfg.opt.seed = s;
  }
  if (ov.seed) res.cfg.opt.seed = *ov.seed;
  if (!ov.suites.empty()) {
    const auto& known = suite_names();
    std::vector<std::string> picked;
    for (const std::string& name : known)
      if (std::find(ov.suites.begin(), ov.suites.end(), name) !=
          ov.suites.end())
        picked.push_back(name);
    for (const std::string& name : ov.suites)
      if (std::find(known.begin(), known.end(), name) == known.end())
        res.errors.push_back("--suite: unknown suite '" + name + "'");
    res.cfg.suites = std::move(picked);
  }
  if (ov.jobs > 0) res.cfg.jobs = ov.jobs;
  if (!ov.out.empty()) res.cfg.out_dir = ov.out;
  if (ov.negative_controls) res.cfg.opt.negative_controls = true;
  if (ov.site != 0) res.cfg.opt.site = ov.site;
  if (res.cfg.opt.site < 0 || res.cfg.opt.site > res.cfg.params.n)
    res.errors.push_back("--j: site must lie in [1, n]");

  if (!res.ok()) {
    for (const std::string& e : res.errors)
      std::fprintf(stderr, "error: %s\n", e.c_str());
    return 1;
  }
  for (const std::string& w : res.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());

  const lab_config& cfg = res.cfg;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create %s: %s\n",
                 cfg.out_dir.c_str(), ec.message().c_str());
    return 1;
  }

  lab_instance li = lab_instance::make(cfg.params);
  const std::vector<std::string>& suites = cfg.suites;
  std::vector<suite_report> reports(suites.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  bool io_failed = false;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= suites.size()) break;
      suite_report rep;
      try {
        rep = run_suite(suites[i], li, cfg.opt);
      } catch (const std::exception& ex) {
        rep.suite = suites[i];
        rep.seed = cfg.opt.seed;
        rep.params = cfg.params;
        check_record r;
        r.id = suites[i] + ".exception";
        r.identity = "the suite runs to completion";
        r.status = check_status::fail;
        r.details = ex.what();
        rep.records.push_back(r);
      }
      std::lock_guard<std::mutex> lock(io);
      if (cfg.write_json) {
        std::ofstream out(fs::path(cfg.out_dir) / (suites[i] + ".json"));
        out << report_json(rep).dump(2) << '\n';
        if (!out) io_failed = true;
      }
      if (cfg.write_text) {
        std::ofstream out(fs::path(cfg.out_dir) / (suites[i] + ".txt"));
        out << report_text(rep);
        if (!out) io_failed = true;
      }
      std::printf("%-12s %3d pass %3d fail %3d inconclusive %3d info  "
                  "(%.1f ms)\n",
                  rep.suite.c_str(), rep.count(check_status::pass),
                  rep.count(check_status::fail),
                  rep.count(check_status::inconclusive),
                  rep.count(check_status::info), rep.elapsed_ms);
      for (const check_record& r : rep.records)
        if (r.status == check_status::fail)
          std::printf("  FAIL %s: measured %.6e vs tolerance %.6e\n       %s\n",
                      r.id.c_str(), r.measured, r.tolerance,
                      r.details.c_str());
      std::fflush(stdout);
      reports[i] = std::move(rep);
    }
  };

  int nthreads = std::max(1, std::min<int>(cfg.jobs,
                                           static_cast<int>(suites.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  int pass = 0, fail = 0, inconclusive = 0, info = 0;
  nlohmann::ordered_json per_suite = nlohmann::ordered_json::object();
  nlohmann::ordered_json failed_ids = nlohmann::ordered_json::array();
  for (const suite_report& rep : reports) {
    pass += rep.count(check_status::pass);
    fail += rep.count(check_status::fail);
    inconclusive += rep.count(check_status::inconclusive);
    info += rep.count(check_status::info);
    nlohmann::ordered_json row;
    row["pass"] = rep.count(check_status::pass);
    row["fail"] = rep.count(check_status::fail);
    row["inconclusive"] = rep.count(check_status::inconclusive);
    row["info"] = rep.count(check_status::info);
    row["max_ratio"] = worst_ratio(rep);
    per_suite[rep.suite] = row;
    for (const check_record& r : rep.records)
      if (r.status == check_status::fail) failed_ids.push_back(r.id);
  }

  nlohmann::ordered_json summary;
  summary["schema"] = 1;
  summary["seed"] = cfg.opt.seed;
  summary["inputs_digest"] = inputs_digest(cfg.params, cfg.opt.seed);
  summary["params"] = params_json(cfg.params);
  summary["suites"] = per_suite;
  nlohmann::ordered_json totals;
  totals["pass"] = pass;
  totals["fail"] = fail;
  totals["inconclusive"] = inconclusive;
  totals["info"] = info;
  summary["totals"] = totals;
  summary["failed"] = failed_ids;
  summary["all_passed"] = fail == 0;
  {
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
    if (!out) io_failed = true;
  }

  std::printf("totals: %d pass, %d fail, %d inconclusive, %d info\n", pass,
              fail, inconclusive, info);
  std::printf("reports: %s\n", cfg.out_dir.c_str());
  if (io_failed) {
    std::fprintf(stderr, "error: report files could not be written\n");
    return 1;
  }
  if (fail > 0) return 2;
  if (pass == 0 && inconclusive > 0) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification lab for hypergeometric solutions of a "
               "difference equation"};
  app.require_subcommand(1);

  auto* vcmd =
      app.add_subcommand("validate", "resolve a config and echo what it means");
  std::string vpath;
  vcmd->add_option("config", vpath, "configuration file")->required();

  auto* rcmd = app.add_subcommand("run", "execute verification suites");
  std::string rpath;
  rcmd->add_option("config", rpath, "configuration file")->required();
  run_overrides ov;
  rcmd->add_option("--suite", ov.suites,
                   "suite to run (repeatable; default: config selection)");
  rcmd->add_option("--jobs", ov.jobs, "parallel suite workers")
      ->check(CLI::PositiveNumber);
  rcmd->add_option("--out", ov.out, "report directory");
  std::uint64_t seed_val = 0;
  auto* seed_opt = rcmd->add_option("--seed", seed_val, "run seed");
  rcmd->add_flag("--negative-controls", ov.negative_controls,
                 "also run the deliberately broken instances");
  rcmd->add_option("--j", ov.site,
                   "restrict the difference-equation suite to one site");

  CLI11_PARSE(app, argc, argv);

  if (vcmd->parsed()) return cmd_validate(vpath);
  if (seed_opt->count() > 0) ov.seed = seed_val;
  return cmd_run(rpath, ov);
}
