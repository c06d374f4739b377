#pragma once

// Check records and their two renderings.  The JSON form is
// byte-deterministic: fixed key order, no clocks, no environment echoes;
// wall-clock timings appear only in the text rendering.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkzlab/params.hpp"

namespace qkzlab {

enum class check_status { pass, fail, inconclusive, info };

inline const char* status_name(check_status s) {
  switch (s) {
    case check_status::pass: return "pass";
    case check_status::fail: return "fail";
    case check_status::inconclusive: return "inconclusive";
    default: return "info";
  }
}

struct check_record {
  std::string id;        // stable slug, unique within the suite
  std::string identity;  // the mathematical statement being checked
  check_status status = check_status::info;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string details;   // free-form context: modes, norms, notes
};

inline check_record make_check(std::string id, std::string identity,
                               double measured, double tolerance,
                               std::string details = "") {
  check_record r;
  r.id = std::move(id);
  r.identity = std::move(identity);
  r.measured = measured;
  r.tolerance = tolerance;
  r.status = measured < tolerance ? check_status::pass : check_status::fail;
  r.details = std::move(details);
  return r;
}

inline check_record make_info(std::string id, std::string identity,
                              double measured, std::string details = "") {
  check_record r;
  r.id = std::move(id);
  r.identity = std::move(identity);
  r.status = check_status::info;
  r.measured = measured;
  r.details = std::move(details);
  return r;
}

inline check_record make_inconclusive(std::string id, std::string identity,
                                      std::string details) {
  check_record r;
  r.id = std::move(id);
  r.identity = std::move(identity);
  r.status = check_status::inconclusive;
  r.details = std::move(details);
  return r;
}

struct suite_report {
  std::string suite;
  std::uint64_t seed = 0;
  model_params params;
  std::vector<check_record> records;
  double elapsed_ms = 0.0;  // never serialized to JSON

  int count(check_status s) const {
    int c = 0;
    for (const auto& r : records)
      if (r.status == s) ++c;
    return c;
  }
  bool all_passed() const { return count(check_status::fail) == 0; }
};

// ---- serialization -----------------------------------------------------------

inline nlohmann::ordered_json cplx_json(cplx c) {
  return nlohmann::ordered_json::array({c.real(), c.imag()});
}

inline nlohmann::ordered_json params_json(const model_params& par) {
  nlohmann::ordered_json j;
  j["q"] = cplx_json(par.q);
  j["p"] = cplx_json(par.p);
  j["p_overridden"] = par.p_overridden;
  j["n"] = par.n;
  j["ell"] = par.ell;
  j["alpha"] = cplx_json(par.alpha);
  j["kappa"] = cplx_json(par.kappa);
  nlohmann::ordered_json zs = nlohmann::ordered_json::array();
  for (cplx w : par.z) zs.push_back(cplx_json(w));
  j["z"] = zs;
  return j;
}

// FNV-1a over the serialized inputs; identifies a configuration across runs
inline std::string inputs_digest(const model_params& par, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["params"] = params_json(par);
  j["seed"] = seed;
  std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline nlohmann::ordered_json report_json(const suite_report& rep) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["suite"] = rep.suite;
  j["seed"] = rep.seed;
  j["inputs_digest"] = inputs_digest(rep.params, rep.seed);
  j["params"] = params_json(rep.params);
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) {
    nlohmann::ordered_json e;
    e["id"] = r.id;
    e["identity"] = r.identity;
    e["status"] = status_name(r.status);
    e["measured"] = r.measured;
    e["tolerance"] = r.tolerance;
    e["details"] = r.details;
    recs.push_back(e);
  }
  j["records"] = recs;
  nlohmann::ordered_json sum;
  sum["pass"] = rep.count(check_status::pass);
  sum["fail"] = rep.count(check_status::fail);
  sum["inconclusive"] = rep.count(check_status::inconclusive);
  sum["info"] = rep.count(check_status::info);
  j["summary"] = sum;
  return j;
}

inline std::string report_text(const suite_report& rep) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "suite %-12s seed %llu  digest %s\n",
                rep.suite.c_str(), static_cast<unsigned long long>(rep.seed),
                inputs_digest(rep.params, rep.seed).c_str());
  out += line;
  for (const auto& r : rep.records) {
    if (r.status == check_status::info) {
      std::snprintf(line, sizeof(line), "  INFO %-34s measured=%.3e  %s\n",
                    r.id.c_str(), r.measured, r.details.c_str());
    } else if (r.status == check_status::inconclusive) {
      std::snprintf(line, sizeof(line), "  INCONCLUSIVE %-26s %s\n",
                    r.id.c_str(), r.details.c_str());
    } else {
      std::snprintf(line, sizeof(line),
                    "  %s %-34s measured=%.3e tol=%g  %s\n",
                    r.status == check_status::pass ? "PASS" : "FAIL",
                    r.id.c_str(), r.measured, r.tolerance,
                    r.details.c_str());
    }
    out += line;
  }
  std::snprintf(line, sizeof(line),
                "  %d pass, %d fail, %d inconclusive, %d info  (%.1f ms)\n",
                rep.count(check_status::pass), rep.count(check_status::fail),
                rep.count(check_status::inconclusive),
                rep.count(check_status::info), rep.elapsed_ms);
  out += line;
  return out;
}

}  // namespace qkzlab
