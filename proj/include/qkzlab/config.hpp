#pragma once

// Run configuration.  The on-disk format is a small INI dialect: [section]
// headers, key = value lines, # or ; comments.  Parsing never stops at the
// first defect; every problem is collected so a bad file reports all of its
// issues in one pass, each tagged with the section and key it came from.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qkzlab/params.hpp"
#include "qkzlab/suites.hpp"

namespace qkzlab {

struct lab_config {
  model_params params;
  std::vector<std::string> suites;  // canonical order, subset of suite_names()
  suite_options opt;
  int jobs = 1;
  std::string out_dir = "reports";
  bool write_json = true;
  bool write_text = true;
  bool seed_set = false;  // the file set run.seed explicitly
};

struct config_result {
  lab_config cfg;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  out = static_cast<int>(v);
  return out == v;
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

inline bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return out = true;
  if (s == "false" || s == "no" || s == "off" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

// Accepts "1.3", "0.2i", "i", "-i", "1.3+0.2i", "2e-3-4.5e-2i".  The split
// between the real and imaginary term is the last sign that neither starts
// the string nor follows an exponent marker.
inline bool parse_complex(const std::string& raw, cplx& out) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) return false;
  if (s.back() != 'i' && s.back() != 'I') {
    double re;
    if (!parse_double(s, re)) return false;
    out = cplx{re, 0.0};
    return true;
  }
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [](std::string t, double& v) {
    if (t.empty() || t == "+") t = "1";
    else if (t == "-") t = "-1";
    return parse_double(t, v);
  };
  if (split == std::string::npos) {
    double im;
    if (!imag_part(s, im)) return false;
    out = cplx{0.0, im};
    return true;
  }
  double re, im;
  if (!parse_double(s.substr(0, split), re)) return false;
  if (!imag_part(s.substr(split), im)) return false;
  out = cplx{re, im};
  return true;
}

// comma- and/or whitespace-separated tokens
inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

inline config_result parse_config(const std::string& text) {
  config_result res;
  lab_config& cfg = res.cfg;

  struct entry {
    std::string section, key, value;
    int line;
  };
  std::vector<entry> entries;
  {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          res.errors.push_back("line " + std::to_string(lineno) +
                               ": unterminated section header");
          continue;
        }
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        res.errors.push_back("line " + std::to_string(lineno) +
                             ": expected key = value");
        continue;
      }
      entry e;
      e.section = section;
      e.key = detail::trim(line.substr(0, eq));
      e.value = detail::trim(line.substr(eq + 1));
      e.line = lineno;
      if (e.key.empty()) {
        res.errors.push_back("line " + std::to_string(lineno) + ": empty key");
        continue;
      }
      entries.push_back(std::move(e));
    }
  }

  // staged values; model parameters are assembled only after the scan
  cplx q{0.6, 0.0};
  cplx alpha{1.3, 0.2};
  int n = 4, ell = 2;
  std::optional<std::vector<cplx>> zs;
  std::uint64_t z_seed = 12345;
  double z_noise = 0.05;
  std::optional<cplx> p_override;
  std::vector<std::string> requested;  // empty = every suite

  std::set<std::string> unknown_sections;
  auto bad = [&res](const entry& e, const std::string& msg) {
    res.errors.push_back("[" + e.section + "] " + e.key + ": " + msg);
  };

  for (const auto& e : entries) {
    if (e.section == "params") {
      if (e.key == "q") {
        if (!detail::parse_complex(e.value, q)) bad(e, "not a number");
      } else if (e.key == "alpha") {
        if (!detail::parse_complex(e.value, alpha)) bad(e, "not a number");
      } else if (e.key == "n") {
        if (!detail::parse_int(e.value, n)) bad(e, "not an integer");
      } else if (e.key == "ell") {
        if (!detail::parse_int(e.value, ell)) bad(e, "not an integer");
      } else if (e.key == "z") {
        std::vector<cplx> pts;
        bool ok = true;
        for (const std::string& tok : detail::split_list(e.value)) {
          cplx w;
          if (!detail::parse_complex(tok, w)) {
            bad(e, "bad entry '" + tok + "'");
            ok = false;
            break;
          }
          pts.push_back(w);
        }
        if (ok) zs = std::move(pts);
      } else if (e.key == "z_seed") {
        if (!detail::parse_u64(e.value, z_seed))
          bad(e, "not an unsigned integer");
      } else if (e.key == "z_noise") {
        if (!detail::parse_double(e.value, z_noise)) bad(e, "not a number");
      } else if (e.key == "p_override") {
        cplx w;
        if (!detail::parse_complex(e.value, w)) bad(e, "not a number");
        else p_override = w;
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section == "suites") {
      if (e.key == "run") {
        if (e.value == "all") {
          requested.clear();
        } else {
          requested = detail::split_list(e.value);
          const auto& known = suite_names();
          for (const std::string& name : requested)
            if (std::find(known.begin(), known.end(), name) == known.end())
              bad(e, "unknown suite '" + name + "'");
        }
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section == "quadrature") {
      if (e.key == "nodes") {
        if (!detail::parse_int(e.value, cfg.opt.nodes) || cfg.opt.nodes < 16)
          bad(e, "expected an integer >= 16");
      } else if (e.key == "rscale") {
        if (!detail::parse_double(e.value, cfg.opt.rscale) ||
            !(cfg.opt.rscale > 0.0))
          bad(e, "expected a positive number");
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section == "tolerances") {
      if (e.key == "qkz_step") {
        if (!detail::parse_double(e.value, cfg.opt.tol_qkz) ||
            !(cfg.opt.tol_qkz > 0.0))
          bad(e, "expected a positive number");
      } else if (e.key == "control") {
        if (!detail::parse_double(e.value, cfg.opt.tol_control) ||
            !(cfg.opt.tol_control > 0.0))
          bad(e, "expected a positive number");
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section == "run") {
      if (e.key == "seed") {
        if (!detail::parse_u64(e.value, cfg.opt.seed))
          bad(e, "not an unsigned integer");
        else
          cfg.seed_set = true;
      } else if (e.key == "negative_controls") {
        if (!detail::parse_bool(e.value, cfg.opt.negative_controls))
          bad(e, "expected true or false");
      } else if (e.key == "jobs") {
        if (!detail::parse_int(e.value, cfg.jobs) || cfg.jobs < 1)
          bad(e, "expected an integer >= 1");
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section == "output") {
      if (e.key == "dir") {
        if (e.value.empty()) bad(e, "empty path");
        else cfg.out_dir = e.value;
      } else if (e.key == "format") {
        if (e.value == "json") {
          cfg.write_json = true;
          cfg.write_text = false;
        } else if (e.value == "text") {
          cfg.write_json = false;
          cfg.write_text = true;
        } else if (e.value == "both") {
          cfg.write_json = cfg.write_text = true;
        } else {
          bad(e, "expected json, text, or both");
        }
      } else {
        bad(e, "unknown key");
      }
    } else if (e.section.empty()) {
      res.errors.push_back("line " + std::to_string(e.line) + ": key '" +
                           e.key + "' appears before any [section]");
    } else if (unknown_sections.insert(e.section).second) {
      res.errors.push_back("[" + e.section + "]: unknown section");
    }
  }

  if (zs && static_cast<int>(zs->size()) != n)
    res.errors.push_back("[params] z: expected " + std::to_string(n) +
                         " entries, got " + std::to_string(zs->size()));
  if (!zs && n >= 1) zs = default_sites(n, z_seed, z_noise);
  if (zs && static_cast<int>(zs->size()) == n) {
    cfg.params = model_params::make(q, n, ell, alpha, *zs, p_override);
    validation_report v = validate(cfg.params);
    for (const std::string& s : v.errors)
      res.errors.push_back("[params] " + s);
    for (const std::string& s : v.warnings)
      res.warnings.push_back("[params] " + s);
  }

  // requested suites run in canonical order regardless of file order
  cfg.suites.clear();
  for (const std::string& name : suite_names())
    if (requested.empty() ||
        std::find(requested.begin(), requested.end(), name) != requested.end())
      cfg.suites.push_back(name);

  return res;
}

inline config_result load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    config_result res;
    res.errors.push_back("cannot open config file: " + path);
    return res;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace qkzlab
