#pragma once

// Analysis reports and their two renderings.
//
// A Report collects everything one analysis run produced: both spectra, the
// verdict of every check that ran, the witness pair (when one exists) with
// its simulation residual, and the classical five-condition table in
// multi-agent mode.  render_text writes the human form; to_json writes a
// machine form whose numbers survive a parse round-trip bit-exactly.  The
// process exit code is a pure function of the overall verdict.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "netdiscern/discern.hpp"
#include "netdiscern/sim.hpp"

namespace netdiscern {

struct EigenvalueRow {
  Complex value;
  int geometric = 0;
  int algebraic = 0;
};

struct CheckResult {
  std::string name;
  Verdict verdict;
};

struct Report {
  std::string mode;  // "network" | "multiagent"
  double tol = kDefaultTol;
  double t_final = kDefaultHorizon;
  int samples = kDefaultSamples;

  std::vector<EigenvalueRow> spectrum_original;
  std::vector<EigenvalueRow> spectrum_modified;
  std::vector<CheckResult> checks;

  std::optional<int> min_sensors_hint;        // network mode
  std::optional<LegacyReport> legacy;         // multiagent mode

  Discernibility overall = Discernibility::kInconclusive;
  std::optional<Complex> failing_mu;
  std::optional<WitnessPair> witness;
  std::vector<std::string> notes;
};

// 0 verdict in favor of detectability, 3 against, 4 undecided.  Spec-file
// problems exit 2 and unexpected failures 1; those never reach a Report.
inline int exit_code_for(const Report& r) {
  switch (r.overall) {
    case Discernibility::kDiscernible:
      return 0;
    case Discernibility::kIndiscernible:
      return 3;
    case Discernibility::kInconclusive:
      return 4;
  }
  return 1;
}

namespace detail {

inline std::string fmt_complex(Complex z) {
  return strf("(%.10g, %.10g)", z.real(), z.imag());
}

inline nlohmann::ordered_json json_complex(Complex z) {
  return {{"re", z.real()}, {"im", z.imag()}};
}

inline nlohmann::ordered_json json_vector(const Eigen::VectorXd& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline nlohmann::ordered_json json_spectrum(
    const std::vector<EigenvalueRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    out.push_back({{"value", json_complex(r.value)},
                   {"geometric", r.geometric},
                   {"algebraic", r.algebraic}});
  return out;
}

inline void json_verdict_fields(nlohmann::ordered_json& out, const Verdict& v) {
  out["status"] = to_string(v.status);
  out["necessary_only"] = v.necessary_only;
  if (v.failing_mu) out["failing_mu"] = json_complex(*v.failing_mu);
  if (v.failed_condition)
    out["failed_condition"] = to_string(*v.failed_condition);
  out["diagnostics"] = v.diagnostics;
}

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode;
  j["tolerance"] = r.tol;
  j["t_final"] = r.t_final;
  j["samples"] = r.samples;
  j["spectrum_original"] = detail::json_spectrum(r.spectrum_original);
  j["spectrum_modified"] = detail::json_spectrum(r.spectrum_modified);
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    detail::json_verdict_fields(jc, c.verdict);
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  if (r.min_sensors_hint) j["min_sensors_hint"] = *r.min_sensors_hint;
  if (r.legacy) {
    const LegacyReport& g = *r.legacy;
    nlohmann::ordered_json jl;
    jl["laplacian_original_observable"] = g.laplacian_original_observable;
    jl["laplacian_modified_observable"] = g.laplacian_modified_observable;
    jl["node_pairs_observable"] = g.node_pairs_observable;
    jl["invariant_match"] = g.invariant_match;
    jl["eigenvector_pairs_ensured"] = g.eigenvector_pairs_ensured;
    jl["all_conditions"] = g.all_conditions;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : g.checked_block_pairs)
      pairs.push_back({{"lambda", detail::json_complex(p.first)},
                       {"lambda_bar", detail::json_complex(p.second)}});
    jl["checked_block_pairs"] = std::move(pairs);
    jl["notes"] = g.notes;
    j["legacy"] = std::move(jl);
  }
  j["overall"] = to_string(r.overall);
  if (r.failing_mu) j["failing_mu"] = detail::json_complex(*r.failing_mu);
  if (r.witness) {
    j["witness"] = {{"X0", detail::json_vector(r.witness->X0)},
                    {"X0_bar", detail::json_vector(r.witness->X0_bar)},
                    {"residual", r.witness->residual},
                    {"validated", r.witness->validated}};
  }
  j["notes"] = r.notes;
  return j;
}

namespace detail {

inline std::string verdict_phrase(const std::string& mode, Discernibility d) {
  if (mode == "multiagent") {
    switch (d) {
      case Discernibility::kDiscernible:
        return "output discernibility ensured";
      case Discernibility::kIndiscernible:
        return "output discernibility NOT ensured";
      case Discernibility::kInconclusive:
        return "inconclusive";
    }
  }
  switch (d) {
    case Discernibility::kDiscernible:
      return "\u03a8-discernible";
    case Discernibility::kIndiscernible:
      return "\u03a8-indiscernible";
    case Discernibility::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

inline void render_spectrum(std::string& out, const char* title,
                            const std::vector<EigenvalueRow>& rows) {
  out += title;
  out += "\n";
  for (const auto& r : rows)
    out += strf("  mu = %-28s geometric %-3d algebraic %d\n",
                fmt_complex(r.value).c_str(), r.geometric, r.algebraic);
}

}  // namespace detail

inline std::string render_text(const Report& r) {
  std::string out;
  out += detail::strf("netdiscern analysis \u2014 %s mode\n", r.mode.c_str());
  out += detail::strf("tolerance %.10g, horizon %.10g, samples %d\n\n", r.tol,
                      r.t_final, r.samples);

  const char* orig_title =
      r.mode == "multiagent" ? "spectrum of F" : "spectrum of Phi";
  const char* mod_title =
      r.mode == "multiagent" ? "spectrum of F_bar" : "spectrum of Phi_bar";
  detail::render_spectrum(out, orig_title, r.spectrum_original);
  detail::render_spectrum(out, mod_title, r.spectrum_modified);
  out += "\n";

  out += "checks:\n";
  for (const auto& c : r.checks) {
    out += detail::strf("  %-26s %s%s\n", c.name.c_str(),
                        detail::verdict_phrase(r.mode, c.verdict.status).c_str(),
                        c.verdict.necessary_only ? "  [necessary only]" : "");
    if (c.verdict.failing_mu)
      out += detail::strf(
          "    failing mu = %s%s%s\n",
          detail::fmt_complex(*c.verdict.failing_mu).c_str(),
          c.verdict.failed_condition ? ", condition: " : "",
          c.verdict.failed_condition ? to_string(*c.verdict.failed_condition)
                                     : "");
    for (const auto& d : c.verdict.diagnostics) out += "    - " + d + "\n";
  }

  if (r.min_sensors_hint)
    out += detail::strf("\nminimum sensor count hint: %d\n",
                        *r.min_sensors_hint);

  if (r.legacy) {
    const LegacyReport& g = *r.legacy;
    out += "\nclassical conditions:\n";
    out += detail::strf("  (1) (Lap, Delta) observable:           %s\n",
                        detail::yes_no(g.laplacian_original_observable));
    out += detail::strf("  (2) (Lap_bar, Delta) observable:       %s\n",
                        detail::yes_no(g.laplacian_modified_observable));
    out += detail::strf("  (3) (A - lambda B, C) observable:      %s\n",
                        detail::yes_no(g.node_pairs_observable));
    out += detail::strf("  (4) unobservable subspaces match:      %s\n",
                        detail::yes_no(g.invariant_match));
    out += detail::strf("  (5) eigenvector pairs ensured:         %s\n",
                        detail::yes_no(g.eigenvector_pairs_ensured));
    out += detail::strf("  all five hold:                         %s\n",
                        detail::yes_no(g.all_conditions));
    if (!g.checked_block_pairs.empty()) {
      out += "  block pairs checked under (5):";
      for (const auto& p : g.checked_block_pairs)
        out += detail::strf(" [%s, %s]", detail::fmt_complex(p.first).c_str(),
                            detail::fmt_complex(p.second).c_str());
      out += "\n";
    }
    for (const auto& n : g.notes) out += "  - " + n + "\n";
  }

  if (r.witness) {
    out += detail::strf(
        "\nwitness pair (%s, max relative deviation %.3e)%s:\n",
        r.witness->validated ? "validated in simulation"
                             : "FAILED simulation validation",
        r.witness->residual,
        r.failing_mu
            ? detail::strf(" at mu = %s", detail::fmt_complex(*r.failing_mu).c_str())
                  .c_str()
            : "");
    out += "  X0     = [";
    for (Eigen::Index i = 0; i < r.witness->X0.size(); ++i)
      out += detail::strf("%s%.10g", i ? ", " : "", r.witness->X0(i));
    out += "]\n  X0_bar = [";
    for (Eigen::Index i = 0; i < r.witness->X0_bar.size(); ++i)
      out += detail::strf("%s%.10g", i ? ", " : "", r.witness->X0_bar(i));
    out += "]\n";
  }

  for (const auto& n : r.notes) out += "\nnote: " + n;
  if (!r.notes.empty()) out += "\n";

  out += detail::strf("\noverall: %s\n",
                      detail::verdict_phrase(r.mode, r.overall).c_str());
  return out;
}

}  // namespace netdiscern
