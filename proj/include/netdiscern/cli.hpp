#pragma once

// Command-line front end: spec loading, analysis dispatch, rendering.
//
// Subcommands: analyze (every check for the mode, overall verdict), witness
// (just the indistinguishable pair, if one exists), simulate (integrate a
// user-supplied pair and compare outputs), atlas (the eigenvector-chain
// construction tables, network mode).  Exit codes: 0 detectable/ensured,
// 3 not, 4 undecided, 2 bad input, 1 unexpected failure.
//
// Parameter precedence: an explicit flag beats a value in the spec file,
// which beats the built-in default.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netdiscern/atlas.hpp"
#include "netdiscern/discern.hpp"
#include "netdiscern/model.hpp"
#include "netdiscern/report.hpp"
#include "netdiscern/sim.hpp"
#include "netdiscern/spec_io.hpp"

namespace netdiscern {

struct CliOptions {
  std::string path;
  std::string format = "text";  // text | json
  std::string method = "both";  // direct | atlas | both (network analyze)
  double tol = kDefaultTol;
  double t_final = kDefaultHorizon;
  int samples = kDefaultSamples;
  bool tol_set = false;
  bool t_final_set = false;
  bool samples_set = false;
  // simulate only
  std::string x0_path;
  std::string x0bar_path;
  double threshold = kDefaultSimThreshold;
};

struct EffectiveParams {
  double tol = kDefaultTol;
  double t_final = kDefaultHorizon;
  int samples = kDefaultSamples;
};

inline EffectiveParams effective_params(const CliOptions& o,
                                        const SpecDocument& d) {
  EffectiveParams p;
  p.tol = o.tol_set ? o.tol : d.tol.value_or(kDefaultTol);
  p.t_final = o.t_final_set ? o.t_final : d.t_final.value_or(kDefaultHorizon);
  p.samples = o.samples_set ? o.samples : d.samples.value_or(kDefaultSamples);
  return p;
}

namespace detail {

inline std::vector<EigenvalueRow> spectrum_rows(const Eigen::MatrixXd& m,
                                                double tol) {
  std::vector<EigenvalueRow> rows;
  for (const auto& e : eig(m, tol).eigs)
    rows.push_back({e.value, static_cast<int>(e.geometric_multiplicity),
                    static_cast<int>(e.algebraic_multiplicity)});
  return rows;
}

// Install the deciding verdict's witness into the report, cross-checking it
// by simulation.  An algebraic "indiscernible" whose witness the simulation
// rejects is numerically suspect, so the overall verdict degrades rather
// than stand on shaky ground.
inline void adopt_witness(Report& r, const AssembledPair& pair,
                          const Verdict& v, const EffectiveParams& p) {
  r.failing_mu = v.failing_mu;
  if (!v.witness) return;
  WitnessPair w = *v.witness;
  const bool ok =
      validate_witness(pair, w, p.t_final, p.samples, kDefaultSimThreshold);
  r.witness = w;
  if (!ok) {
    r.notes.push_back(
        "the witness pair failed simulation cross-checking; the verdict is "
        "downgraded to inconclusive");
    r.overall = Discernibility::kInconclusive;
  }
}

}  // namespace detail

// Runs the checks appropriate to a network problem and forms the overall
// verdict as the consensus of the exact routes that ran; the necessary-only
// screens can veto a "discernible" consensus into inconclusive (they are
// implied by it, so a contradiction means numbers went bad somewhere).
inline Report analyze_network(const NetworkSpec& spec, const EffectiveParams& p,
                              const std::string& method) {
  Report r;
  r.mode = "network";
  r.tol = p.tol;
  r.t_final = p.t_final;
  r.samples = p.samples;

  const AssembledPair pair = assemble(spec);
  r.spectrum_original = detail::spectrum_rows(pair.Phi, p.tol);
  r.spectrum_modified = detail::spectrum_rows(pair.Phi_bar, p.tol);

  const bool big = pair.Phi.rows() > 200;
  const bool run_direct = method == "direct" || (method == "both" && !big);
  const bool run_atlas = method == "atlas" || method == "both";
  if (method == "both" && big)
    r.notes.push_back(
        "system too large for the direct routes by default; ran the "
        "lower-dimensional construction only (force with --method direct)");

  size_t exact_end = 0;
  if (run_direct) {
    r.checks.push_back(
        {"eigenspace-criterion", check_theorem_eigenspace(pair, p.tol)});
    r.checks.push_back(
        {"dimension-formula", check_dimension_formula(pair, p.tol)});
    r.checks.push_back({"augmented-pbh", check_augmented_pbh(pair, p.tol)});
  }
  if (run_atlas)
    r.checks.push_back({"atlas-criterion", check_lower_dimensional(spec, p.tol)});
  exact_end = r.checks.size();

  r.checks.push_back({"sensor-count", check_sensor_bound(spec, p.tol)});
  r.checks.push_back({"reduced-system", check_reduced_system(spec, p.tol)});
  r.checks.push_back(
      {"observability-screens", check_observability_necessary(spec, p.tol)});

  try {
    r.min_sensors_hint = min_sensors_hint(spec, p.tol);
  } catch (const std::exception& e) {
    r.notes.push_back(
        detail::strf("no sensor-count hint: %s", e.what()));
  }

  // Consensus over the exact routes.
  Discernibility agreed = Discernibility::kInconclusive;
  bool conflict = false;
  const Verdict* decider = nullptr;
  for (size_t i = 0; i < exact_end; ++i) {
    const Verdict& v = r.checks[i].verdict;
    if (v.status == Discernibility::kInconclusive) continue;
    if (agreed == Discernibility::kInconclusive) {
      agreed = v.status;
      decider = &v;
    } else if (v.status != agreed) {
      conflict = true;
    }
    if (v.status == Discernibility::kIndiscernible && v.witness &&
        !(decider && decider->witness))
      decider = &v;
  }

  if (conflict) {
    r.overall = Discernibility::kInconclusive;
    r.notes.push_back(
        "the exact criteria disagree; the numbers are not trustworthy at "
        "this tolerance");
    return r;
  }
  if (agreed == Discernibility::kInconclusive) {
    r.overall = Discernibility::kInconclusive;
    r.notes.push_back("no exact route reached a conclusive verdict");
    return r;
  }

  r.overall = agreed;
  if (agreed == Discernibility::kIndiscernible) {
    detail::adopt_witness(r, pair, *decider, p);
  } else {
    for (size_t i = exact_end; i < r.checks.size(); ++i) {
      if (r.checks[i].verdict.status == Discernibility::kIndiscernible) {
        r.overall = Discernibility::kInconclusive;
        r.notes.push_back(detail::strf(
            "\"%s\" is a consequence of discernibility yet failed; the "
            "numbers are not trustworthy at this tolerance",
            r.checks[i].name.c_str()));
      }
    }
  }
  return r;
}

// Multi-agent analysis: the overall verdict is the corrected criterion (does
// the output map preserve exactly the distinctions full state observation
// would make) with the classical five-condition table reported alongside.
// The observability screens answer the stronger absolute question, so their
// failure coexists with an "ensured" verdict and only earns a note.
inline Report analyze_multiagent(const MultiAgentSpec& spec,
                                 const EffectiveParams& p) {
  Report r;
  r.mode = "multiagent";
  r.tol = p.tol;
  r.t_final = p.t_final;
  r.samples = p.samples;

  const AssembledPair pair = assemble_multiagent(spec);
  r.spectrum_original = detail::spectrum_rows(pair.Phi, p.tol);
  r.spectrum_modified = detail::spectrum_rows(pair.Phi_bar, p.tol);

  Verdict corrected;
  try {
    LegacyReport legacy = check_legacy_theorem(spec, p.tol);
    corrected = legacy.corrected;
    r.legacy = std::move(legacy);
  } catch (const ComputationError& e) {
    r.notes.push_back(detail::strf(
        "classical-condition evaluation failed: %s", e.what()));
    corrected = check_multiagent_output_discernibility(spec, p.tol);
  }
  r.checks.push_back({"output-map-comparison", corrected});

  const Verdict screens = check_observability_necessary(spec, p.tol);
  r.checks.push_back({"observability-screens", screens});

  r.overall = corrected.status;
  if (r.overall == Discernibility::kIndiscernible)
    detail::adopt_witness(r, pair, corrected, p);

  if (screens.status == Discernibility::kIndiscernible &&
      corrected.status == Discernibility::kDiscernible)
    r.notes.push_back(
        "the output map preserves everything full state observation would "
        "distinguish, but some modes are invisible to any output map of this "
        "shape (see the observability screens)");
  return r;
}

inline Report analyze_document(const SpecDocument& doc,
                               const EffectiveParams& p,
                               const std::string& method) {
  return doc.network ? analyze_network(*doc.network, p, method)
                     : analyze_multiagent(*doc.multiagent, p);
}

namespace detail {

inline void emit_report(const Report& r, const std::string& format) {
  if (format == "json")
    std::cout << to_json(r).dump(2) << "\n";
  else
    std::cout << render_text(r);
}

inline Eigen::VectorXd load_vector_file(const std::string& path,
                                        const char* what,
                                        Eigen::Index expected) {
  std::ifstream in(path);
  if (!in)
    throw SpecFormatError(strf("cannot open %s file \"%s\"", what,
                               path.c_str()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecFormatError(strf("%s: %s", path.c_str(), e.what()));
  }
  if (!j.is_array())
    throw SpecFormatError(
        strf("%s file must be a JSON array of numbers", what));
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number())
      throw SpecFormatError(strf("%s[%zu] is not a number", what, k + 1));
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  if (v.size() != expected)
    throw SpecFormatError(strf("%s must have length %ld (N*n), got %ld", what,
                               static_cast<long>(expected),
                               static_cast<long>(v.size())));
  return v;
}

}  // namespace detail

inline int cmd_analyze(const CliOptions& o) {
  const SpecDocument doc = load_spec_document(o.path);
  const EffectiveParams p = effective_params(o, doc);
  const Report r = analyze_document(doc, p, o.method);
  detail::emit_report(r, o.format);
  return exit_code_for(r);
}

inline int cmd_witness(const CliOptions& o) {
  const SpecDocument doc = load_spec_document(o.path);
  const EffectiveParams p = effective_params(o, doc);
  const Report r = analyze_document(doc, p, "both");

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["overall"] = to_string(r.overall);
    if (r.failing_mu) j["failing_mu"] = detail::json_complex(*r.failing_mu);
    if (r.witness) {
      j["X0"] = detail::json_vector(r.witness->X0);
      j["X0_bar"] = detail::json_vector(r.witness->X0_bar);
      j["residual"] = r.witness->residual;
      j["validated"] = r.witness->validated;
    }
    j["notes"] = r.notes;
    std::cout << j.dump(2) << "\n";
    return exit_code_for(r);
  }

  switch (r.overall) {
    case Discernibility::kDiscernible:
      std::cout << (r.mode == "multiagent"
                        ? "no witness: the output map preserves output "
                          "discernibility"
                        : "no witness: the topology change is "
                          "Ψ-discernible")
                << "\n";
      return 0;
    case Discernibility::kInconclusive:
      std::cout << "no witness: the analysis was inconclusive\n";
      for (const auto& n : r.notes) std::cout << "  - " << n << "\n";
      return 4;
    case Discernibility::kIndiscernible:
      break;
  }
  if (!r.witness) {
    // Should not happen: an indiscernible verdict always carries a witness.
    std::cout << "indiscernible, but no witness pair could be constructed\n";
    return 4;
  }
  std::cout << "indistinguishable initial-state pair";
  if (r.failing_mu)
    std::cout << " at mu = " << detail::fmt_complex(*r.failing_mu);
  std::cout << detail::strf(" (max relative output deviation %.3e over [0, %g])\n",
                            r.witness->residual, r.t_final);
  std::cout << "X0     = [";
  for (Eigen::Index i = 0; i < r.witness->X0.size(); ++i)
    std::cout << detail::strf("%s%.10g", i ? ", " : "", r.witness->X0(i));
  std::cout << "]\nX0_bar = [";
  for (Eigen::Index i = 0; i < r.witness->X0_bar.size(); ++i)
    std::cout << detail::strf("%s%.10g", i ? ", " : "", r.witness->X0_bar(i));
  std::cout << "]\n";
  return 3;
}

inline int cmd_simulate(const CliOptions& o) {
  const SpecDocument doc = load_spec_document(o.path);
  const EffectiveParams p = effective_params(o, doc);
  const AssembledPair pair = doc.network
                                 ? assemble(*doc.network)
                                 : assemble_multiagent(*doc.multiagent);
  const Eigen::VectorXd x0 =
      detail::load_vector_file(o.x0_path, "x0", pair.Phi.rows());
  const Eigen::VectorXd x0_bar =
      detail::load_vector_file(o.x0bar_path, "x0bar", pair.Phi.rows());

  const TrajectoryComparison cmp =
      compare_pair(pair, x0, x0_bar, p.t_final, p.samples);
  const bool below = cmp.max_rel_dev <= o.threshold;

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["t_grid"] = detail::json_vector(cmp.t_grid);
    nlohmann::ordered_json dev = nlohmann::ordered_json::array();
    for (Eigen::Index s = 0; s < cmp.t_grid.size(); ++s)
      dev.push_back((cmp.outputs_original.col(s) - cmp.outputs_modified.col(s))
                        .cwiseAbs()
                        .maxCoeff());
    j["deviation"] = std::move(dev);
    j["max_abs_dev"] = cmp.max_abs_dev;
    j["max_rel_dev"] = cmp.max_rel_dev;
    j["threshold"] = o.threshold;
    j["below_threshold"] = below;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "     t        max |output deviation|\n";
    for (Eigen::Index s = 0; s < cmp.t_grid.size(); ++s)
      std::cout << detail::strf(
          "%10.6g  %.10e\n", cmp.t_grid(s),
          (cmp.outputs_original.col(s) - cmp.outputs_modified.col(s))
              .cwiseAbs()
              .maxCoeff());
    std::cout << detail::strf("max absolute deviation: %.10e\n",
                              cmp.max_abs_dev);
    std::cout << detail::strf("max relative deviation: %.10e (threshold %g)\n",
                              cmp.max_rel_dev, o.threshold);
    std::cout << (below ? "outputs agree below the threshold\n"
                        : "outputs differ above the threshold\n");
  }
  return below ? 0 : 3;
}

inline int cmd_atlas(const CliOptions& o) {
  const SpecDocument doc = load_spec_document(o.path);
  if (!doc.network)
    throw SpecFormatError("the atlas construction applies to network mode");
  const EffectiveParams p = effective_params(o, doc);
  const NetworkSpec& spec = *doc.network;
  const AssembledPair pair = assemble(spec);

  nlohmann::ordered_json jout;
  bool all_agree = true;
  struct Side {
    const char* name;
    const Eigen::MatrixXd* l;
    const Eigen::MatrixXd* phi;
  };
  const Side sides[2] = {{"original", &spec.L, &pair.Phi},
                         {"modified", &spec.L_bar, &pair.Phi_bar}};
  for (const Side& side : sides) {
    const Atlas atlas = build_atlas(*side.l, spec.A, spec.H, p.tol);
    const AtlasAgreement agree = validate_atlas(atlas, *side.phi, p.tol);
    all_agree = all_agree && agree.agrees && !atlas.any_degenerate();

    if (o.format == "json") {
      nlohmann::ordered_json js;
      nlohmann::ordered_json entries = nlohmann::ordered_json::array();
      for (const auto& e : atlas.entries) {
        nlohmann::ordered_json je;
        je["lambda"] = detail::json_complex(e.lambda);
        je["chain_index"] = e.chain_index;
        je["alpha"] = e.alpha;
        je["mu"] = detail::json_complex(e.mu);
        je["theta"] = e.theta;
        je["gamma"] = e.gamma;
        nlohmann::ordered_json etas = nlohmann::ordered_json::array();
        for (Eigen::Index k = 0; k < e.eta.cols(); ++k) {
          nlohmann::ordered_json col = nlohmann::ordered_json::array();
          for (Eigen::Index i = 0; i < e.eta.rows(); ++i)
            col.push_back(detail::json_complex(e.eta(i, k)));
          etas.push_back(std::move(col));
        }
        je["eta"] = std::move(etas);
        entries.push_back(std::move(je));
      }
      js["entries"] = std::move(entries);
      nlohmann::ordered_json groups = nlohmann::ordered_json::array();
      for (const auto& g : atlas.mu_groups)
        groups.push_back({{"mu", detail::json_complex(g.mu)},
                          {"tau", g.tau},
                          {"span_dim", g.span.dim()},
                          {"degenerate", g.degenerate}});
      js["mu_groups"] = std::move(groups);
      js["agrees_with_direct"] = agree.agrees;
      js["issues"] = agree.issues;
      jout[side.name] = std::move(js);
    } else {
      std::cout << detail::strf("atlas for the %s topology:\n", side.name);
      std::cout << "  lambda                       chain  alpha  mu          "
                   "                 theta  gamma\n";
      for (const auto& e : atlas.entries)
        std::cout << detail::strf(
            "  %-28s %-6d %-6d %-28s %-6d %d\n",
            detail::fmt_complex(e.lambda).c_str(), e.chain_index, e.alpha,
            detail::fmt_complex(e.mu).c_str(), e.theta, e.gamma);
      for (const auto& e : atlas.entries) {
        for (Eigen::Index k = 0; k < e.eta.cols(); ++k) {
          std::cout << detail::strf(
              "  eta^%ld at lambda=%s, mu=%s: [", static_cast<long>(k + 1),
              detail::fmt_complex(e.lambda).c_str(),
              detail::fmt_complex(e.mu).c_str());
          for (Eigen::Index i = 0; i < e.eta.rows(); ++i)
            std::cout << (i ? ", " : "")
                      << detail::fmt_complex(e.eta(i, k));
          std::cout << "]\n";
        }
      }
      std::cout << "  eigenvalue groups:\n";
      for (const auto& g : atlas.mu_groups)
        std::cout << detail::strf(
            "    mu = %-28s tau = %-4d span dim = %-4ld%s\n",
            detail::fmt_complex(g.mu).c_str(), g.tau,
            static_cast<long>(g.span.dim()),
            g.degenerate ? "  DEGENERATE" : "");
      std::cout << detail::strf("  agreement with the direct eigensolve: %s\n",
                                agree.agrees ? "yes" : "NO");
      for (const auto& issue : agree.issues)
        std::cout << "    - " << issue << "\n";
      std::cout << "\n";
    }
  }

  if (o.format == "json") {
    jout["agrees"] = all_agree;
    std::cout << jout.dump(2) << "\n";
  } else {
    std::cout << (all_agree
                      ? "atlas and direct eigensolve agree on both topologies\n"
                      : "ATTENTION: atlas and direct eigensolve disagree\n");
  }
  return all_agree ? 0 : 4;
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "netdiscern — decides whether a topology change in a networked LTI "
      "system can be detected from sensor outputs, produces indistinguishable "
      "initial-state pairs when it cannot, and validates verdicts by "
      "simulation"};
  app.require_subcommand(1);
  CliOptions o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("spec", o.path, "JSON problem file")->required();
    sub->add_option("--tol", o.tol,
                    "rank and eigenvalue-cluster tolerance (default 1e-8)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--t-final", o.t_final,
                    "simulation horizon (default 5)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--samples", o.samples,
                    "simulation sample count (default 201)")
        ->check(CLI::Range(2, 1000000));
    sub->add_option("--format", o.format, "output form: text or json")
        ->check(CLI::IsMember({"text", "json"}));
  };

  CLI::App* an = app.add_subcommand(
      "analyze", "run every check for the mode and report a verdict");
  add_common(an);
  an->add_option("--method", o.method,
                 "exact route selection for network mode: direct, atlas, or "
                 "both with cross-checking (default both)")
      ->check(CLI::IsMember({"direct", "atlas", "both"}));

  CLI::App* wi = app.add_subcommand(
      "witness", "emit an indistinguishable initial-state pair, if any");
  add_common(wi);

  CLI::App* si = app.add_subcommand(
      "simulate", "integrate a user-supplied pair and compare the outputs");
  add_common(si);
  si->add_option("--x0", o.x0_path, "JSON array: initial state, original")
      ->required();
  si->add_option("--x0bar", o.x0bar_path,
                 "JSON array: initial state, modified")
      ->required();
  si->add_option("--threshold", o.threshold,
                 "relative deviation bound for \"outputs agree\" (default "
                 "1e-6)")
      ->check(CLI::PositiveNumber);

  CLI::App* at = app.add_subcommand(
      "atlas", "print the eigenvector-chain tables (network mode)");
  add_common(at);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sub : {an, wi, si, at})
    if (sub->parsed()) active = sub;
  if (!active) return 2;
  o.tol_set = active->count("--tol") > 0;
  o.t_final_set = active->count("--t-final") > 0;
  o.samples_set = active->count("--samples") > 0;

  try {
    if (active == an) return cmd_analyze(o);
    if (active == wi) return cmd_witness(o);
    if (active == si) return cmd_simulate(o);
    return cmd_atlas(o);
  } catch (const SpecFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace netdiscern
