#pragma once

// Discernibility analysis: can a change of interconnection topology be seen
// in the sensed outputs, no matter how the system is excited?
//
// The exact criterion works eigenvalue by eigenvalue.  With S(mu | Phi) the
// eigenspace of mu, the pair is Psi-discernible iff for every mu in
// sigma(Phi) u sigma(Phi_bar):
//   (1)  S(mu | Phi) n S(mu | Phi_bar) = {0},  and
//   (2)  N(Psi) n { S(mu | Phi) (+) S(mu | Phi_bar) } = {0},
// equivalently iff dim{ Psi S + Psi S_bar } = dim S + dim S_bar at every mu,
// equivalently iff the augmented pair (diag(Phi, Phi_bar), [Psi, -Psi]) is
// observable.  All three routes are implemented and cross-checked; a fourth
// runs the eigenspace route on factor-level data only (the atlas).
//
// When a criterion fails, the offending mu yields a witness pair of initial
// states whose output trajectories coincide identically; sim.hpp validates
// the claim by simulation.
//
// Every check degrades to "inconclusive" instead of guessing whenever a rank
// decision, cluster, or cross-check sits too close to the tolerance.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netdiscern/atlas.hpp"
#include "netdiscern/jordan.hpp"
#include "netdiscern/model.hpp"
#include "netdiscern/numlin.hpp"
#include "netdiscern/sim.hpp"

namespace netdiscern {

enum class Discernibility { kDiscernible, kIndiscernible, kInconclusive };

enum class FailedCondition {
  kIntersection,        // S(mu|Phi) n S(mu|Phi_bar) != {0}
  kNullspaceDirectsum,  // N(Psi) n {S (+) S_bar} != {0}
  kDimensionFormula,    // dim{Psi S + Psi S_bar} < dim S + dim S_bar
  kSensorBound,         // rank(Delta) rank(C) < max_mu(tau + tau_bar)
  kReducedSystem,       // (L, L_bar) not Delta-discernible
  kObsCoupling,         // (A, H) unobservable
  kObsNodePair,         // (A + lambda H, C) unobservable for some lambda
  kPbhAugmented,        // PBH failed on (diag(Phi, Phi_bar), [Psi, -Psi])
};

inline const char* to_string(Discernibility d) {
  switch (d) {
    case Discernibility::kDiscernible: return "discernible";
    case Discernibility::kIndiscernible: return "indiscernible";
    default: return "inconclusive";
  }
}

inline const char* to_string(FailedCondition c) {
  switch (c) {
    case FailedCondition::kIntersection: return "eigenspace-intersection";
    case FailedCondition::kNullspaceDirectsum: return "sensor-nullspace";
    case FailedCondition::kDimensionFormula: return "dimension-formula";
    case FailedCondition::kSensorBound: return "sensor-count-bound";
    case FailedCondition::kReducedSystem: return "reduced-system";
    case FailedCondition::kObsCoupling: return "coupling-observability";
    case FailedCondition::kObsNodePair: return "node-pair-observability";
    default: return "augmented-pbh";
  }
}

struct Verdict {
  Discernibility status = Discernibility::kInconclusive;
  std::optional<Complex> failing_mu;
  std::optional<FailedCondition> failed_condition;
  std::optional<WitnessPair> witness;
  double tolerance_used = kDefaultTol;
  // A passed necessary condition proves nothing about discernibility; only
  // its failure (-> indiscernible) is conclusive.
  bool necessary_only = false;
  std::vector<std::string> diagnostics;
};

namespace detail {

// The two spectra plus a unified eigenvalue list.  Indices refer back into
// the EigenStructure entries (a value absent on one side gets -1).
struct SpectralPair {
  EigenStructure original;
  EigenStructure modified;
  struct UnionEntry {
    Complex mu;
    int orig_index = -1;
    int mod_index = -1;
  };
  std::vector<UnionEntry> unified;
};

inline SpectralPair analyze_spectra(const Eigen::MatrixXcd& phi,
                                    const Eigen::MatrixXcd& phi_bar,
                                    double tol, ToleranceDiagnostics* diag) {
  SpectralPair sp;
  sp.original = eig(phi, tol, diag);
  sp.modified = eig(phi_bar, tol, diag);

  std::vector<Complex> reps;
  for (const auto& e : sp.original.eigs) reps.push_back(e.value);
  for (const auto& e : sp.modified.eigs) reps.push_back(e.value);
  const int orig_count = static_cast<int>(sp.original.eigs.size());

  double scale = 1.0;
  for (const Complex& v : reps) scale = std::max(scale, std::abs(v));

  for (const auto& cluster :
       cluster_eigenvalues(reps, eigenvalue_cluster_link(tol))) {
    SpectralPair::UnionEntry entry;
    entry.mu = cluster.representative;
    for (int member : cluster.members) {
      const bool from_orig = member < orig_count;
      int& slot = from_orig ? entry.orig_index : entry.mod_index;
      if (slot >= 0) {
        // Two distinct clusters of one operator merged in the union: the
        // spectra are too tangled near this value to trust a verdict.
        if (diag)
          diag->flag(strf(
              "eigenvalues near (%g, %g) cannot be separated between the two "
              "topologies",
              entry.mu.real(), entry.mu.imag()));
      }
      slot = from_orig ? member : member - orig_count;
    }
    if (entry.orig_index >= 0 && entry.mod_index >= 0) {
      const double gap = std::abs(sp.original.eigs[entry.orig_index].value -
                                  sp.modified.eigs[entry.mod_index].value);
      if (gap > 10.0 * tol * scale && diag)
        diag->flag(strf(
            "matched eigenvalues at (%g, %g) differ by %.3e across the "
            "topologies; treating them as equal may be wrong",
            entry.mu.real(), entry.mu.imag(), gap));
    }
    sp.unified.push_back(entry);
  }
  return sp;
}

inline void finalize(Verdict& v, const ToleranceDiagnostics& diag) {
  v.diagnostics.insert(v.diagnostics.end(), diag.notes.begin(),
                       diag.notes.end());
  if (diag.borderline && v.status != Discernibility::kInconclusive) {
    v.diagnostics.push_back(
        "verdict downgraded to inconclusive: a decision sat too close to the "
        "tolerance");
    v.status = Discernibility::kInconclusive;
  }
}

}  // namespace detail

// A nonzero element of the null space of [mu I - diag(Phi, Phi_bar);
// Psi, -Psi] is a pair of eigenvectors with identical sensor readings; its
// real (or imaginary) part is a pair of real initial states whose output
// trajectories coincide for all time.
inline WitnessPair extract_witness(const AssembledPair& pair, Complex mu,
                                   double tol) {
  const Eigen::Index d = pair.Phi.rows();
  const Eigen::Index p = pair.Psi.rows();
  Eigen::MatrixXcd stack = Eigen::MatrixXcd::Zero(2 * d + p, 2 * d);
  stack.topLeftCorner(d, d) =
      mu * Eigen::MatrixXcd::Identity(d, d) - pair.Phi.cast<Complex>();
  stack.block(d, d, d, d) =
      mu * Eigen::MatrixXcd::Identity(d, d) - pair.Phi_bar.cast<Complex>();
  stack.block(2 * d, 0, p, d) = pair.Psi.cast<Complex>();
  stack.block(2 * d, d, p, d) = -pair.Psi.cast<Complex>();

  Subspace ns = null_space(stack, tol);
  if (ns.dim() == 0)
    throw ComputationError(detail::strf(
        "extract_witness: no indistinguishable pair found at mu=(%g, %g)",
        mu.real(), mu.imag()));
  const Eigen::VectorXcd z = ns.basis.col(0);
  Eigen::VectorXd re = z.real();
  Eigen::VectorXd im = z.imag();
  Eigen::VectorXd w = (re.norm() >= im.norm()) ? re : im;
  w /= w.norm();

  WitnessPair out;
  out.X0 = w.head(d);
  out.X0_bar = w.tail(d);
  validate_witness(pair, out);  // stamp residual + validated before attaching
  return out;
}

// PBH observability: rank [mu I - A; C] must be full at every eigenvalue.
inline bool pbh_observable(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& c,
                           double tol, Complex* failing = nullptr,
                           ToleranceDiagnostics* diag = nullptr) {
  if (a.rows() != a.cols() || c.cols() != a.cols())
    throw std::invalid_argument("pbh_observable: dimension mismatch");
  const Eigen::Index n = a.rows();
  const EigenStructure es = eig(a, tol, diag);
  Eigen::MatrixXcd stack(n + c.rows(), n);
  stack.bottomRows(c.rows()) = c;
  for (const auto& e : es.eigs) {
    stack.topRows(n) = e.value * Eigen::MatrixXcd::Identity(n, n) - a;
    if (numerical_rank(stack, tol, diag) < n) {
      if (failing) *failing = e.value;
      return false;
    }
  }
  return true;
}

// Largest A-invariant subspace inside ker C, via the standard intersection
// iteration (no observability-matrix powers, for conditioning's sake).
inline Subspace unobservable_subspace(const Eigen::MatrixXcd& a,
                                      const Eigen::MatrixXcd& c, double tol,
                                      ToleranceDiagnostics* diag = nullptr) {
  if (a.rows() != a.cols() || c.cols() != a.cols())
    throw std::invalid_argument("unobservable_subspace: dimension mismatch");
  // The residual's null space needs a floor at A's scale: once v is invariant
  // the residual is the zero map computed as rounding noise, and a rank cut
  // relative to the noise alone would collapse v instead of keeping it.
  const double floor = tol * detail::one_norm(a);
  Subspace v = null_space(c, tol, diag);
  while (v.dim() > 0) {
    // x stays when A x has no component outside v.
    Eigen::MatrixXcd outside =
        a - v.basis * (v.basis.adjoint() * a);
    Subspace next = intersect(
        v, detail::null_space_with_floor(outside, tol, floor, diag), diag);
    if (next.dim() == v.dim()) break;
    v = next;
  }
  return v;
}

// --- the four exact criteria ------------------------------------------------

// Eigenspace route: conditions (1) and (2) per unified eigenvalue, in sorted
// order, stopping at the first failure.
inline Verdict check_theorem_eigenspace(const AssembledPair& pair, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  ToleranceDiagnostics diag;
  try {
    const Eigen::Index d = pair.Phi.rows();
    detail::SpectralPair sp = detail::analyze_spectra(
        pair.Phi.cast<Complex>(), pair.Phi_bar.cast<Complex>(), tol, &diag);
    const Subspace n_psi = null_space(pair.Psi, tol, &diag);

    v.status = Discernibility::kDiscernible;
    for (const auto& entry : sp.unified) {
      const Subspace s = (entry.orig_index >= 0)
                             ? sp.original.eigs[entry.orig_index].eigenspace
                             : zero_subspace(d, tol);
      const Subspace s_bar = (entry.mod_index >= 0)
                                 ? sp.modified.eigs[entry.mod_index].eigenspace
                                 : zero_subspace(d, tol);
      if (intersect(s, s_bar, &diag).dim() > 0) {
        v.status = Discernibility::kIndiscernible;
        v.failing_mu = entry.mu;
        v.failed_condition = FailedCondition::kIntersection;
        break;
      }
      if (intersect(n_psi, sum(s, s_bar, &diag), &diag).dim() > 0) {
        v.status = Discernibility::kIndiscernible;
        v.failing_mu = entry.mu;
        v.failed_condition = FailedCondition::kNullspaceDirectsum;
        break;
      }
    }
    if (v.status == Discernibility::kIndiscernible)
      v.witness = extract_witness(pair, *v.failing_mu, tol);
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

// Dimension-formula route: at every unified eigenvalue the sensed images must
// fill dim S + dim S_bar dimensions.
inline Verdict check_dimension_formula(const AssembledPair& pair, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  ToleranceDiagnostics diag;
  try {
    const Eigen::Index d = pair.Phi.rows();
    detail::SpectralPair sp = detail::analyze_spectra(
        pair.Phi.cast<Complex>(), pair.Phi_bar.cast<Complex>(), tol, &diag);
    const Eigen::MatrixXcd psi = pair.Psi.cast<Complex>();

    v.status = Discernibility::kDiscernible;
    for (const auto& entry : sp.unified) {
      const Subspace s = (entry.orig_index >= 0)
                             ? sp.original.eigs[entry.orig_index].eigenspace
                             : zero_subspace(d, tol);
      const Subspace s_bar = (entry.mod_index >= 0)
                                 ? sp.modified.eigs[entry.mod_index].eigenspace
                                 : zero_subspace(d, tol);
      const Eigen::Index expect = s.dim() + s_bar.dim();
      const Eigen::Index got =
          sum(image(psi, s, tol, &diag), image(psi, s_bar, tol, &diag), &diag)
              .dim();
      if (got < expect) {
        v.status = Discernibility::kIndiscernible;
        v.failing_mu = entry.mu;
        v.failed_condition = FailedCondition::kDimensionFormula;
        v.diagnostics.push_back(detail::strf(
            "at mu=(%g, %g): sensed image spans %d of %d dimensions",
            entry.mu.real(), entry.mu.imag(), static_cast<int>(got),
            static_cast<int>(expect)));
        break;
      }
    }
    if (v.status == Discernibility::kIndiscernible)
      v.witness = extract_witness(pair, *v.failing_mu, tol);
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

// Augmented-PBH route: observability of (diag(Phi, Phi_bar), [Psi, -Psi]).
inline Verdict check_augmented_pbh(const AssembledPair& pair, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  ToleranceDiagnostics diag;
  try {
    const Eigen::Index d = pair.Phi.rows();
    const Eigen::Index p = pair.Psi.rows();
    Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    aug.topLeftCorner(d, d) = pair.Phi.cast<Complex>();
    aug.bottomRightCorner(d, d) = pair.Phi_bar.cast<Complex>();
    Eigen::MatrixXcd out(p, 2 * d);
    out.leftCols(d) = pair.Psi.cast<Complex>();
    out.rightCols(d) = -pair.Psi.cast<Complex>();

    Complex failing;
    if (pbh_observable(aug, out, tol, &failing, &diag)) {
      v.status = Discernibility::kDiscernible;
    } else {
      v.status = Discernibility::kIndiscernible;
      v.failing_mu = failing;
      v.failed_condition = FailedCondition::kPbhAugmented;
      v.witness = extract_witness(pair, failing, tol);
    }
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

namespace detail {

// Shared by the factor-level checks: both atlases plus a unified mu list,
// with the construction cross-validated against direct eigensolves.
struct AtlasPairData {
  Atlas original;
  Atlas modified;
  struct Entry {
    Complex mu;
    int orig_group = -1;
    int mod_group = -1;
  };
  std::vector<Entry> unified;
  std::vector<std::string> issues;  // non-empty => do not trust the atlases
};

inline AtlasPairData build_atlas_pair(const Eigen::MatrixXd& l,
                                      const Eigen::MatrixXd& l_bar,
                                      const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& h,
                                      const AssembledPair& pair, double tol,
                                      ToleranceDiagnostics* diag) {
  AtlasPairData out;
  out.original = build_atlas(l, a, h, tol, diag);
  out.modified = build_atlas(l_bar, a, h, tol, diag);

  for (const Atlas* atlas : {&out.original, &out.modified}) {
    const AtlasAgreement agree = validate_atlas(
        *atlas, (atlas == &out.original) ? pair.Phi : pair.Phi_bar, tol);
    out.issues.insert(out.issues.end(), agree.issues.begin(),
                      agree.issues.end());
  }
  if (out.original.any_degenerate() || out.modified.any_degenerate())
    out.issues.push_back("atlas construction produced dependent vectors");

  std::vector<Complex> mus;
  for (const auto& g : out.original.mu_groups) mus.push_back(g.mu);
  for (const auto& g : out.modified.mu_groups) mus.push_back(g.mu);
  const int orig_count = static_cast<int>(out.original.mu_groups.size());
  for (const auto& cluster :
       cluster_eigenvalues(mus, eigenvalue_cluster_link(tol))) {
    AtlasPairData::Entry entry;
    entry.mu = cluster.representative;
    for (int member : cluster.members) {
      if (member < orig_count)
        entry.orig_group = member;
      else
        entry.mod_group = member - orig_count;
    }
    out.unified.push_back(entry);
  }
  return out;
}

}  // namespace detail

// Factor-level (atlas) route: eigenspaces assembled from chains of L and of
// (A + lambda H, H) instead of eigensolves of the stacked operator, then the
// dimension formula.  The construction is cross-checked against the direct
// route; disagreement yields "inconclusive", never a silent preference.
inline Verdict check_lower_dimensional(const NetworkSpec& spec, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  ToleranceDiagnostics diag;
  try {
    const AssembledPair pair = assemble(spec);
    const detail::AtlasPairData ap = detail::build_atlas_pair(
        spec.L, spec.L_bar, spec.A, spec.H, pair, tol, &diag);
    if (!ap.issues.empty()) {
      v.status = Discernibility::kInconclusive;
      v.diagnostics = ap.issues;
      detail::finalize(v, diag);
      return v;
    }

    const Eigen::Index d = pair.Phi.rows();
    const Eigen::MatrixXcd psi = pair.Psi.cast<Complex>();
    v.status = Discernibility::kDiscernible;
    for (const auto& entry : ap.unified) {
      const Subspace s = (entry.orig_group >= 0)
                             ? ap.original.mu_groups[entry.orig_group].span
                             : zero_subspace(d, tol);
      const Subspace s_bar = (entry.mod_group >= 0)
                                 ? ap.modified.mu_groups[entry.mod_group].span
                                 : zero_subspace(d, tol);
      const int tau =
          (entry.orig_group >= 0 ? ap.original.mu_groups[entry.orig_group].tau
                                 : 0) +
          (entry.mod_group >= 0 ? ap.modified.mu_groups[entry.mod_group].tau
                                : 0);
      const Eigen::Index got =
          sum(image(psi, s, tol, &diag), image(psi, s_bar, tol, &diag), &diag)
              .dim();
      if (got < tau) {
        v.status = Discernibility::kIndiscernible;
        v.failing_mu = entry.mu;
        v.failed_condition = FailedCondition::kDimensionFormula;
        v.diagnostics.push_back(detail::strf(
            "at mu=(%g, %g): sensed image spans %d of %d dimensions",
            entry.mu.real(), entry.mu.imag(), static_cast<int>(got), tau));
        break;
      }
    }
    if (v.status == Discernibility::kIndiscernible)
      v.witness = extract_witness(pair, *v.failing_mu, tol);
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

// --- necessary conditions (their failure is conclusive, their success not) --

// Sensor-count bound: rank(Delta) rank(C) >= max_mu (tau + tau_bar).  Too few
// independent sensor rows make the dimension formula unsatisfiable at the
// richest eigenvalue.
inline Verdict check_sensor_bound(const NetworkSpec& spec, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  v.necessary_only = true;
  ToleranceDiagnostics diag;
  try {
    const AssembledPair pair = assemble(spec);
    const detail::AtlasPairData ap = detail::build_atlas_pair(
        spec.L, spec.L_bar, spec.A, spec.H, pair, tol, &diag);
    if (!ap.issues.empty()) {
      v.status = Discernibility::kInconclusive;
      v.diagnostics = ap.issues;
      detail::finalize(v, diag);
      return v;
    }

    int max_tau = 0;
    Complex argmax;
    for (const auto& entry : ap.unified) {
      const int tau =
          (entry.orig_group >= 0 ? ap.original.mu_groups[entry.orig_group].tau
                                 : 0) +
          (entry.mod_group >= 0 ? ap.modified.mu_groups[entry.mod_group].tau
                                : 0);
      if (tau > max_tau) {
        max_tau = tau;
        argmax = entry.mu;
      }
    }
    const int rank_delta = numerical_rank(
        sensor_selector(spec.sensors, spec.num_nodes()), tol, &diag);
    const int rank_c = numerical_rank(spec.C, tol, &diag);
    v.diagnostics.push_back(detail::strf(
        "sensor capacity %d x %d = %d against a requirement of %d", rank_delta,
        rank_c, rank_delta * rank_c, max_tau));
    if (rank_delta * rank_c < max_tau) {
      v.status = Discernibility::kIndiscernible;
      v.failing_mu = argmax;
      v.failed_condition = FailedCondition::kSensorBound;
      v.witness = extract_witness(pair, argmax, tol);
    } else {
      v.status = Discernibility::kDiscernible;
    }
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

// Least sensor count that could satisfy the bound above, assuming each
// sensor contributes rank(C) fresh rows.
inline int min_sensors_hint(const NetworkSpec& spec, double tol) {
  const int rank_c = numerical_rank(spec.C, tol);
  if (rank_c == 0)
    throw std::invalid_argument("min_sensors_hint: C has rank zero");
  const AssembledPair pair = assemble(spec);
  ToleranceDiagnostics diag;
  const detail::AtlasPairData ap = detail::build_atlas_pair(
      spec.L, spec.L_bar, spec.A, spec.H, pair, tol, &diag);
  int max_tau = 0;
  for (const auto& entry : ap.unified) {
    const int tau =
        (entry.orig_group >= 0 ? ap.original.mu_groups[entry.orig_group].tau
                               : 0) +
        (entry.mod_group >= 0 ? ap.modified.mu_groups[entry.mod_group].tau
                              : 0);
    max_tau = std::max(max_tau, tau);
  }
  return (max_tau + rank_c - 1) / rank_c;
}

// Reduced-system condition: the adjacency pair (L, L_bar) must itself be
// Delta-discernible.  A failure at lambda* lifts to the full system at any
// eigenvalue mu* of A + lambda* H: an indistinguishable node-level pair
// tensored with a node eigenvector is an indistinguishable full pair.
inline Verdict check_reduced_system(const NetworkSpec& spec, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  v.necessary_only = true;
  ToleranceDiagnostics diag;
  try {
    AssembledPair reduced;
    reduced.Phi = spec.L;
    reduced.Phi_bar = spec.L_bar;
    reduced.Psi = sensor_selector(spec.sensors, spec.num_nodes());
    Verdict inner = check_theorem_eigenspace(reduced, tol);
    v.diagnostics = std::move(inner.diagnostics);
    if (inner.status == Discernibility::kInconclusive) {
      v.status = Discernibility::kInconclusive;
      detail::finalize(v, diag);
      return v;
    }
    if (inner.status == Discernibility::kDiscernible) {
      v.status = Discernibility::kDiscernible;
      detail::finalize(v, diag);
      return v;
    }
    const Complex lambda_star = *inner.failing_mu;
    const Eigen::MatrixXcd node =
        spec.A.cast<Complex>() + lambda_star * spec.H.cast<Complex>();
    const Complex mu_star = eig(node, tol, &diag).eigs.front().value;
    v.status = Discernibility::kIndiscernible;
    v.failing_mu = mu_star;
    v.failed_condition = FailedCondition::kReducedSystem;
    v.diagnostics.push_back(detail::strf(
        "adjacency pair indistinguishable at lambda=(%g, %g); lifted to the "
        "full system at mu=(%g, %g)",
        lambda_star.real(), lambda_star.imag(), mu_star.real(),
        mu_star.imag()));
    v.witness = extract_witness(assemble(spec), mu_star, tol);
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

namespace detail {

// Observability screen shared by the network and multi-agent forms, with
// `h` the effective coupling (H, or -B).  Failures lift to full-system
// indiscernibility:
//   - (A, h) failing at a: an eigenvector killed by the channel replicates
//     across all nodes identically under both topologies;
//   - (A + lambda h, C) failing at mu: the node mode is invisible through C
//     on the topology owning lambda.
inline Verdict observability_screen(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& h,
                                    const Eigen::MatrixXd& c,
                                    const Eigen::MatrixXd& l,
                                    const Eigen::MatrixXd& l_bar,
                                    const AssembledPair& pair, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  v.necessary_only = true;
  ToleranceDiagnostics diag;
  try {
    Complex failing;
    if (!pbh_observable(a.cast<Complex>(), h.cast<Complex>(), tol, &failing,
                        &diag)) {
      v.status = Discernibility::kIndiscernible;
      v.failing_mu = failing;
      v.failed_condition = FailedCondition::kObsCoupling;
      v.diagnostics.push_back(detail::strf(
          "(A, coupling) unobservable at (%g, %g): this node mode never "
          "enters the network",
          failing.real(), failing.imag()));
      v.witness = extract_witness(pair, failing, tol);
      detail::finalize(v, diag);
      return v;
    }

    SpectralPair sp = analyze_spectra(l.cast<Complex>(), l_bar.cast<Complex>(),
                                      tol, &diag);
    for (const auto& entry : sp.unified) {
      const Eigen::MatrixXcd node =
          a.cast<Complex>() + entry.mu * h.cast<Complex>();
      if (!pbh_observable(node, c.cast<Complex>(), tol, &failing, &diag)) {
        v.status = Discernibility::kIndiscernible;
        v.failing_mu = failing;
        v.failed_condition = FailedCondition::kObsNodePair;
        v.diagnostics.push_back(detail::strf(
            "node pair at lambda=(%g, %g) unobservable through C at "
            "mu=(%g, %g)",
            entry.mu.real(), entry.mu.imag(), failing.real(), failing.imag()));
        v.witness = extract_witness(pair, failing, tol);
        detail::finalize(v, diag);
        return v;
      }
    }
    v.status = Discernibility::kDiscernible;
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

}  // namespace detail

inline Verdict check_observability_necessary(const NetworkSpec& spec,
                                             double tol) {
  return detail::observability_screen(spec.A, spec.H, spec.C, spec.L,
                                      spec.L_bar, assemble(spec), tol);
}

inline Verdict check_observability_necessary(const MultiAgentSpec& spec,
                                             double tol) {
  return detail::observability_screen(
      spec.A, Eigen::MatrixXd(-spec.B), spec.C,
      laplacian(spec, TopologyVariant::kOriginal),
      laplacian(spec, TopologyVariant::kModified), assemble_multiagent(spec),
      tol);
}

// --- multi-agent: corrected criterion and the five classical conditions -----

struct CommonEigenpair {
  Complex value;
  Subspace shared;  // intersection of the two eigenspaces
};

// Eigenvalues the two matrices share together with their common eigenvector
// directions.
inline std::vector<CommonEigenpair> common_eigenpairs(
    const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& p_bar, double tol,
    ToleranceDiagnostics* diag = nullptr) {
  std::vector<CommonEigenpair> out;
  detail::SpectralPair sp = detail::analyze_spectra(p, p_bar, tol, diag);
  for (const auto& entry : sp.unified) {
    if (entry.orig_index < 0 || entry.mod_index < 0) continue;
    Subspace shared =
        intersect(sp.original.eigs[entry.orig_index].eigenspace,
                  sp.modified.eigs[entry.mod_index].eigenspace, diag);
    if (shared.dim() > 0) out.push_back({entry.mu, std::move(shared)});
  }
  return out;
}

// Does the output map Q preserve all the distinguishing power of full state
// access for the pair (P, P_bar)?  Pairs of initial states with identical
// full-state trajectories are indistinguishable no matter the output map;
// Q ensures discernibility when it loses nothing beyond that unavoidable set.
inline bool ensures_output_discernibility(const Eigen::MatrixXcd& p,
                                          const Eigen::MatrixXcd& p_bar,
                                          const Eigen::MatrixXcd& q, double tol,
                                          ToleranceDiagnostics* diag = nullptr) {
  const Eigen::Index n = p.rows();
  if (p_bar.rows() != n || q.cols() != n)
    throw std::invalid_argument(
        "ensures_output_discernibility: dimension mismatch");
  Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = p;
  aug.bottomRightCorner(n, n) = p_bar;

  Eigen::MatrixXcd out_q(q.rows(), 2 * n);
  out_q.leftCols(n) = q;
  out_q.rightCols(n) = -q;
  Eigen::MatrixXcd out_i(n, 2 * n);
  out_i.leftCols(n) = Eigen::MatrixXcd::Identity(n, n);
  out_i.rightCols(n) = -Eigen::MatrixXcd::Identity(n, n);

  const Subspace unobs_q = unobservable_subspace(aug, out_q, tol, diag);
  const Subspace unobs_i = unobservable_subspace(aug, out_i, tol, diag);
  return subspace_equal(unobs_q, unobs_i);
}

// Whether observing only the selected agents keeps the edge change as
// detectable as observing every agent in full would.  This is a relative
// question: pairs of initial states whose full state trajectories already
// coincide are indistinguishable for any output map and do not count
// against M.  The verdict comes from comparing unobservable subspaces; the
// failing eigenvalue and the witness come from the modal scan
// N(M) n {S(mu|F) + S(mu|F_bar)}, whose nonzero elements z = x + x_bar
// yield pairs (x, -x_bar) with cancelling sensed outputs and differing
// states.
inline Verdict check_multiagent_output_discernibility(
    const MultiAgentSpec& spec, double tol) {
  Verdict v;
  v.tolerance_used = tol;
  ToleranceDiagnostics diag;
  try {
    const AssembledPair pair = assemble_multiagent(spec);
    const Eigen::Index d = pair.Phi.rows();
    const Eigen::MatrixXcd f = pair.Phi.cast<Complex>();
    const Eigen::MatrixXcd f_bar = pair.Phi_bar.cast<Complex>();
    const Eigen::MatrixXcd m = pair.Psi.cast<Complex>();

    const bool ensured = ensures_output_discernibility(f, f_bar, m, tol, &diag);

    detail::SpectralPair sp = detail::analyze_spectra(f, f_bar, tol, &diag);
    const Subspace n_m = null_space(m, tol, &diag);
    std::optional<Complex> failing;
    Eigen::VectorXcd z;
    Subspace s_at, s_bar_at;
    for (const auto& entry : sp.unified) {
      const Subspace s = (entry.orig_index >= 0)
                             ? sp.original.eigs[entry.orig_index].eigenspace
                             : zero_subspace(d, tol);
      const Subspace s_bar = (entry.mod_index >= 0)
                                 ? sp.modified.eigs[entry.mod_index].eigenspace
                                 : zero_subspace(d, tol);
      const Subspace k = intersect(n_m, sum(s, s_bar, &diag), &diag);
      if (k.dim() > 0) {
        failing = entry.mu;
        z = k.basis.col(0);
        s_at = s;
        s_bar_at = s_bar;
        break;
      }
    }

    if (ensured && !failing) {
      v.status = Discernibility::kDiscernible;
    } else if (!ensured && failing) {
      v.status = Discernibility::kIndiscernible;
      v.failing_mu = failing;
      v.failed_condition = FailedCondition::kNullspaceDirectsum;

      Eigen::MatrixXcd modal(d, s_at.dim() + s_bar_at.dim());
      modal.leftCols(s_at.dim()) = s_at.basis;
      modal.rightCols(s_bar_at.dim()) = s_bar_at.basis;
      const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
          modal, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXcd coef = svd.solve(z);
      const Eigen::VectorXcd x1 = s_at.basis * coef.head(s_at.dim());
      const Eigen::VectorXcd x2 = s_bar_at.basis * coef.tail(s_bar_at.dim());
      Eigen::VectorXcd zc(2 * d);
      zc.head(d) = x1;
      zc.tail(d) = -x2;
      const Eigen::VectorXd re = zc.real();
      const Eigen::VectorXd im = zc.imag();
      Eigen::VectorXd w = (re.norm() >= im.norm()) ? re : im;
      w /= w.norm();
      WitnessPair witness;
      witness.X0 = w.head(d);
      witness.X0_bar = w.tail(d);
      validate_witness(pair, witness);
      v.witness = witness;
    } else {
      v.status = Discernibility::kInconclusive;
      v.diagnostics.push_back(
          ensured ? "modal scan found an indistinguishable direction the "
                    "subspace comparison did not"
                  : "output information is lost beyond the eigenvector level; "
                    "no modal witness exists");
    }
  } catch (const ComputationError& e) {
    v.status = Discernibility::kInconclusive;
    v.diagnostics.push_back(e.what());
  }
  detail::finalize(v, diag);
  return v;
}

// The classical five-part check for detecting an edge change from observed
// agents, reported condition by condition, side by side with the exact
// verdict.  The two can disagree: all five conditions may hold while an
// indistinguishable pair of initial states still exists.
struct LegacyReport {
  bool laplacian_original_observable = false;  // (Lap, Delta)
  bool laplacian_modified_observable = false;  // (Lap_bar, Delta)
  bool node_pairs_observable = false;          // (A - lambda B, C), all lambda
  bool invariant_match = false;                // T_Delta == T_I
  bool eigenvector_pairs_ensured = false;      // condition on matched pairs
  bool all_conditions = false;
  // (lambda, lambda_bar) block pairs that admit eigenvectors with identical
  // sensed entries and were therefore tested for condition five.
  std::vector<std::pair<Complex, Complex>> checked_block_pairs;
  Verdict corrected;
  double tolerance_used = kDefaultTol;
  std::vector<std::string> notes;
};

inline LegacyReport check_legacy_theorem(const MultiAgentSpec& spec,
                                         double tol) {
  LegacyReport rep;
  rep.tolerance_used = tol;
  ToleranceDiagnostics diag;

  const Eigen::MatrixXd lap = laplacian(spec, TopologyVariant::kOriginal);
  const Eigen::MatrixXd lap_bar = laplacian(spec, TopologyVariant::kModified);
  const Eigen::MatrixXd delta =
      sensor_selector(spec.observed, spec.num_agents);
  const Eigen::Index nn = lap.rows();

  rep.laplacian_original_observable =
      pbh_observable(lap.cast<Complex>(), delta.cast<Complex>(), tol, nullptr,
                     &diag);
  rep.laplacian_modified_observable =
      pbh_observable(lap_bar.cast<Complex>(), delta.cast<Complex>(), tol,
                     nullptr, &diag);

  detail::SpectralPair lap_sp = detail::analyze_spectra(
      lap.cast<Complex>(), lap_bar.cast<Complex>(), tol, &diag);
  rep.node_pairs_observable = true;
  for (const auto& entry : lap_sp.unified) {
    const Eigen::MatrixXcd node =
        spec.A.cast<Complex>() - entry.mu * spec.B.cast<Complex>();
    Complex failing;
    if (!pbh_observable(node, spec.C.cast<Complex>(), tol, &failing, &diag)) {
      rep.node_pairs_observable = false;
      rep.notes.push_back(detail::strf(
          "(A - lambda B, C) unobservable at lambda=(%g, %g), mu=(%g, %g)",
          entry.mu.real(), entry.mu.imag(), failing.real(), failing.imag()));
      break;
    }
  }

  // Condition four: with full agent observation the only indistinguishable
  // network-level pairs are the trajectories the two Laplacians share; the
  // sensed rows Delta must not admit any more.
  {
    Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(2 * nn, 2 * nn);
    aug.topLeftCorner(nn, nn) = lap.cast<Complex>();
    aug.bottomRightCorner(nn, nn) = lap_bar.cast<Complex>();
    Eigen::MatrixXcd out_d(delta.rows(), 2 * nn);
    out_d.leftCols(nn) = delta.cast<Complex>();
    out_d.rightCols(nn) = -delta.cast<Complex>();
    Eigen::MatrixXcd out_i(nn, 2 * nn);
    out_i.leftCols(nn) = Eigen::MatrixXcd::Identity(nn, nn);
    out_i.rightCols(nn) = -Eigen::MatrixXcd::Identity(nn, nn);
    const Subspace t_delta = unobservable_subspace(aug, out_d, tol, &diag);
    const Subspace t_ident = unobservable_subspace(aug, out_i, tol, &diag);
    rep.invariant_match = subspace_equal(t_delta, t_ident);
    if (!rep.invariant_match)
      rep.notes.push_back(detail::strf(
          "sensed rows admit %d indistinguishable network directions, full "
          "observation only %d",
          static_cast<int>(t_delta.dim()), static_cast<int>(t_ident.dim())));
  }

  // Condition five: for every pair of Laplacian eigenvalues whose
  // eigenvectors can agree on all observed agents, C must keep the induced
  // node dynamics pair distinguishable.
  rep.eigenvector_pairs_ensured = true;
  const EigenStructure lap_eigs = eig(lap.cast<Complex>(), tol, &diag);
  const EigenStructure lap_bar_eigs =
      eig(lap_bar.cast<Complex>(), tol, &diag);
  for (const auto& le : lap_eigs.eigs) {
    for (const auto& lbe : lap_bar_eigs.eigs) {
      const Eigen::MatrixXcd bs = delta.cast<Complex>() * le.eigenspace.basis;
      const Eigen::MatrixXcd bs_bar =
          delta.cast<Complex>() * lbe.eigenspace.basis;
      const Eigen::Index a_dim = le.eigenspace.dim();
      const Eigen::Index b_dim = lbe.eigenspace.dim();
      Eigen::MatrixXcd stack(delta.rows(), a_dim + b_dim);
      stack << bs, -bs_bar;
      const Eigen::Index d_k =
          a_dim + b_dim - numerical_rank(stack, tol, &diag);
      const Eigen::Index d_1 = a_dim - numerical_rank(bs, tol, &diag);
      const Eigen::Index d_2 = b_dim - numerical_rank(bs_bar, tol, &diag);
      // Pairs with both eigenvectors nonzero exist iff the kernel is larger
      // than both single-sided slices.
      if (d_k > d_1 && d_k > d_2) {
        rep.checked_block_pairs.emplace_back(le.value, lbe.value);
        const Eigen::MatrixXcd p =
            spec.A.cast<Complex>() - le.value * spec.B.cast<Complex>();
        const Eigen::MatrixXcd p_bar =
            spec.A.cast<Complex>() - lbe.value * spec.B.cast<Complex>();
        if (!ensures_output_discernibility(p, p_bar, spec.C.cast<Complex>(),
                                           tol, &diag)) {
          rep.eigenvector_pairs_ensured = false;
          rep.notes.push_back(detail::strf(
              "C fails to separate the node pair induced by lambda=(%g, %g) "
              "and lambda_bar=(%g, %g)",
              le.value.real(), le.value.imag(), lbe.value.real(),
              lbe.value.imag()));
        }
      }
    }
  }

  rep.all_conditions =
      rep.laplacian_original_observable && rep.laplacian_modified_observable &&
      rep.node_pairs_observable && rep.invariant_match &&
      rep.eigenvector_pairs_ensured;
  rep.notes.insert(rep.notes.end(), diag.notes.begin(), diag.notes.end());
  if (diag.borderline)
    rep.notes.push_back(
        "some classical-condition decisions sat close to the tolerance");

  rep.corrected = check_multiagent_output_discernibility(spec, tol);
  return rep;
}

}  // namespace netdiscern
