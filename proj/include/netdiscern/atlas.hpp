#pragma once

// Eigenvector atlas of Phi = I (x) A + L (x) H, built from the factors alone.
//
// For an L-chain t^1..t^alpha at lambda and a generalized chain xi^1..xi^theta
// of (A + lambda H, H) at mu, the vectors
//   eta^k = sum_{m=1..k} t^(k-m+1) (x) xi^m,   k = 1..min(alpha, theta),
// are eigenvectors of Phi at mu (a telescoping consequence of the two chain
// relations).  Collecting them over every pairing of chains yields, per mu,
// the full eigenspace S(mu | Phi) without ever forming an eigensolve of the
// big operator -- that independent route is what validate_atlas cross-checks.

#include <vector>

#include <Eigen/Dense>

#include "netdiscern/jordan.hpp"
#include "netdiscern/model.hpp"
#include "netdiscern/numlin.hpp"

namespace netdiscern {

struct AtlasEntry {
  int lambda_index = 0;  // position of lambda among the distinct L-eigenvalues
  int chain_index = 0;   // which L-chain at that lambda
  Complex lambda;
  Complex mu;
  int alpha = 0;  // L-chain length
  int theta = 0;  // generalized chain length (subject to the cap)
  int gamma = 0;  // min(alpha, theta) = number of eta vectors
  Eigen::MatrixXcd eta;  // (N n) x gamma, eta^k in column k-1
  Subspace V;            // span of the eta columns
  bool truncated = false;
  bool boundary = false;
};

struct Atlas {
  Eigen::Index ambient_dim = 0;
  double tol = kDefaultTol;
  std::vector<AtlasEntry> entries;

  struct MuGroup {
    Complex mu;  // representative over the member entries
    std::vector<int> entry_indices;
    int tau = 0;    // sum of gammas: the predicted eigenspace dimension
    Subspace span;  // S(mu | Phi) as constructed
    // True when the member etas fail to be independent (the constructed
    // direct sum collapsed) -- verdicts should not lean on this group.
    bool degenerate = false;
  };
  std::vector<MuGroup> mu_groups;

  bool any_degenerate() const {
    for (const auto& g : mu_groups)
      if (g.degenerate) return true;
    return false;
  }
};

inline Atlas build_atlas(const Eigen::MatrixXd& l, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& h, double tol,
                         ToleranceDiagnostics* diag = nullptr) {
  if (l.rows() != l.cols() || a.rows() != a.cols() || h.rows() != h.cols() ||
      a.rows() != h.rows())
    throw std::invalid_argument("build_atlas: incompatible matrix sizes");
  Atlas atlas;
  atlas.ambient_dim = l.rows() * a.rows();
  atlas.tol = tol;

  const auto l_chains = jordan_chains(l, tol, diag);

  // Chains arrive grouped by eigenvalue (identical representatives).
  struct LambdaGroup {
    Complex lambda;
    std::vector<const JordanChain*> chains;
    int alpha_max = 0;
  };
  std::vector<LambdaGroup> groups;
  for (const auto& c : l_chains) {
    if (groups.empty() || !(groups.back().lambda == c.eigenvalue)) {
      groups.push_back({c.eigenvalue, {}, 0});
    }
    groups.back().chains.push_back(&c);
    groups.back().alpha_max = std::max(groups.back().alpha_max, c.length());
  }

  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const LambdaGroup& g = groups[gi];
    // Chains longer than the longest alpha at this lambda never contribute
    // (gamma = min(alpha, theta)), so the cap loses nothing.
    const auto gen =
        generalized_chains(a, h, g.lambda, tol, g.alpha_max, diag);
    for (size_t ci = 0; ci < g.chains.size(); ++ci) {
      const JordanChain& lc = *g.chains[ci];
      for (const auto& gc : gen) {
        AtlasEntry e;
        e.lambda_index = static_cast<int>(gi);
        e.chain_index = static_cast<int>(ci);
        e.lambda = g.lambda;
        e.mu = gc.eigenvalue;
        e.alpha = lc.length();
        e.theta = gc.length();
        e.gamma = std::min(e.alpha, e.theta);
        e.truncated = gc.truncated;
        e.boundary = gc.boundary;
        e.eta.resize(atlas.ambient_dim, e.gamma);
        for (int k = 1; k <= e.gamma; ++k) {
          Eigen::VectorXcd eta = Eigen::VectorXcd::Zero(atlas.ambient_dim);
          for (int m = 1; m <= k; ++m)
            eta += kron(lc.vectors[k - m], gc.vectors[m - 1]).col(0);
          e.eta.col(k - 1) = eta;
        }
        e.V = subspace_span(atlas.ambient_dim, e.eta, tol, diag);
        atlas.entries.push_back(std::move(e));
      }
    }
  }

  // Group entries by mu across all lambdas.
  std::vector<Complex> mus;
  mus.reserve(atlas.entries.size());
  for (const auto& e : atlas.entries) mus.push_back(e.mu);
  for (const auto& cluster :
       cluster_eigenvalues(mus, eigenvalue_cluster_link(tol))) {
    Atlas::MuGroup mg;
    mg.mu = cluster.representative;
    mg.entry_indices = cluster.members;
    Eigen::Index cols = 0;
    for (int idx : mg.entry_indices) {
      mg.tau += atlas.entries[idx].gamma;
      cols += atlas.entries[idx].eta.cols();
    }
    Eigen::MatrixXcd all(atlas.ambient_dim, cols);
    Eigen::Index col = 0;
    for (int idx : mg.entry_indices) {
      all.middleCols(col, atlas.entries[idx].eta.cols()) =
          atlas.entries[idx].eta;
      col += atlas.entries[idx].eta.cols();
    }
    mg.span = subspace_span(atlas.ambient_dim, all, tol, diag);
    mg.degenerate = (mg.span.dim() < mg.tau);
    if (mg.degenerate && diag)
      diag->flag(detail::strf(
          "atlas vectors at mu=(%g, %g) are dependent: span %d < tau %d",
          mg.mu.real(), mg.mu.imag(), static_cast<int>(mg.span.dim()), mg.tau));
    atlas.mu_groups.push_back(std::move(mg));
  }
  return atlas;
}

// S(mu | Phi) looked up in the atlas; the zero subspace when mu is not an
// eigenvalue of Phi.
inline Subspace atlas_eigenspace(const Atlas& atlas, Complex mu) {
  double scale = std::max(1.0, std::abs(mu));
  for (const auto& g : atlas.mu_groups)
    scale = std::max(scale, std::abs(g.mu));
  const double link = eigenvalue_cluster_link(atlas.tol) * scale;
  const Atlas::MuGroup* best = nullptr;
  double best_dist = link;
  for (const auto& g : atlas.mu_groups) {
    const double dist = std::abs(g.mu - mu);
    if (dist <= best_dist) {
      best_dist = dist;
      best = &g;
    }
  }
  if (!best) return zero_subspace(atlas.ambient_dim, atlas.tol);
  return best->span;
}

struct AtlasAgreement {
  bool agrees = true;
  std::vector<std::string> issues;
};

// Cross-check of the construction against a direct eigensolve of Phi:
// every eta must be an eigenvector, every atlas eigenspace must match the
// directly computed one, and no eigenvalue of Phi may be missing.
inline AtlasAgreement validate_atlas(const Atlas& atlas,
                                     const Eigen::MatrixXd& phi, double tol,
                                     double angle_tol = 1e-6) {
  AtlasAgreement out;
  if (phi.rows() != atlas.ambient_dim || phi.cols() != atlas.ambient_dim) {
    out.agrees = false;
    out.issues.push_back("validate_atlas: operator size mismatch");
    return out;
  }
  const Eigen::MatrixXcd phic = phi.cast<Complex>();
  const double phinorm = std::max(phic.norm(), 1.0);

  for (const auto& e : atlas.entries) {
    for (Eigen::Index k = 0; k < e.eta.cols(); ++k) {
      const Eigen::VectorXcd v = e.eta.col(k);
      const double resid = (phic * v - e.mu * v).norm();
      if (resid > angle_tol * phinorm * v.norm()) {
        out.agrees = false;
        out.issues.push_back(detail::strf(
            "eta^%d of chain pair (%d, %d) at mu=(%g, %g) is not an "
            "eigenvector (residual %.3e)",
            static_cast<int>(k + 1), e.lambda_index, e.chain_index,
            e.mu.real(), e.mu.imag(), resid));
      }
    }
  }

  EigenStructure direct = eig(phic, tol);
  const double link = eigenvalue_cluster_link(tol);
  double scale = 1.0;
  for (const auto& d : direct.eigs) scale = std::max(scale, std::abs(d.value));

  std::vector<bool> matched(direct.eigs.size(), false);
  for (const auto& g : atlas.mu_groups) {
    const EigenspaceEntry* hit = nullptr;
    for (size_t i = 0; i < direct.eigs.size(); ++i) {
      if (std::abs(direct.eigs[i].value - g.mu) <= link * scale) {
        hit = &direct.eigs[i];
        matched[i] = true;
        break;
      }
    }
    if (!hit) {
      out.agrees = false;
      out.issues.push_back(detail::strf(
          "atlas eigenvalue mu=(%g, %g) is not an eigenvalue of the operator",
          g.mu.real(), g.mu.imag()));
      continue;
    }
    if (!subspace_equal(g.span, hit->eigenspace, angle_tol)) {
      out.agrees = false;
      out.issues.push_back(detail::strf(
          "eigenspace mismatch at mu=(%g, %g): atlas dim %d vs direct dim %d",
          g.mu.real(), g.mu.imag(), static_cast<int>(g.span.dim()),
          static_cast<int>(hit->eigenspace.dim())));
    }
  }
  for (size_t i = 0; i < matched.size(); ++i) {
    if (!matched[i]) {
      out.agrees = false;
      out.issues.push_back(detail::strf(
          "operator eigenvalue (%g, %g) is missing from the atlas",
          direct.eigs[i].value.real(), direct.eigs[i].value.imag()));
    }
  }
  return out;
}

}  // namespace netdiscern
