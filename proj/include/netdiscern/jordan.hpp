#pragma once

// Jordan chain extraction and H-coupled generalized chains.
//
// jordan_chains builds, for every eigenvalue lambda of a matrix, a full set
// of chains t^1, ..., t^alpha with
//   (M - lambda I) t^1 = 0,   (M - lambda I) t^a = t^(a-1),
// using nested null spaces of powers (never eigenvector derivatives), seeding
// the longest chains first so the union of all chains is a basis of the
// generalized eigenspace.
//
// generalized_chains extends eigenvectors of A + lambda H through the
// coupling channel:
//   (mu I - (A + lambda H)) xi^1 = 0,
//   (mu I - (A + lambda H)) xi^(i+1) = H xi^i,
// one chain per eigenspace basis vector, each step the minimum-norm least
// squares solution, stopping when the step becomes inconsistent.  A step
// whose right-hand side H xi^i vanishes continues with xi^(i+1) = 0: the
// chain stays meaningful because downstream formulas only ever use sums of
// Kronecker terms, and zero terms drop out.

#include <vector>

#include <Eigen/Dense>

#include "netdiscern/numlin.hpp"

namespace netdiscern {

struct JordanChain {
  Complex eigenvalue;                  // cluster representative
  std::vector<Eigen::VectorXcd> vectors;  // t^1 (the eigenvector) first

  int length() const { return static_cast<int>(vectors.size()); }
};

inline int geometric_multiplicity(const Eigen::MatrixXcd& m, Complex mu,
                                  double tol,
                                  ToleranceDiagnostics* diag = nullptr) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return static_cast<int>(null_space(Eigen::MatrixXcd(mu * id - m), tol, diag).dim());
}

inline std::vector<JordanChain> jordan_chains(const Eigen::MatrixXcd& m,
                                              double tol,
                                              ToleranceDiagnostics* diag = nullptr) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("jordan_chains: matrix must be square");
  const Eigen::Index n = m.rows();
  std::vector<JordanChain> out;
  if (n == 0) return out;

  const EigenStructure es = eig(m, tol, diag);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);

  for (const EigenspaceEntry& entry : es.eigs) {
    const Complex lambda = entry.value;
    const int alg = entry.algebraic_multiplicity;
    const Eigen::MatrixXcd d = m - lambda * id;

    // Nested null spaces N_k = null(D^k) until the generalized eigenspace is
    // exhausted.  The floor mirrors the one used for the eigenspace itself.
    std::vector<Subspace> nested;  // nested[k-1] = N_k
    Eigen::MatrixXcd dk = d;
    while (true) {
      Subspace nk = detail::null_space_with_floor(
          dk, tol, 10.0 * entry.cluster_radius, diag);
      if (!nested.empty() && nk.dim() <= nested.back().dim()) {
        // Saturated below the algebraic multiplicity: the power null spaces
        // stopped growing, so the chain structure cannot be resolved.
        throw ComputationError(detail::strf(
            "jordan_chains: generalized eigenspace at (%g, %g) saturated at "
            "dimension %d (algebraic multiplicity %d)",
            lambda.real(), lambda.imag(), static_cast<int>(nk.dim()), alg));
      }
      nested.push_back(std::move(nk));
      if (nested.back().dim() >= alg) break;
      if (static_cast<Eigen::Index>(nested.size()) >= n) break;
      dk = dk * d;
    }
    if (nested.back().dim() != alg)
      throw ComputationError(detail::strf(
          "jordan_chains: generalized eigenspace at (%g, %g) has dimension %d, "
          "expected %d",
          lambda.real(), lambda.imag(), static_cast<int>(nested.back().dim()),
          alg));

    const int kmax = static_cast<int>(nested.size());
    // Weyr characteristic w_k = dim N_k - dim N_(k-1) counts chains of
    // length >= k; it must be non-increasing.
    std::vector<int> weyr(kmax + 2, 0);
    for (int k = 1; k <= kmax; ++k) {
      const int prev = (k >= 2) ? static_cast<int>(nested[k - 2].dim()) : 0;
      weyr[k] = static_cast<int>(nested[k - 1].dim()) - prev;
    }
    for (int k = 2; k <= kmax; ++k)
      if (weyr[k] > weyr[k - 1])
        throw ComputationError(detail::strf(
            "jordan_chains: inconsistent nested null spaces at (%g, %g)",
            lambda.real(), lambda.imag()));

    // Top-down: seed chains of exact length k, then let every chain descend
    // one level per iteration (multiply by D), so span comparisons at level k
    // always see the already-descended vectors of longer chains.
    struct Stack {
      std::vector<Eigen::VectorXcd> downward;  // t^len first, t^1 last
    };
    std::vector<Stack> stacks;
    for (int k = kmax; k >= 1; --k) {
      for (Stack& s : stacks) s.downward.push_back(d * s.downward.back());

      const int want = weyr[k] - weyr[k + 1];
      if (want <= 0) continue;

      // Candidates live in N_k; exclude N_(k-1) plus the level-k vectors of
      // longer chains, then take the strongest remaining directions.
      Eigen::MatrixXcd excl(n, (k >= 2 ? nested[k - 2].dim() : 0) +
                                   static_cast<Eigen::Index>(stacks.size()));
      Eigen::Index col = 0;
      if (k >= 2)
        for (Eigen::Index j = 0; j < nested[k - 2].dim(); ++j)
          excl.col(col++) = nested[k - 2].basis.col(j);
      for (const Stack& s : stacks) excl.col(col++) = s.downward.back();
      const Subspace excl_span = subspace_span(n, excl, tol, diag);

      Eigen::MatrixXcd resid = nested[k - 1].basis;
      if (excl_span.dim() > 0)
        resid -= excl_span.basis * (excl_span.basis.adjoint() * resid);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(resid, Eigen::ComputeThinU);
      if (svd.singularValues().size() < want ||
          svd.singularValues()(want - 1) < 0.1)
        throw ComputationError(detail::strf(
            "jordan_chains: could not find %d independent chain seeds of "
            "length %d at (%g, %g)",
            want, k, lambda.real(), lambda.imag()));
      for (int j = 0; j < want; ++j) {
        Eigen::VectorXcd seed = svd.matrixU().col(j);
        // Fix the seed's phase now; descents inherit it, keeping the whole
        // chain consistent.
        detail::normalize_phase(seed);
        Stack s;
        s.downward.push_back(std::move(seed));
        stacks.push_back(std::move(s));
      }
    }

    for (Stack& s : stacks) {
      JordanChain chain;
      chain.eigenvalue = lambda;
      chain.vectors.assign(s.downward.rbegin(), s.downward.rend());
      out.push_back(std::move(chain));
    }
  }
  return out;
}

template <typename Derived,
          std::enable_if_t<
              std::is_same_v<typename Derived::Scalar, double>, int> = 0>
inline std::vector<JordanChain> jordan_chains(
    const Eigen::MatrixBase<Derived>& m, double tol,
    ToleranceDiagnostics* diag = nullptr) {
  return jordan_chains(Eigen::MatrixXcd(m.template cast<Complex>()), tol, diag);
}

struct GeneralizedChain {
  Complex eigenvalue;  // mu, an eigenvalue of A + lambda H
  std::vector<Eigen::VectorXcd> vectors;  // xi^1 first; entries may be zero
  // True when the chain hit the caller's cap while the next step was still
  // solvable; the reported length is then a floor, not the true theta.
  bool truncated = false;
  // True when some stop/continue decision rested on a residual close to the
  // acceptance threshold.
  bool boundary = false;

  int length() const { return static_cast<int>(vectors.size()); }
};

// All generalized chains of (A + lambda H, H): one chain per eigenspace basis
// vector of every eigenvalue mu.  `cap` bounds the chain length (coupled
// systems can extend some chains indefinitely).
inline std::vector<GeneralizedChain> generalized_chains(
    const Eigen::MatrixXd& a, const Eigen::MatrixXd& h, Complex lambda,
    double tol, int cap, ToleranceDiagnostics* diag = nullptr) {
  if (a.rows() != a.cols() || h.rows() != h.cols() || a.rows() != h.rows())
    throw std::invalid_argument("generalized_chains: A and H must be square "
                                "and of equal size");
  if (cap < 1) throw std::invalid_argument("generalized_chains: cap must be >= 1");
  const Eigen::Index n = a.rows();
  std::vector<GeneralizedChain> out;
  if (n == 0) return out;

  const Eigen::MatrixXcd hc = h.cast<Complex>();
  const Eigen::MatrixXcd m = a.cast<Complex>() + lambda * hc;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const double hnorm = hc.norm();
  const EigenStructure es = eig(m, tol, diag);

  for (const EigenspaceEntry& entry : es.eigs) {
    const Complex mu = entry.value;
    const Eigen::MatrixXcd d = mu * id - m;
    // One SVD per mu serves every min-norm solve below.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        d, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff =
        (sv.size() && sv(0) > 0.0)
            ? tol * sv(0) * static_cast<double>(n)
            : 0.0;
    auto pinv_solve = [&](const Eigen::VectorXcd& rhs) {
      Eigen::VectorXcd y = svd.matrixU().adjoint() * rhs;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        y(i) = (sv(i) > cutoff) ? y(i) / sv(i) : Complex(0.0);
      return Eigen::VectorXcd(svd.matrixV() * y);
    };

    for (Eigen::Index j = 0; j < entry.eigenspace.dim(); ++j) {
      GeneralizedChain chain;
      chain.eigenvalue = mu;
      chain.vectors.push_back(entry.eigenspace.basis.col(j));

      while (chain.length() < cap) {
        const Eigen::VectorXcd& xi = chain.vectors.back();
        const Eigen::VectorXcd rhs = hc * xi;
        const double xi_scale =
            chain.vectors.front().norm();  // xi^1 is unit, but stay explicit
        const double zero_line = tol * std::max(hnorm, 1.0) * std::max(xi_scale, xi.norm());
        if (rhs.norm() <= zero_line) {
          // The channel no longer feeds the chain; it continues with zero
          // vectors (they drop out of every downstream sum).
          chain.vectors.push_back(Eigen::VectorXcd::Zero(n));
          continue;
        }
        const Eigen::VectorXcd next = pinv_solve(rhs);
        const double resid = (d * next - rhs).norm();
        const double accept = kChainResidualTol * rhs.norm();
        const double ratio = (accept > 0.0) ? resid / accept : 0.0;
        if (ratio > 0.1 && ratio < 10.0) {
          chain.boundary = true;
          if (diag)
            diag->flag(detail::strf(
                "generalized chain step at mu=(%g, %g) decided near the "
                "residual threshold (ratio %.2f)",
                mu.real(), mu.imag(), ratio));
        }
        if (resid > accept) break;  // inconsistent: the chain ends here
        chain.vectors.push_back(next);
      }

      if (chain.length() == cap) {
        // Check whether the cap, not inconsistency, ended the chain.
        const Eigen::VectorXcd rhs = hc * chain.vectors.back();
        if (rhs.norm() <=
            tol * std::max(hnorm, 1.0) * std::max(1.0, chain.vectors.back().norm())) {
          chain.truncated = true;
        } else {
          const Eigen::VectorXcd next = pinv_solve(rhs);
          chain.truncated =
              ((d * next - rhs).norm() <= kChainResidualTol * rhs.norm());
        }
      }
      out.push_back(std::move(chain));
    }
  }
  return out;
}

}  // namespace netdiscern
