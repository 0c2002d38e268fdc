#pragma once

// Dense complex linear algebra underneath the analysis: tolerance-based rank
// decisions, null spaces, subspace arithmetic, clustered eigenstructure, and
// a scaling-and-squaring matrix exponential.
//
// Every rank decision in the library funnels through the threshold
//   sigma > tol * sigma_max * max(rows, cols)
// so one tolerance governs the whole analysis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace netdiscern {

using Complex = std::complex<double>;

inline constexpr double kDefaultTol = 1e-8;

// Consistency threshold for generalized-chain extension residuals.  Looser
// than the rank tolerance on purpose: terminating a chain is a discrete
// decision made from a continuous residual, and the residual of a genuinely
// inconsistent step is orders of magnitude above this line in practice.
inline constexpr double kChainResidualTol = 1e-6;

// Two subspaces are considered equal when their dimensions match and every
// principal angle is below this bound.
inline constexpr double kSubspaceAngleTol = 1e-8;

class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return std::string(buf);
}

}  // namespace detail

// Records rank decisions that landed near the tolerance threshold.  A verdict
// that depends on such a decision is downgraded to "inconclusive" instead of
// being reported as a confident yes/no.
struct ToleranceDiagnostics {
  bool borderline = false;
  std::vector<std::string> notes;

  void note_rank_decision(double sigma, double threshold) {
    if (threshold <= 0.0) return;
    const double ratio = sigma / threshold;
    if (ratio > 0.1 && ratio < 10.0) {
      borderline = true;
      if (notes.size() < 32)
        notes.push_back(detail::strf(
            "rank decision near tolerance: sigma=%.3e vs threshold=%.3e",
            sigma, threshold));
    }
  }

  void flag(const std::string& msg) {
    borderline = true;
    if (notes.size() < 32) notes.push_back(msg);
  }
};

// A subspace of C^ambient_dim held as an orthonormal (complex) basis.
// dim() == 0 encodes the zero subspace.
struct Subspace {
  Eigen::Index ambient_dim = 0;
  Eigen::MatrixXcd basis;  // ambient_dim x k, orthonormal columns
  double tol = kDefaultTol;

  Eigen::Index dim() const { return basis.cols(); }
  bool is_zero() const { return dim() == 0; }
};

inline Subspace zero_subspace(Eigen::Index ambient_dim, double tol) {
  Subspace s;
  s.ambient_dim = ambient_dim;
  s.basis = Eigen::MatrixXcd(ambient_dim, 0);
  s.tol = tol;
  return s;
}

namespace detail {

// Rotates each column so its largest-magnitude entry is real and positive.
// Purely cosmetic, but it makes basis output deterministic and keeps test
// expectations readable.
inline void normalize_phases(Eigen::MatrixXcd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index imax = 0;
    double vmax = 0.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double a = std::abs(basis(i, j));
      if (a > vmax) {
        vmax = a;
        imax = i;
      }
    }
    if (vmax > 0.0) basis.col(j) *= std::conj(basis(imax, j)) / vmax;
  }
}

inline void normalize_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  double vmax = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > vmax) {
      vmax = a;
      imax = i;
    }
  }
  if (vmax > 0.0) v *= std::conj(v(imax)) / vmax;
}

struct RankDecision {
  int rank = 0;
  double threshold = 0.0;
};

// Shared rank rule: count singular values above
// max(tol * sigma_max * max(rows, cols), abs_floor).
inline RankDecision decide_rank(const Eigen::VectorXd& sv, Eigen::Index rows,
                                Eigen::Index cols, double tol, double abs_floor,
                                ToleranceDiagnostics* diag) {
  RankDecision d;
  if (sv.size() == 0) return d;
  const double smax = sv(0);
  if (!(smax > 0.0)) return d;
  d.threshold =
      std::max(tol * smax * static_cast<double>(std::max(rows, cols)), abs_floor);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > d.threshold) ++d.rank;
    if (diag) diag->note_rank_decision(sv(i), d.threshold);
  }
  return d;
}

}  // namespace detail

inline int numerical_rank(const Eigen::MatrixXcd& m, double tol,
                          ToleranceDiagnostics* diag = nullptr) {
  if (tol < 0.0) throw std::invalid_argument("numerical_rank: tol must be >= 0");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return detail::decide_rank(svd.singularValues(), m.rows(), m.cols(), tol, 0.0,
                             diag)
      .rank;
}

// Real-valued expressions route through the complex entry point.  Templated
// on MatrixBase so Eigen expression templates bind here exactly instead of
// being torn between the double and complex implicit conversions.
template <typename Derived,
          std::enable_if_t<
              std::is_same_v<typename Derived::Scalar, double>, int> = 0>
inline int numerical_rank(const Eigen::MatrixBase<Derived>& m, double tol,
                          ToleranceDiagnostics* diag = nullptr) {
  return numerical_rank(Eigen::MatrixXcd(m.template cast<Complex>()), tol,
                        diag);
}

namespace detail {

// Null space with an absolute floor added to the rank threshold.  The floor
// absorbs the known uncertainty of a shifted matrix (mu*I - M) when mu is a
// cluster representative with nonzero radius.
inline Subspace null_space_with_floor(const Eigen::MatrixXcd& m, double tol,
                                      double abs_floor,
                                      ToleranceDiagnostics* diag) {
  const Eigen::Index cols = m.cols();
  Subspace out;
  out.ambient_dim = cols;
  out.tol = tol;
  if (cols == 0) {
    out.basis = Eigen::MatrixXcd(0, 0);
    return out;
  }
  if (m.rows() == 0) {
    out.basis = Eigen::MatrixXcd::Identity(cols, cols);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto d = decide_rank(svd.singularValues(), m.rows(), m.cols(), tol,
                             abs_floor, diag);
  out.basis = svd.matrixV().rightCols(cols - d.rank);
  normalize_phases(out.basis);
  return out;
}

// Column-span analogue of null_space_with_floor.
inline Subspace span_with_floor(Eigen::Index ambient,
                                const Eigen::MatrixXcd& cols, double tol,
                                double abs_floor, ToleranceDiagnostics* diag) {
  Subspace out;
  out.ambient_dim = ambient;
  out.tol = tol;
  if (cols.cols() == 0 || ambient == 0) {
    out.basis = Eigen::MatrixXcd(ambient, 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(cols, Eigen::ComputeThinU);
  const auto d = decide_rank(svd.singularValues(), cols.rows(), cols.cols(),
                             tol, abs_floor, diag);
  out.basis = svd.matrixU().leftCols(d.rank);
  normalize_phases(out.basis);
  return out;
}

// Induced 1-norm, as a cheap scale estimate.
inline double one_norm(const Eigen::MatrixXcd& a) {
  if (a.cols() == 0 || a.rows() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace detail

inline Subspace null_space(const Eigen::MatrixXcd& m, double tol,
                           ToleranceDiagnostics* diag = nullptr) {
  if (tol < 0.0) throw std::invalid_argument("null_space: tol must be >= 0");
  return detail::null_space_with_floor(m, tol, 0.0, diag);
}

template <typename Derived,
          std::enable_if_t<
              std::is_same_v<typename Derived::Scalar, double>, int> = 0>
inline Subspace null_space(const Eigen::MatrixBase<Derived>& m, double tol,
                           ToleranceDiagnostics* diag = nullptr) {
  return null_space(Eigen::MatrixXcd(m.template cast<Complex>()), tol, diag);
}

// Orthonormal basis of the column span of `cols` in C^ambient.
inline Subspace subspace_span(Eigen::Index ambient, const Eigen::MatrixXcd& cols,
                              double tol, ToleranceDiagnostics* diag = nullptr) {
  if (cols.rows() != ambient)
    throw std::invalid_argument("subspace_span: column height mismatch");
  return detail::span_with_floor(ambient, cols, tol, 0.0, diag);
}

// dim(U cap V) follows the rank identity dim U + dim V - rank([U V]); the
// basis is recovered from the principal vectors of U^H V with singular values
// near 1, taking exactly that many so dimension and basis stay consistent.
inline Subspace intersect(const Subspace& u, const Subspace& v,
                          ToleranceDiagnostics* diag = nullptr) {
  if (u.ambient_dim != v.ambient_dim)
    throw std::invalid_argument("intersect: ambient dimensions differ");
  const double tol = std::max(u.tol, v.tol);
  if (u.is_zero() || v.is_zero()) return zero_subspace(u.ambient_dim, tol);

  Eigen::MatrixXcd stacked(u.ambient_dim, u.dim() + v.dim());
  stacked << u.basis, v.basis;
  Eigen::JacobiSVD<Eigen::MatrixXcd> stacked_svd(stacked);
  const auto rk = detail::decide_rank(stacked_svd.singularValues(),
                                      stacked.rows(), stacked.cols(), tol, 0.0,
                                      diag);
  const Eigen::Index d = u.dim() + v.dim() - rk.rank;
  if (d <= 0) return zero_subspace(u.ambient_dim, tol);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u.basis.adjoint() * v.basis,
                                         Eigen::ComputeFullU);
  Subspace out;
  out.ambient_dim = u.ambient_dim;
  out.tol = tol;
  out.basis = u.basis * svd.matrixU().leftCols(d);
  detail::normalize_phases(out.basis);
  return out;
}

inline Subspace sum(const Subspace& u, const Subspace& v,
                    ToleranceDiagnostics* diag = nullptr) {
  if (u.ambient_dim != v.ambient_dim)
    throw std::invalid_argument("sum: ambient dimensions differ");
  const double tol = std::max(u.tol, v.tol);
  Eigen::MatrixXcd stacked(u.ambient_dim, u.dim() + v.dim());
  stacked << u.basis, v.basis;
  return subspace_span(u.ambient_dim, stacked, tol, diag);
}

inline bool is_direct_sum(const Subspace& u, const Subspace& v,
                          ToleranceDiagnostics* diag = nullptr) {
  return intersect(u, v, diag).dim() == 0;
}

// Image of a subspace under a linear map, as a subspace of the codomain.
// The rank cut carries an absolute floor of tol * |m|_1: when the true image
// is zero, the computed product is pure rounding noise, and a threshold
// relative only to the noise's own leading singular value would call it full
// rank.
inline Subspace image(const Eigen::MatrixXcd& m, const Subspace& u, double tol,
                      ToleranceDiagnostics* diag = nullptr) {
  if (m.cols() != u.ambient_dim)
    throw std::invalid_argument("image: map/subspace dimension mismatch");
  if (u.is_zero()) return zero_subspace(m.rows(), tol);
  const double scale = detail::one_norm(m);
  return detail::span_with_floor(m.rows(), m * u.basis, tol, tol * scale,
                                 diag);
}

// Largest principal angle, measured from the smaller space into the larger
// one.  Computed through the projection residual so tiny angles are not lost
// to cancellation in cos(theta).
inline double max_principal_angle(const Subspace& u, const Subspace& v) {
  if (u.ambient_dim != v.ambient_dim)
    throw std::invalid_argument("max_principal_angle: ambient dimensions differ");
  const Subspace& a = (u.dim() <= v.dim()) ? u : v;
  const Subspace& b = (u.dim() <= v.dim()) ? v : u;
  if (a.is_zero()) return 0.0;
  if (b.is_zero()) return std::acos(-1.0) / 2.0;
  Eigen::MatrixXcd resid = a.basis - b.basis * (b.basis.adjoint() * a.basis);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(resid);
  double s = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::asin(s);
}

inline bool subspace_equal(const Subspace& u, const Subspace& v,
                           double angle_tol = kSubspaceAngleTol) {
  if (u.dim() != v.dim()) return false;
  return max_principal_angle(u, v) <= angle_tol;
}

// --- eigenvalue clustering ---------------------------------------------------

struct EigenvalueCluster {
  Complex representative;  // arithmetic mean of the members
  double radius = 0.0;     // max distance of a member from the mean
  std::vector<int> members;
};

// Single-linkage clustering: two values end up in one cluster iff they are
// connected by links of length <= tol * scale, scale = max(1, max |value|).
inline std::vector<EigenvalueCluster> cluster_eigenvalues(
    const std::vector<Complex>& values, double tol) {
  std::vector<EigenvalueCluster> out;
  const int n = static_cast<int>(values.size());
  if (n == 0) return out;

  double scale = 1.0;
  for (const Complex& v : values) scale = std::max(scale, std::abs(v));
  const double link = tol * scale;

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= link) parent[find(i)] = find(j);

  std::vector<int> root_to_cluster(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[root_to_cluster[r]].members.push_back(i);
  }
  for (EigenvalueCluster& c : out) {
    Complex mean = 0.0;
    for (int i : c.members) mean += values[i];
    mean /= static_cast<double>(c.members.size());
    c.representative = mean;
    for (int i : c.members)
      c.radius = std::max(c.radius, std::abs(values[i] - mean));
  }
  std::sort(out.begin(), out.end(),
            [](const EigenvalueCluster& a, const EigenvalueCluster& b) {
              if (a.representative.real() != b.representative.real())
                return a.representative.real() < b.representative.real();
              return a.representative.imag() < b.representative.imag();
            });
  return out;
}

// --- eigenstructure ----------------------------------------------------------

struct EigenspaceEntry {
  Complex value;  // cluster representative
  int geometric_multiplicity = 0;
  Subspace eigenspace;
  int algebraic_multiplicity = 0;  // cluster member count
  double cluster_radius = 0.0;
  // A cluster that looks semisimple (geometric == algebraic) but spreads far
  // beyond honest rounding usually means two distinct eigenvalues were merged;
  // verdicts that touch it should not be trusted.
  bool suspicious = false;
};

struct EigenStructure {
  Eigen::Index matrix_dim = 0;
  std::vector<EigenspaceEntry> eigs;

  bool any_suspicious() const {
    for (const auto& e : eigs)
      if (e.suspicious) return true;
    return false;
  }
};

// Relative link length used when grouping computed eigenvalues.  cbrt(tol)
// absorbs the splitting of a defective eigenvalue under rounding (a Jordan
// block of size m scatters its copies across a ring of radius ~eps^(1/m))
// while staying far below the eigenvalue gaps of desk-scale problems.
inline double eigenvalue_cluster_link(double tol) { return std::cbrt(tol); }

// Eigenvalues from the QR algorithm, grouped by clustering; each eigenspace is
// recomputed as the SVD null space of (mu*I - M) at the cluster mean rather
// than taken from raw solver vectors.
inline EigenStructure eig(const Eigen::MatrixXcd& m, double tol,
                          ToleranceDiagnostics* diag = nullptr) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eig: matrix must be square");
  EigenStructure es;
  es.matrix_dim = m.rows();
  if (m.rows() == 0) return es;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  if (solver.info() != Eigen::Success)
    throw ComputationError("eig: eigensolver failed to converge");

  std::vector<Complex> values(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + m.rows());
  double scale = 1.0;
  for (const Complex& v : values) scale = std::max(scale, std::abs(v));

  const auto clusters = cluster_eigenvalues(values, eigenvalue_cluster_link(tol));
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  for (const auto& c : clusters) {
    EigenspaceEntry entry;
    entry.value = c.representative;
    entry.algebraic_multiplicity = static_cast<int>(c.members.size());
    entry.cluster_radius = c.radius;
    // The floor keeps directions belonging to scattered cluster members from
    // being rejected by the plain relative threshold.
    entry.eigenspace = detail::null_space_with_floor(
        c.representative * id - m, tol, 10.0 * c.radius, diag);
    entry.geometric_multiplicity = static_cast<int>(entry.eigenspace.dim());
    if (entry.geometric_multiplicity == 0)
      throw ComputationError(detail::strf(
          "eig: no eigenvector found at clustered eigenvalue (%g, %g)",
          c.representative.real(), c.representative.imag()));
    entry.suspicious = (entry.geometric_multiplicity ==
                            entry.algebraic_multiplicity &&
                        c.radius > 100.0 * tol * scale);
    if (entry.suspicious && diag)
      diag->flag(detail::strf(
          "eigenvalue cluster at (%g, %g) looks semisimple but spreads %.3e",
          c.representative.real(), c.representative.imag(), c.radius));
    es.eigs.push_back(std::move(entry));
  }
  return es;
}

template <typename Derived,
          std::enable_if_t<
              std::is_same_v<typename Derived::Scalar, double>, int> = 0>
inline EigenStructure eig(const Eigen::MatrixBase<Derived>& m, double tol,
                          ToleranceDiagnostics* diag = nullptr) {
  return eig(Eigen::MatrixXcd(m.template cast<Complex>()), tol, diag);
}

// --- matrix exponential ------------------------------------------------------

namespace detail {

inline double one_norm(const Eigen::MatrixXd& a) {
  if (a.cols() == 0 || a.rows() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace detail

// exp(m*t) by scaling and squaring around a degree-13 Pade approximant.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double t = 1.0) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("expm: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd a = m * t;
  if (!a.allFinite())
    throw std::range_error("expm: non-finite input");

  static const double b[14] = {64764752532480000.0,
                               32382376266240000.0,
                               7771770303897600.0,
                               1187353796428800.0,
                               129060195264000.0,
                               10559470521600.0,
                               670442572800.0,
                               33522128640.0,
                               1323241920.0,
                               40840800.0,
                               960960.0,
                               16380.0,
                               182.0,
                               1.0};
  const double theta13 = 5.371920351148152;

  int s = 0;
  const double nrm = detail::one_norm(a);
  if (nrm > theta13) {
    s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    a /= std::ldexp(1.0, s);
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a2 * a4;
  const Eigen::MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
           b[3] * a2 + b[1] * id);
  const Eigen::MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                            b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Eigen::MatrixXd f = (v - u).fullPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) f = f * f;
  if (!f.allFinite())
    throw std::range_error("expm: result overflowed the double range");
  return f;
}

}  // namespace netdiscern
