#pragma once

// Problem containers and operator assembly for networked LTI systems.
//
// Network form: N identical nodes with state matrix A coupled through a
// directed adjacency L and coupling channel H; the stacked dynamics are
//   Phi = I_N (x) A + L (x) H
// and a row-selection of node outputs gives Psi = Delta (x) C.
//
// Multi-agent form: agents couple through the Laplacian of a weighted
// undirected graph with input matrix B (note the sign),
//   F = I_N (x) A - Lap (x) B,   M = Delta (x) C.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netdiscern/numlin.hpp"

namespace netdiscern {

// Kronecker product, row-major block layout: out.block(i*q, j*r) = a(i,j)*b.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a,
          const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = decltype(typename DerivedA::Scalar{} *
                          typename DerivedB::Scalar{});
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> bc =
      b.template cast<Scalar>();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * bc.rows(), j * bc.cols(), bc.rows(), bc.cols()) =
          Scalar(a(i, j)) * bc;
  return out;
}

// A network instance before and after a topology change.  Counts are derived
// from the stored matrices; sensors are 1-based node indices.
struct NetworkSpec {
  Eigen::MatrixXd A;      // node dynamics, n x n
  Eigen::MatrixXd H;      // coupling channel, n x n
  Eigen::MatrixXd C;      // node output map, p x n
  Eigen::MatrixXd L;      // adjacency before the change, N x N
  Eigen::MatrixXd L_bar;  // adjacency after the change, N x N
  std::vector<int> sensors;

  Eigen::Index num_nodes() const { return L.rows(); }
  Eigen::Index node_dim() const { return A.rows(); }
  Eigen::Index output_dim() const { return C.rows(); }
};

enum class TopologyVariant { kOriginal, kModified };

// Weighted undirected multi-agent instance; the operators use graph
// Laplacians built from the edge lists.
struct MultiAgentSpec {
  Eigen::MatrixXd A;  // agent dynamics, n x n
  Eigen::MatrixXd B;  // coupling input, n x n
  Eigen::MatrixXd C;  // agent output map, p x n

  struct Edge {
    int i = 0;  // 1-based endpoints
    int j = 0;
    double weight = 0.0;
  };
  int num_agents = 0;
  std::vector<Edge> edges;      // before the change
  std::vector<Edge> edges_bar;  // after the change
  std::vector<int> observed;    // 1-based observed agents

  Eigen::Index num_nodes() const { return num_agents; }
  Eigen::Index node_dim() const { return A.rows(); }
  Eigen::Index output_dim() const { return C.rows(); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_square(const Eigen::MatrixXd& m, const char* name,
                         ValidationReport& r) {
  if (m.rows() != m.cols())
    r.violations.push_back(detail::strf("%s must be square (got %ldx%ld)", name,
                                        static_cast<long>(m.rows()),
                                        static_cast<long>(m.cols())));
}

inline void check_sensor_list(const std::vector<int>& sensors,
                              Eigen::Index num_nodes, const char* what,
                              ValidationReport& r) {
  if (sensors.empty())
    r.violations.push_back(detail::strf("%s list must not be empty", what));
  for (size_t k = 0; k < sensors.size(); ++k) {
    if (sensors[k] < 1 || sensors[k] > num_nodes)
      r.violations.push_back(detail::strf("%s index %d out of range 1..%ld",
                                          what, sensors[k],
                                          static_cast<long>(num_nodes)));
    if (k > 0 && sensors[k] <= sensors[k - 1]) {
      r.violations.push_back(
          detail::strf("%s list must be strictly increasing", what));
      break;
    }
  }
}

}  // namespace detail

inline ValidationReport validate_spec(const NetworkSpec& s) {
  ValidationReport r;
  detail::check_square(s.A, "A", r);
  detail::check_square(s.H, "H", r);
  detail::check_square(s.L, "L", r);
  detail::check_square(s.L_bar, "L_bar", r);
  const Eigen::Index n = s.A.rows();
  if (s.H.rows() != n)
    r.violations.push_back("H must have the same size as A");
  if (s.C.cols() != n)
    r.violations.push_back("C must have as many columns as A");
  if (s.C.rows() < 1) r.violations.push_back("C must have at least one row");
  if (s.L.rows() < 2)
    r.violations.push_back("the network needs at least two nodes");
  if (s.L_bar.rows() != s.L.rows())
    r.violations.push_back("L and L_bar must have the same size");
  else {
    if (s.L == s.L_bar)
      r.violations.push_back(
          "L and L_bar are identical; there is no topology change to detect");
  }
  for (Eigen::Index i = 0; i < s.L.rows(); ++i) {
    if (s.L(i, i) != 0.0 ||
        (s.L_bar.rows() == s.L.rows() && s.L_bar(i, i) != 0.0)) {
      r.violations.push_back("adjacency diagonals must be exactly zero");
      break;
    }
  }
  detail::check_sensor_list(s.sensors, s.L.rows(), "sensor", r);
  return r;
}

inline ValidationReport validate_spec(const MultiAgentSpec& s) {
  ValidationReport r;
  detail::check_square(s.A, "A", r);
  detail::check_square(s.B, "B", r);
  const Eigen::Index n = s.A.rows();
  if (s.B.rows() != n)
    r.violations.push_back("B must have the same size as A");
  if (s.C.cols() != n)
    r.violations.push_back("C must have as many columns as A");
  if (s.C.rows() < 1) r.violations.push_back("C must have at least one row");
  if (s.num_agents < 2)
    r.violations.push_back("the network needs at least two agents");

  auto check_edges = [&](const std::vector<MultiAgentSpec::Edge>& edges,
                         const char* what) {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
      if (e.i < 1 || e.i > s.num_agents || e.j < 1 || e.j > s.num_agents)
        r.violations.push_back(
            detail::strf("%s edge (%d, %d) out of range", what, e.i, e.j));
      else if (e.i == e.j)
        r.violations.push_back(
            detail::strf("%s edge (%d, %d) is a self-loop", what, e.i, e.j));
      if (!(e.weight > 0.0))
        r.violations.push_back(detail::strf(
            "%s edge (%d, %d) must have positive weight", what, e.i, e.j));
      auto key = std::minmax(e.i, e.j);
      if (!seen.insert({key.first, key.second}).second)
        r.violations.push_back(
            detail::strf("%s edge (%d, %d) listed twice", what, e.i, e.j));
    }
  };
  check_edges(s.edges, "original");
  check_edges(s.edges_bar, "modified");
  detail::check_sensor_list(s.observed, s.num_agents, "observed", r);
  return r;
}

// Delta: one row e_i^T per sensor node (1-based input), stacked in order.
inline Eigen::MatrixXd sensor_selector(const std::vector<int>& sensors,
                                       Eigen::Index num_nodes) {
  Eigen::MatrixXd delta =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sensors.size()), num_nodes);
  for (size_t k = 0; k < sensors.size(); ++k) {
    if (sensors[k] < 1 || sensors[k] > num_nodes)
      throw std::invalid_argument("sensor_selector: node index out of range");
    delta(static_cast<Eigen::Index>(k), sensors[k] - 1) = 1.0;
  }
  return delta;
}

struct AssembledPair {
  Eigen::MatrixXd Phi;      // I (x) A + L (x) H
  Eigen::MatrixXd Phi_bar;  // I (x) A + L_bar (x) H
  Eigen::MatrixXd Psi;      // Delta (x) C
};

inline AssembledPair assemble(const NetworkSpec& s) {
  ValidationReport r = validate_spec(s);
  if (!r.ok()) throw std::invalid_argument("assemble: " + r.violations.front());
  const Eigen::Index N = s.num_nodes();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
  AssembledPair out;
  out.Phi = kron(id, s.A) + kron(s.L, s.H);
  out.Phi_bar = kron(id, s.A) + kron(s.L_bar, s.H);
  out.Psi = kron(sensor_selector(s.sensors, N), s.C);
  return out;
}

// Symmetric graph Laplacian of the chosen edge list: l_ii = sum of incident
// weights, l_ij = -w_ij.
inline Eigen::MatrixXd laplacian(const MultiAgentSpec& s, TopologyVariant v) {
  const auto& edges =
      (v == TopologyVariant::kOriginal) ? s.edges : s.edges_bar;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(s.num_agents, s.num_agents);
  for (const auto& e : edges) {
    if (e.i < 1 || e.i > s.num_agents || e.j < 1 || e.j > s.num_agents ||
        e.i == e.j)
      throw std::invalid_argument("laplacian: invalid edge");
    lap(e.i - 1, e.j - 1) -= e.weight;
    lap(e.j - 1, e.i - 1) -= e.weight;
    lap(e.i - 1, e.i - 1) += e.weight;
    lap(e.j - 1, e.j - 1) += e.weight;
  }
  return lap;
}

// F = I (x) A - Lap (x) B for both topologies, M = Delta (x) C.
inline AssembledPair assemble_multiagent(const MultiAgentSpec& s) {
  ValidationReport r = validate_spec(s);
  if (!r.ok())
    throw std::invalid_argument("assemble_multiagent: " + r.violations.front());
  const Eigen::Index N = s.num_nodes();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
  AssembledPair out;
  out.Phi = kron(id, s.A) - kron(laplacian(s, TopologyVariant::kOriginal), s.B);
  out.Phi_bar =
      kron(id, s.A) - kron(laplacian(s, TopologyVariant::kModified), s.B);
  out.Psi = kron(sensor_selector(s.observed, N), s.C);
  return out;
}

}  // namespace netdiscern
