#pragma once

// Shared helpers for the test suite: matrix literals, the four worked
// examples used throughout the tests, an independent observability oracle,
// and a seeded random-instance generator.

#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "netdiscern/model.hpp"
#include "netdiscern/numlin.hpp"

namespace testutil {

inline Eigen::MatrixXd mat(
    std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Ring of four nodes (edge 4->1 removed in the modified topology), scalar
// output of the first state, sensors at nodes 1 and 2.
inline netdiscern::NetworkSpec example1() {
  netdiscern::NetworkSpec s;
  s.A = mat({{1, 1}, {0, 2}});
  s.H = mat({{1, 0}, {0, 0}});
  s.C = mat({{1, 0}});
  s.L = mat({{0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}});
  s.L_bar = mat({{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}});
  s.sensors = {1, 2};
  return s;
}

// Three-node chain losing the edge 3->2; identity coupling and full state
// output, sensors at nodes 1 and 3.
inline netdiscern::NetworkSpec example2() {
  netdiscern::NetworkSpec s;
  s.A = mat({{1, 0}, {1, 1}});
  s.H = mat({{1, 0}, {0, 1}});
  s.C = mat({{1, 0}, {0, 1}});
  s.L = mat({{0, 0, 0}, {1, 0, 1}, {0, 1, 0}});
  s.L_bar = mat({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  s.sensors = {1, 3};
  return s;
}

// Same adjacency change as example2 but rank-one coupling into the second
// state only, sensors at nodes 2 and 3.
inline netdiscern::NetworkSpec example3() {
  netdiscern::NetworkSpec s = example2();
  s.H = mat({{0, 0}, {0, 1}});
  s.sensors = {2, 3};
  return s;
}

// Triangle losing the edge {1,3}; coupling through the second state, scalar
// output of the first, agents 1 and 3 observed.
inline netdiscern::MultiAgentSpec example4() {
  netdiscern::MultiAgentSpec s;
  s.A = mat({{1, 1}, {0, 2}});
  s.B = mat({{0, 0}, {0, 1}});
  s.C = mat({{1, 0}});
  s.num_agents = 3;
  s.edges = {{1, 2, 1.0}, {2, 3, 1.0}, {1, 3, 1.0}};
  s.edges_bar = {{1, 2, 1.0}, {2, 3, 1.0}};
  s.observed = {1, 3};
  return s;
}

// Kalman-rank observability test; independent of the library's PBH route.
inline bool kalman_observable(const Eigen::MatrixXcd& a,
                              const Eigen::MatrixXcd& c,
                              double tol = netdiscern::kDefaultTol) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd obs(c.rows() * n, n);
  Eigen::MatrixXcd block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return netdiscern::numerical_rank(obs, tol) == n;
}

// Random small-integer network instance.  L_bar is resampled until it
// differs from L; entries live in [-2, 2] so the exact spectra stay at desk
// scale.
inline netdiscern::NetworkSpec random_network(std::mt19937& rng) {
  std::uniform_int_distribution<int> entry(-2, 2);
  std::uniform_int_distribution<int> size_n(1, 3);
  std::uniform_int_distribution<int> size_N(2, 4);
  std::uniform_int_distribution<int> adj(0, 1);

  netdiscern::NetworkSpec s;
  const int n = size_n(rng);
  const int N = size_N(rng);
  auto rand_mat = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = entry(rng);
    return m;
  };
  s.A = rand_mat(n, n);
  s.H = rand_mat(n, n);
  std::uniform_int_distribution<int> size_p(1, n);
  const int p = size_p(rng);
  s.C = rand_mat(p, n);
  auto rand_adj = [&]() {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (i != j) l(i, j) = adj(rng);
    return l;
  };
  s.L = rand_adj();
  do {
    s.L_bar = rand_adj();
  } while (s.L_bar == s.L);

  std::uniform_int_distribution<int> pick(0, 1);
  while (s.sensors.empty()) {
    for (int i = 1; i <= N; ++i)
      if (pick(rng)) s.sensors.push_back(i);
  }
  return s;
}

}  // namespace testutil
