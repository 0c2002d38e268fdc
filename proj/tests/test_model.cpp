#include "netdiscern/model.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace netdiscern;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using testutil::mat;

TEST_CASE("kron matches the hand-expanded product") {
  MatrixXd a = mat({{1, 2}, {3, 4}});
  MatrixXd b = mat({{0, 1}, {1, 0}});
  MatrixXd expect = mat({{0, 1, 0, 2},  //
                         {1, 0, 2, 0},
                         {0, 3, 0, 4},
                         {3, 0, 4, 0}});
  CHECK(kron(a, b) == expect);

  // Identity (x) A is block-diagonal; A (x) identity interleaves.
  MatrixXd ia = kron(MatrixXd::Identity(2, 2), a);
  CHECK(ia.topLeftCorner(2, 2) == a);
  CHECK(ia.bottomRightCorner(2, 2) == a);
  CHECK(ia.topRightCorner(2, 2).isZero(0.0));

  // Mixed real/complex promotes the scalar type.
  MatrixXcd c = MatrixXcd::Identity(2, 2) * Complex(0.0, 1.0);
  MatrixXcd k = kron(a, c);
  CHECK(k(0, 0) == Complex(0.0, 1.0));
  CHECK(k(2, 2) == Complex(0.0, 4.0));

  // Mixed-product identity (A (x) B)(C (x) D) = AC (x) BD on a random pair.
  MatrixXd c2 = mat({{1, 0}, {2, 1}});
  MatrixXd d2 = mat({{0, 2}, {1, 1}});
  CHECK((kron(a, b) * kron(c2, d2) - kron(MatrixXd(a * c2), MatrixXd(b * d2)))
            .norm() < 1e-12);
}

TEST_CASE("sensor_selector picks unit rows") {
  MatrixXd d = sensor_selector({1, 3}, 4);
  CHECK(d == mat({{1, 0, 0, 0}, {0, 0, 1, 0}}));
  CHECK_THROWS_AS(sensor_selector({0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(sensor_selector({5}, 4), std::invalid_argument);
}

TEST_CASE("network validation accepts the worked examples") {
  CHECK(validate_spec(testutil::example1()).ok());
  CHECK(validate_spec(testutil::example2()).ok());
  CHECK(validate_spec(testutil::example3()).ok());
}

TEST_CASE("network validation rejects malformed input") {
  auto base = testutil::example2;

  NetworkSpec s = base();
  s.A = MatrixXd::Zero(2, 3);
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.H = MatrixXd::Zero(3, 3);
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.C = MatrixXd::Zero(1, 3);
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.L(1, 1) = 1.0;  // nonzero diagonal
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.L_bar = s.L;  // no change to detect
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.sensors = {};
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.sensors = {3, 1};  // not increasing
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.sensors = {1, 4};  // out of range
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.L_bar = MatrixXd::Zero(4, 4);  // size mismatch
  CHECK_FALSE(validate_spec(s).ok());
}

TEST_CASE("assemble builds the stacked operators blockwise") {
  NetworkSpec s = testutil::example1();
  AssembledPair p = assemble(s);
  const Eigen::Index N = s.num_nodes(), n = s.node_dim();
  REQUIRE(p.Phi.rows() == N * n);

  // Diagonal blocks are A (ring has zero diagonal); off-diagonal blocks are
  // L(i,j) * H.
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      MatrixXd expect = (i == j) ? s.A : MatrixXd(s.L(i, j) * s.H);
      CHECK(p.Phi.block(i * n, j * n, n, n) == expect);
      MatrixXd expect_bar = (i == j) ? s.A : MatrixXd(s.L_bar(i, j) * s.H);
      CHECK(p.Phi_bar.block(i * n, j * n, n, n) == expect_bar);
    }

  // Psi stacks C at the sensor nodes.
  REQUIRE(p.Psi.rows() == 2);
  CHECK(p.Psi.block(0, 0, 1, n) == s.C);
  CHECK(p.Psi.block(1, n, 1, n) == s.C);
  CHECK(p.Psi.rightCols(2 * n).isZero(0.0));

  NetworkSpec bad = s;
  bad.sensors = {9};
  CHECK_THROWS_AS(assemble(bad), std::invalid_argument);
}

TEST_CASE("laplacian of the triangle and the broken triangle") {
  MultiAgentSpec s = testutil::example4();
  CHECK(laplacian(s, TopologyVariant::kOriginal) ==
        mat({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}}));
  CHECK(laplacian(s, TopologyVariant::kModified) ==
        mat({{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}}));

  // Weighted edge shows up in both the diagonal and the off-diagonal.
  MultiAgentSpec w = s;
  w.edges = {{1, 2, 2.5}};
  MatrixXd lap = laplacian(w, TopologyVariant::kOriginal);
  CHECK(lap(0, 0) == 2.5);
  CHECK(lap(0, 1) == -2.5);
  CHECK(lap(2, 2) == 0.0);
}

TEST_CASE("assemble_multiagent uses the subtracted coupling") {
  MultiAgentSpec s = testutil::example4();
  AssembledPair p = assemble_multiagent(s);
  const Eigen::Index n = s.node_dim();

  MatrixXd lap = laplacian(s, TopologyVariant::kOriginal);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      MatrixXd expect = -lap(i, j) * s.B;
      if (i == j) expect += s.A;
      CHECK(p.Phi.block(i * n, j * n, n, n) == expect);
    }

  // Off-diagonal coupling enters with a positive sign (minus a negative
  // Laplacian entry).
  CHECK(p.Phi.block(0, n, n, n) == s.B);

  REQUIRE(p.Psi.rows() == 2);
  CHECK(p.Psi.block(0, 0, 1, n) == s.C);
  CHECK(p.Psi.block(1, 2 * n, 1, n) == s.C);
}

TEST_CASE("multiagent validation") {
  CHECK(validate_spec(testutil::example4()).ok());

  auto base = testutil::example4;

  MultiAgentSpec s = base();
  s.edges.push_back({2, 1, 1.0});  // duplicate of {1,2} up to orientation
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.edges[0].weight = -1.0;
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.edges[0] = {2, 2, 1.0};  // self-loop
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.edges[0] = {1, 7, 1.0};  // out of range
  CHECK_FALSE(validate_spec(s).ok());

  s = base();
  s.observed = {};
  CHECK_FALSE(validate_spec(s).ok());

  // Identical edge lists are allowed here: the question "does the output
  // always distinguish the two" is still well-posed (and trivially no).
  s = base();
  s.edges_bar = s.edges;
  CHECK(validate_spec(s).ok());
}
