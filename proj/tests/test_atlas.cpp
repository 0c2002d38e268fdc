#include "netdiscern/atlas.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "test_util.hpp"

using namespace netdiscern;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using testutil::mat;

namespace {

VectorXcd unit(int n, int i) {
  VectorXcd v = VectorXcd::Zero(n);
  v(i) = 1.0;
  return v;
}

const Atlas::MuGroup& group_at(const Atlas& atlas, Complex mu) {
  for (const auto& g : atlas.mu_groups)
    if (std::abs(g.mu - mu) < 1e-6) return g;
  FAIL("no atlas group at the requested eigenvalue");
  return atlas.mu_groups.front();  // unreachable
}

}  // namespace

TEST_CASE("atlas of the broken ring captures the defective eigenvalue") {
  // L_bar is a 4-step nilpotent shift; A = [[1,1],[0,2]], H = [[1,0],[0,0]].
  // The stacked operator has spectrum {1, 2} with geometric multiplicities
  // 1 and 4 -- the mu = 2 chain keeps extending and must be allowed to reach
  // length 4 even though the node dimension is only 2.
  NetworkSpec s = testutil::example1();
  Atlas atlas = build_atlas(s.L_bar, s.A, s.H, kDefaultTol);
  CHECK(atlas.ambient_dim == 8);

  const auto& g1 = group_at(atlas, Complex(1.0));
  CHECK(g1.tau == 1);
  CHECK(g1.span.dim() == 1);
  // S(1 | Phi_bar) = span{e4 (x) e1}: only the last node, first state.
  CHECK(subspace_equal(g1.span,
                       subspace_span(8, kron(unit(4, 3), unit(2, 0)), kDefaultTol)));

  const auto& g2 = group_at(atlas, Complex(2.0));
  CHECK(g2.tau == 4);
  CHECK(g2.span.dim() == 4);
  CHECK_FALSE(g2.degenerate);

  AssembledPair p = assemble(s);
  AtlasAgreement agree = validate_atlas(atlas, p.Phi_bar, kDefaultTol);
  CHECK(agree.agrees);
  if (!agree.agrees)
    for (const auto& issue : agree.issues) UNSCOPED_INFO(issue);
}

TEST_CASE("atlas of the intact ring") {
  NetworkSpec s = testutil::example1();
  Atlas atlas = build_atlas(s.L, s.A, s.H, kDefaultTol);

  // sigma(Phi) = {0, 1+i, 1-i, 2}; mu = 2 collects one eta from each of the
  // four simple ring eigenvalues.
  REQUIRE(atlas.mu_groups.size() == 4);
  CHECK(group_at(atlas, Complex(2.0)).tau == 4);
  CHECK(group_at(atlas, Complex(0.0)).tau == 1);
  CHECK(group_at(atlas, Complex(1.0, 1.0)).tau == 1);
  CHECK(group_at(atlas, Complex(1.0, -1.0)).tau == 1);

  AssembledPair p = assemble(s);
  CHECK(validate_atlas(atlas, p.Phi, kDefaultTol).agrees);
}

TEST_CASE("atlas with identity coupling: chain length is min(alpha, theta)") {
  NetworkSpec s = testutil::example2();

  // Original topology: L has three simple eigenvalues {0, 1, -1}, so every
  // alpha is 1 and each mu gets tau = 1.
  Atlas orig = build_atlas(s.L, s.A, s.H, kDefaultTol);
  REQUIRE(orig.mu_groups.size() == 3);
  CHECK(group_at(orig, Complex(0.0)).tau == 1);
  CHECK(group_at(orig, Complex(1.0)).tau == 1);
  CHECK(group_at(orig, Complex(2.0)).tau == 1);

  // Modified topology: a full-length nilpotent chain (alpha = 3) pairs with
  // the generalized chain xi^1 = e2, xi^2 = -e1 that goes inconsistent at the
  // third step (theta = 2), so tau(1) = min(3, 2) = 2 and
  // S(1 | Phi_bar) = span{e3 (x) e2, e2 (x) e2 - e3 (x) e1}.
  Atlas mod = build_atlas(s.L_bar, s.A, s.H, kDefaultTol);
  REQUIRE(mod.mu_groups.size() == 1);
  const auto& g = group_at(mod, Complex(1.0));
  CHECK(g.tau == 2);
  REQUIRE(g.entry_indices.size() == 1);
  const AtlasEntry& e = mod.entries[g.entry_indices[0]];
  CHECK(e.alpha == 3);
  CHECK(e.theta == 2);
  CHECK(e.gamma == 2);
  CHECK_FALSE(e.truncated);

  MatrixXcd expect(6, 2);
  expect.col(0) = kron(unit(3, 2), unit(2, 1)).col(0);
  expect.col(1) = kron(unit(3, 1), unit(2, 1)).col(0) -
                  kron(unit(3, 2), unit(2, 0)).col(0);
  CHECK(subspace_equal(g.span, subspace_span(6, expect, kDefaultTol)));

  AssembledPair p = assemble(s);
  CHECK(validate_atlas(orig, p.Phi, kDefaultTol).agrees);
  CHECK(validate_atlas(mod, p.Phi_bar, kDefaultTol).agrees);
}

TEST_CASE("atlas continues through a vanished right-hand side") {
  // Rank-one coupling H = [[0,0],[0,1]]: the generalized chain at mu = 1 is
  // e2, -e1, 0 (H annihilates the second vector), and the zero vector still
  // contributes eta^3 = e1 (x) e2 - e2 (x) e1.
  NetworkSpec s = testutil::example3();
  Atlas mod = build_atlas(s.L_bar, s.A, s.H, kDefaultTol);
  REQUIRE(mod.mu_groups.size() == 1);
  const auto& g = group_at(mod, Complex(1.0));
  CHECK(g.tau == 3);
  CHECK(g.span.dim() == 3);
  REQUIRE(g.entry_indices.size() == 1);
  const AtlasEntry& e = mod.entries[g.entry_indices[0]];
  CHECK(e.gamma == 3);

  VectorXcd eta3 =
      kron(unit(3, 0), unit(2, 1)).col(0) - kron(unit(3, 1), unit(2, 0)).col(0);
  // eta^3 is the third constructed column, up to scale.
  VectorXcd got = e.eta.col(2);
  CHECK((got / got.norm() - eta3 / eta3.norm()).norm() < 1e-7);

  AssembledPair p = assemble(s);
  CHECK(validate_atlas(mod, p.Phi_bar, kDefaultTol).agrees);

  // Original topology for contrast: S(1 | Phi) is three-dimensional too, but
  // spanned differently; the atlas must agree with the direct eigensolve.
  Atlas orig = build_atlas(s.L, s.A, s.H, kDefaultTol);
  CHECK(group_at(orig, Complex(1.0)).span.dim() == 3);
  CHECK(validate_atlas(orig, p.Phi, kDefaultTol).agrees);
}

TEST_CASE("atlas works with the subtracted multi-agent coupling") {
  // F = I (x) A - Lap (x) B is the same construction with H = -B.
  MultiAgentSpec s = testutil::example4();
  MatrixXd lap = laplacian(s, TopologyVariant::kOriginal);
  MatrixXd lap_bar = laplacian(s, TopologyVariant::kModified);
  MatrixXd minus_b = -s.B;

  Atlas orig = build_atlas(lap, s.A, minus_b, kDefaultTol);
  Atlas mod = build_atlas(lap_bar, s.A, minus_b, kDefaultTol);

  // S(1 | F) and S(1 | F_bar) both equal C^3 (x) e1.
  MatrixXcd expect(6, 3);
  for (int i = 0; i < 3; ++i)
    expect.col(i) = kron(unit(3, i), unit(2, 0)).col(0);
  Subspace full_first_state = subspace_span(6, expect, kDefaultTol);
  CHECK(subspace_equal(group_at(orig, Complex(1.0)).span, full_first_state));
  CHECK(subspace_equal(group_at(mod, Complex(1.0)).span, full_first_state));

  // The modified graph makes mu = 1 defective: algebraic 4, geometric 3.
  CHECK(group_at(mod, Complex(1.0)).tau == 3);

  AssembledPair p = assemble_multiagent(s);
  CHECK(validate_atlas(orig, p.Phi, kDefaultTol).agrees);
  CHECK(validate_atlas(mod, p.Phi_bar, kDefaultTol).agrees);
}

TEST_CASE("atlas_eigenspace misses cleanly") {
  NetworkSpec s = testutil::example2();
  Atlas atlas = build_atlas(s.L, s.A, s.H, kDefaultTol);
  CHECK(atlas_eigenspace(atlas, Complex(7.0)).dim() == 0);
  CHECK(atlas_eigenspace(atlas, Complex(1.0)).dim() == 1);
}

TEST_CASE("validate_atlas flags corruption and wrong operators") {
  NetworkSpec s = testutil::example2();
  AssembledPair p = assemble(s);
  Atlas atlas = build_atlas(s.L, s.A, s.H, kDefaultTol);
  REQUIRE(validate_atlas(atlas, p.Phi, kDefaultTol).agrees);

  // Validating against the other topology's operator must fail.
  CHECK_FALSE(validate_atlas(atlas, p.Phi_bar, kDefaultTol).agrees);

  // Corrupting one eta makes the eigenvector residual test fire.
  Atlas broken = atlas;
  broken.entries[0].eta.col(0) = Eigen::VectorXcd::Ones(6);
  AtlasAgreement agree = validate_atlas(broken, p.Phi, kDefaultTol);
  CHECK_FALSE(agree.agrees);
  CHECK_FALSE(agree.issues.empty());
}

TEST_CASE("atlas agrees with the direct eigensolve on random instances") {
  std::mt19937 rng(20240816);
  std::uniform_int_distribution<int> entry(-2, 2);
  int checked = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const int N = 2 + trial % 3;
    const int n = 1 + trial % 2;
    auto rand_mat = [&](int r, int c) {
      MatrixXd m(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = entry(rng);
      return m;
    };
    // Symmetric L keeps the outer factor diagonalizable.
    MatrixXd w = rand_mat(N, N);
    MatrixXd l = w + w.transpose();
    MatrixXd a = rand_mat(n, n);
    MatrixXd h = rand_mat(n, n);
    MatrixXd phi = kron(MatrixXd::Identity(N, N), a) + kron(l, h);
    Atlas atlas = build_atlas(l, a, h, kDefaultTol);
    AtlasAgreement agree = validate_atlas(atlas, phi, kDefaultTol);
    for (const auto& issue : agree.issues) UNSCOPED_INFO(issue);
    CHECK(agree.agrees);
    ++checked;
  }
  CHECK(checked == 12);
}
