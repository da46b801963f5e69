#include <gtest/gtest.h>

#include <cmath>

#include "act/error.hpp"
#include "act/graph/relational.hpp"
#include "act/tensor/gradcheck.hpp"
#include "act/tensor/ops.hpp"
#include "support.hpp"

using act::Tensor;
using testing_support::random_tensor;

TEST(Gcn, NormalizedPathGraph) {
  // 0-1-2: degrees with self loops 2, 3, 2
  act::Adjacency a(3);
  a.set(0, 1, true);
  a.set(1, 0, true);
  a.set(1, 2, true);
  a.set(2, 1, true);
  const Tensor h = act::gcn_normalize(a);
  EXPECT_NEAR(h.at({0, 0}), 0.5, 1e-15);
  EXPECT_NEAR(h.at({1, 1}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.at({0, 1}), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_EQ(h.at({0, 2}), 0.0);
}

TEST(Gcn, IsolatedNodeKeepsItself) {
  const Tensor h = act::gcn_normalize(act::Adjacency(2));
  EXPECT_EQ(h.at({0, 0}), 1.0);
  EXPECT_EQ(h.at({0, 1}), 0.0);
}

TEST(Gcn, MatchesOracle) {
  std::mt19937_64 rng(1);
  const auto adj = testing_support::random_adjacency(7, 0.4, rng);
  const Tensor x = random_tensor({7, 5}, rng), w = random_tensor({5, 4}, rng), b = random_tensor({4}, rng);
  const Tensor y = act::gcn_layer(x, adj, w, b);
  const auto o = oracle::gcn(testing_support::to_mat(x), adj.cells(), testing_support::to_mat(w),
                            std::vector<double>(b.values().begin(), b.values().end()));
  EXPECT_LT(testing_support::max_abs_diff(y, o), 1e-12);
}

TEST(Cosine, MatchesOracleAndDiagonal) {
  std::mt19937_64 rng(2);
  const Tensor u = random_tensor({6, 4}, rng);
  const Tensor s = act::cosine_similarity_matrix(u);
  const auto o = oracle::cosine(testing_support::to_mat(u));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) {
        EXPECT_TRUE(std::isinf(s.at({i, j})) && s.at({i, j}) < 0);
      } else {
        EXPECT_NEAR(s.at({i, j}), o(i, j), 1e-14);
        EXPECT_LE(std::abs(s.at({i, j})), 1.0 + 1e-12);
      }
    }
}

TEST(TopK, MatchesOracle) {
  std::mt19937_64 rng(3);
  for (std::size_t k = 1; k <= 5; ++k) {
    const Tensor s = act::cosine_similarity_matrix(random_tensor({6, 3}, rng));
    const auto g = act::topk_graph(s, k);
    EXPECT_EQ(g.adjacency.cells(), oracle::topk(testing_support::to_mat(s), k));
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_EQ(g.adjacency.degree(i), k);
      EXPECT_FALSE(g.adjacency(i, i));
    }
  }
}

TEST(TopK, TiesGoToLowerIndex) {
  Tensor s = Tensor::filled({4, 4}, 0.5);
  for (std::size_t i = 0; i < 4; ++i) s.mutable_values()[i * 4 + i] = -INFINITY;
  const auto g = act::topk_graph(s, 2);
  EXPECT_TRUE(g.adjacency(0, 1) && g.adjacency(0, 2));
  EXPECT_TRUE(g.adjacency(3, 0) && g.adjacency(3, 1));
  EXPECT_FALSE(g.adjacency(3, 2));
}

TEST(TopK, RejectsBadK) {
  const Tensor s = act::cosine_similarity_matrix(Tensor::matrix({{1, 0}, {0, 1}, {1, 1}}));
  EXPECT_THROW(act::topk_graph(s, 0), act::ConfigError);
  EXPECT_THROW(act::topk_graph(s, 3), act::ConfigError);
  EXPECT_NO_THROW(act::topk_graph(s, 2));
}

namespace {

act::GatParams random_gat(std::size_t din, std::size_t d, std::mt19937_64& rng) {
  return {random_tensor({din, d}, rng, 0.5), random_tensor({2 * d, 1}, rng, 0.5), random_tensor({d, d}, rng, 0.5)};
}

}  // namespace

TEST(Gat, MatchesOracle) {
  std::mt19937_64 rng(4);
  const Tensor u = random_tensor({6, 5}, rng);
  const auto adj = act::topk_graph(act::cosine_similarity_matrix(u), 3).adjacency;
  const auto p = random_gat(5, 4, rng);
  Tensor alpha;
  const Tensor y = act::gat_layer(u, adj, p, 0.2, &alpha);
  const auto o = oracle::gat(testing_support::to_mat(u), adj.cells(), testing_support::to_mat(p.w),
                             testing_support::to_mat(p.a).v, testing_support::to_mat(p.w_out), 0.2);
  EXPECT_LT(testing_support::max_abs_diff(y, o), 1e-12);
  for (std::size_t i = 0; i < 6; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      if (!adj(i, j)) EXPECT_EQ(alpha.at({i, j}), 0.0);
      row += alpha.at({i, j});
    }
    EXPECT_NEAR(row, 1.0, 1e-14);
  }
}

TEST(Gat, NodeWithoutNeighbourThrows) {
  std::mt19937_64 rng(5);
  act::Adjacency adj(3);
  adj.set(0, 1, true);
  adj.set(1, 0, true);
  EXPECT_THROW(act::gat_layer(random_tensor({3, 2}, rng), adj, random_gat(2, 2, rng), 0.2), act::Error);
}

TEST(Gat, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(6);
  const Tensor u = random_tensor({5, 3}, rng);
  const auto adj = testing_support::block_adjacency(5, 5);
  const auto p = random_gat(3, 3, rng);
  const act::MultiScalarFn f = [&](const std::vector<Tensor>& x) {
    const Tensor y = act::gat_layer(x[0], adj, {x[1], x[2], x[3]}, 0.2);
    return act::ops::sum_all(act::ops::mul(y, y));
  };
  EXPECT_LT(act::finite_difference_check(f, {u, p.w, p.a, p.w_out}, 1e-6), 1e-5);
}
