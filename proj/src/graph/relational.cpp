#include "act/graph/relational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "act/error.hpp"
#include "act/simd/kernels.hpp"
#include "act/tensor/ops.hpp"

namespace act {

Tensor gcn_normalize(const Adjacency& a) {
  const std::size_t n = a.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(a.degree(i) + (a(i, i) ? 0 : 1)));
  }
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || a(i, j)) out[i * n + j] = inv_sqrt[i] * inv_sqrt[j];
    }
  }
  return Tensor(Shape{n, n}, std::move(out));
}

Tensor gcn_layer(const Tensor& x, const Tensor& a_hat, const Tensor& w, const Tensor& b) {
  return ops::add(ops::matmul(ops::matmul(a_hat, x), w), b);
}

Tensor gcn_layer(const Tensor& x, const Adjacency& a, const Tensor& w, const Tensor& b) {
  return gcn_layer(x, gcn_normalize(a), w, b);
}

Tensor cosine_similarity_matrix(const Tensor& u) {
  if (u.rank() != 2) throw ShapeError("cosine similarity expects [N x d], got " + shape_string(u.shape()));
  const std::size_t n = u.shape()[0];
  const std::size_t d = u.shape()[1];
  const auto& k = simd::kernels();
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) norm[i] = std::sqrt(k.dot(u.data() + i * d, u.data() + i * d, d));
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s[i * n + j] = i == j ? -std::numeric_limits<double>::infinity()
                            : k.dot(u.data() + i * d, u.data() + j * d, d) / (norm[i] * norm[j] + 1e-12);
    }
  }
  return Tensor(Shape{n, n}, std::move(s));
}

DynamicGraph topk_graph(const Tensor& similarity, std::size_t k) {
  if (similarity.rank() != 2 || similarity.shape()[0] != similarity.shape()[1]) {
    throw ShapeError("topk_graph expects a square matrix");
  }
  const std::size_t n = similarity.shape()[0];
  if (k < 1 || k + 1 > n) {
    throw ConfigError("topk_graph: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(n == 0 ? 0 : n - 1) + "]");
  }
  DynamicGraph g;
  g.adjacency = Adjacency(n);
  g.similarity = similarity.detach();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = similarity.data() + i * n;
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
      return row[a] != row[b] ? row[a] > row[b] : a < b;
    });
    for (std::size_t r = 0; r < k; ++r) g.adjacency.set(i, order[r], true);
  }
  return g;
}

Tensor gat_layer(const Tensor& u, const Adjacency& adjacency, const GatParams& p, double slope,
                 Tensor* alpha) {
  const std::size_t n = adjacency.size();
  if (u.rank() != 2 || u.shape()[0] != n) {
    throw ShapeError("gat_layer: features " + shape_string(u.shape()) + " vs graph of " +
                     std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency.degree(i) == 0) throw Error("gat_layer: node " + std::to_string(i) + " has no neighbours");
  }
  const std::size_t d = p.w.dim(-1);
  if (p.a.rank() != 2 || p.a.shape()[0] != 2 * d || p.a.shape()[1] != 1) {
    throw ShapeError("gat_layer: attention vector must be [2d x 1]");
  }
  std::vector<std::size_t> first(d), second(d);
  std::iota(first.begin(), first.end(), 0);
  std::iota(second.begin(), second.end(), d);

  const Tensor wu = ops::matmul(u, p.w);                                  // [N, d]
  const Tensor src = ops::matmul(wu, ops::gather_rows(p.a, first));       // [N, 1]
  const Tensor dst = ops::reshape(ops::matmul(wu, ops::gather_rows(p.a, second)), Shape{1, n});
  const Tensor e = ops::leaky_relu(ops::add(src, dst), slope);           // [N, N]
  const Tensor att = ops::softmax(e, 1, adjacency.cells());
  if (alpha != nullptr) *alpha = att.detach();
  return ops::leaky_relu(ops::matmul(ops::matmul(att, wu), p.w_out), slope);
}

}  // namespace act
