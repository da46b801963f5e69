#pragma once

#include <cstddef>
#include <vector>

#include "act/data/panel.hpp"
#include "act/tensor/tensor.hpp"

namespace act {

// Row i selects its k most similar peers; edges are directed.
struct DynamicGraph {
  Adjacency adjacency;
  Tensor similarity;  // [N x N], diagonal -inf
};

// D^-1/2 (A + I) D^-1/2 with D the degree of A + I. Constant (untracked).
Tensor gcn_normalize(const Adjacency& a);

// Â x W + b; the caller applies the activation.
Tensor gcn_layer(const Tensor& x, const Tensor& a_hat, const Tensor& w, const Tensor& b);
Tensor gcn_layer(const Tensor& x, const Adjacency& a, const Tensor& w, const Tensor& b);

// s_ij = <u_i, u_j> / (|u_i| |u_j| + 1e-12), diagonal -inf. Reads values only;
// graph construction is not differentiated.
Tensor cosine_similarity_matrix(const Tensor& u);

// Per row, the k largest off-diagonal similarities; ties go to the lower
// index. Throws ConfigError unless 1 <= k <= N-1.
DynamicGraph topk_graph(const Tensor& similarity, std::size_t k);

struct GatParams {
  Tensor w;      // [d_in x d]
  Tensor a;      // [2d x 1]
  Tensor w_out;  // [d x d]
};

// e_ij = leaky(a^T [W u_i || W u_j]), alpha = softmax over row i's neighbours,
// out_i = leaky(W_o sum_j alpha_ij W u_j). Throws Error if a row has no
// neighbour. `alpha`, when given, receives the [N x N] attention.
Tensor gat_layer(const Tensor& u, const Adjacency& adjacency, const GatParams& p, double slope,
                 Tensor* alpha = nullptr);

}  // namespace act
