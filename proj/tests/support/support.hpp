#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "act/data/panel.hpp"
#include "act/model/params.hpp"
#include "act/tensor/tensor.hpp"
#include "oracles.hpp"

namespace testing_support {

inline act::Tensor random_tensor(act::Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(act::shape_size(shape));
  for (double& x : v) x = nd(rng);
  return act::Tensor(std::move(shape), std::move(v));
}

// Values bounded away from zero, for kinked activations.
inline act::Tensor away_from_zero(act::Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.2, 1.5);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(act::shape_size(shape));
  for (double& x : v) x = sign(rng) ? ud(rng) : -ud(rng);
  return act::Tensor(std::move(shape), std::move(v));
}

inline act::Adjacency random_adjacency(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution on(p);
  act::Adjacency a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (on(rng)) {
        a.set(i, j, true);
        a.set(j, i, true);
      }
  return a;
}

// Block membership: i / size
inline act::Adjacency block_adjacency(std::size_t n, std::size_t size) {
  act::Adjacency a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a.set(i, j, i != j && i / size == j / size);
  return a;
}

inline std::vector<std::uint8_t> cells(const act::Adjacency& a) { return a.cells(); }

inline oracle::Mat to_mat(const act::Tensor& t) {
  if (t.rank() == 1) return oracle::Mat(1, t.size(), std::vector<double>(t.values().begin(), t.values().end()));
  const std::size_t cols = t.shape().back();
  return oracle::Mat(t.size() / cols, cols, std::vector<double>(t.values().begin(), t.values().end()));
}

// [T x N x F] -> T matrices of N x F
inline oracle::Seq to_seq(const act::Tensor& t) {
  const std::size_t steps = t.shape()[0], n = t.shape()[1], f = t.shape()[2];
  oracle::Seq s;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto* p = t.data() + k * n * f;
    s.emplace_back(n, f, std::vector<double>(p, p + n * f));
  }
  return s;
}

inline act::Tensor from_seq(const oracle::Seq& s) {
  std::vector<double> v;
  for (const auto& m : s) v.insert(v.end(), m.v.begin(), m.v.end());
  return act::Tensor(act::Shape{s.size(), s[0].rows, s[0].cols}, std::move(v));
}

inline oracle::Weights to_weights(const act::Params& p) {
  oracle::Weights w;
  for (const auto& name : p.names()) w.entries.emplace_back(name, to_mat(p.at(name)));
  return w;
}

// Replaces zero-initialised biases and unit gains with random values so the
// oracle comparisons exercise every term.
inline act::Params randomized(const act::Params& p, std::mt19937_64& rng, double scale = 0.5) {
  act::Params out;
  std::normal_distribution<double> nd(0.0, scale);
  for (const auto& name : p.names()) {
    act::Tensor t = p.at(name).detach();
    for (double& x : t.mutable_values()) x += nd(rng);
    out.add(name, std::move(t));
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return 1e300;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const act::Tensor& a, const oracle::Mat& b) {
  return max_abs_diff(std::vector<double>(a.values().begin(), a.values().end()), b.v);
}

}  // namespace testing_support
