#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sgvae/config.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/graph.hpp"
#include "sgvae/model.hpp"
#include "sgvae/param_store.hpp"
#include "sgvae/rng.hpp"
#include "sgvae/tape.hpp"

namespace th {

using namespace sgvae;

inline ParamStore test_params(const ModelDims& dims, std::uint64_t seed) {
  ParamStore ps;
  Rng init(seed);
  init_encoder_params(ps, dims, init);
  init_decoder_params(ps, dims, init);
  return ps;
}

inline ParamStore clone_with(const ParamStore& ps, const std::string& name,
                             std::size_t idx, double delta) {
  ParamStore out;
  for (const auto& [n, t] : ps) {
    ad::Tensor c = t;
    if (n == name) c.data[idx] += delta;
    out.add(n, c);
  }
  return out;
}

struct FdResult {
  double max_rel = 0.0;
  std::string worst_name;
  std::size_t worst_idx = 0;
  double worst_fd = 0.0;
  double worst_ad = 0.0;
};

// Central finite differences of eval over every coordinate of every
// parameter, compared against the analytic gradient map. Caller picks the
// convention; both sides must agree on it. denom_floor caps how small the
// relative-error denominator may get: coordinates below it are effectively
// held to absolute agreement, since central differences carry roundoff noise
// of roughly |f| * 1e-16 / (2 * eps) no matter how small the derivative is.
template <typename F>
FdResult fd_compare(const ParamStore& base, const ad::GradMap& grads, F eval,
                    double eps = 1e-5, double denom_floor = 1e-8) {
  FdResult r;
  for (const auto& [name, t] : base) {
    const ad::Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      double plus = eval(clone_with(base, name, i, eps));
      double minus = eval(clone_with(base, name, i, -eps));
      double fd = (plus - minus) / (2.0 * eps);
      double rel = std::fabs(fd - g.data[i]) / std::max(std::fabs(fd), denom_floor);
      if (rel > r.max_rel) {
        r.max_rel = rel;
        r.worst_name = name;
        r.worst_idx = i;
        r.worst_fd = fd;
        r.worst_ad = g.data[i];
      }
    }
  }
  return r;
}

inline Graph make_path(int n, int node_dim = 5, int edge_dim = 5) {
  Graph g(node_dim, edge_dim);
  for (int i = 0; i < n; ++i) g.add_node(0, ad::Tensor::zeros(ad::Shape{node_dim}));
  for (int i = 0; i + 1 < n; ++i)
    g.add_edge(i, i + 1, 0, ad::Tensor::zeros(ad::Shape{edge_dim}));
  return g;
}

inline Graph make_star(int n, int node_dim = 5, int edge_dim = 5) {
  Graph g(node_dim, edge_dim);
  for (int i = 0; i < n; ++i) g.add_node(0, ad::Tensor::zeros(ad::Shape{node_dim}));
  for (int i = 1; i < n; ++i)
    g.add_edge(0, i, 0, ad::Tensor::zeros(ad::Shape{edge_dim}));
  return g;
}

inline Graph make_complete(int n, int node_dim = 5, int edge_dim = 5) {
  Graph g(node_dim, edge_dim);
  for (int i = 0; i < n; ++i) g.add_node(0, ad::Tensor::zeros(ad::Shape{node_dim}));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.add_edge(i, j, 0, ad::Tensor::zeros(ad::Shape{edge_dim}));
  return g;
}

inline ad::Tensor random_tensor(ad::Shape shape, Rng& rng, double scale = 1.0) {
  ad::Tensor t(shape, 0.0);
  for (auto& v : t.data) v = scale * (2.0 * rng.uniform() - 1.0);
  return t;
}

inline std::vector<std::vector<int>> all_permutations(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
  return out;
}

}  // namespace th
