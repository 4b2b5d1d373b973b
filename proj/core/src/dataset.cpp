#include "sgvae/dataset.hpp"

#include "sgvae/graph_io.hpp"

namespace sgvae {

Graph make_cycle(int n, int node_dim, int edge_dim) {
  if (n < 3) throw std::invalid_argument("make_cycle: n must be >= 3");
  Graph g(node_dim, edge_dim);
  for (int i = 0; i < n; ++i)
    g.add_node(0, ad::Tensor::zeros(ad::Shape{node_dim}));
  for (int i = 0; i < n; ++i)
    g.add_edge(i, (i + 1) % n, 0, ad::Tensor::zeros(ad::Shape{edge_dim}));
  return g;
}

std::vector<Graph> make_dataset(const DatasetSpec& spec, int node_dim,
                                int edge_dim) {
  spec.validate();
  std::vector<Graph> out;
  out.reserve(static_cast<std::size_t>(spec.max_len - spec.min_len + 1) *
              static_cast<std::size_t>(spec.graphs_per_length));
  for (int len = spec.min_len; len <= spec.max_len; ++len)
    for (int k = 0; k < spec.graphs_per_length; ++k)
      out.push_back(make_cycle(len, node_dim, edge_dim));
  return out;
}

void build_dataset(const DatasetSpec& spec, const std::string& path) {
  write_graph_jsonl(path, make_dataset(spec));
}

}  // namespace sgvae
