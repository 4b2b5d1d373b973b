#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgvae/tensor.hpp"

namespace sgvae {

struct GraphError : std::invalid_argument {
  enum class Kind {
    dimension_mismatch,
    self_loop,
    duplicate_edge,
    missing_node,
    missing_edge,
  };
  GraphError(Kind k, const std::string& msg)
      : std::invalid_argument(msg), kind(k) {}
  Kind kind;
};

struct NodeState {
  int node_type = 0;
  ad::Tensor embedding;
};

struct EdgeState {
  int edge_type = 0;
  ad::Tensor embedding;
};

// Unordered node pair, normalized so first < second.
using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int u, int v) {
  return u < v ? EdgeKey{u, v} : EdgeKey{v, u};
}

// Construction order pi: node ids in the order the decoder adds them. The
// encoder's removal order reversed gives the same thing.
using ConstructionOrder = std::vector<int>;

// Undirected graph with typed, embedded nodes and edges. No self-loops, no
// parallel edges. Ids are never reused within one graph's lifetime, and all
// iteration is in ascending id / ascending pair order so loops over the graph
// consume randomness and accumulate sums deterministically.
class Graph {
 public:
  Graph(int node_dim, int edge_dim) : node_dim_(node_dim), edge_dim_(edge_dim) {
    if (node_dim <= 0 || edge_dim <= 0)
      throw std::invalid_argument("Graph: dims must be positive");
  }

  int add_node(int node_type, ad::Tensor embedding);
  void add_edge(int u, int v, int edge_type, ad::Tensor embedding);
  void remove_node(int v);

  bool has_node(int id) const { return nodes_.count(id) > 0; }
  bool has_edge(int u, int v) const { return edges_.count(edge_key(u, v)) > 0; }

  NodeState& node(int id);
  const NodeState& node(int id) const;
  EdgeState& edge(int u, int v);
  const EdgeState& edge(int u, int v) const;

  int degree(int v) const;
  std::vector<int> neighbors(int v) const;  // ascending
  std::vector<int> node_ids() const;        // ascending

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const std::map<int, NodeState>& nodes() const { return nodes_; }
  const std::map<EdgeKey, EdgeState>& edges() const { return edges_; }

  int node_dim() const { return node_dim_; }
  int edge_dim() const { return edge_dim_; }
  int next_id() const { return next_id_; }

  // True iff the graph is a single cycle: >= 3 nodes, every degree exactly 2,
  // connected. Length is deliberately unrestricted.
  bool is_valid_cycle() const;

  // Internal-consistency check used by tests: throws std::logic_error if any
  // invariant is broken (dangling endpoint, unnormalized key, self-loop,
  // wrong embedding dimension, stale next_id).
  void audit() const;

 private:
  int node_dim_;
  int edge_dim_;
  int next_id_ = 0;
  std::map<int, NodeState> nodes_;
  std::map<EdgeKey, EdgeState> edges_;
};

}  // namespace sgvae
