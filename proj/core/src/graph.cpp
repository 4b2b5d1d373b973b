#include "sgvae/graph.hpp"

#include <algorithm>
#include <set>

namespace sgvae {

int Graph::add_node(int node_type, ad::Tensor embedding) {
  if (embedding.shape != ad::Shape{node_dim_})
    throw GraphError(GraphError::Kind::dimension_mismatch,
                     "add_node: embedding dimension != " +
                         std::to_string(node_dim_));
  const int id = next_id_++;
  nodes_.emplace(id, NodeState{node_type, std::move(embedding)});
  return id;
}

void Graph::add_edge(int u, int v, int edge_type, ad::Tensor embedding) {
  if (u == v)
    throw GraphError(GraphError::Kind::self_loop,
                     "add_edge: self-loop on node " + std::to_string(u));
  if (!has_node(u) || !has_node(v))
    throw GraphError(GraphError::Kind::missing_node,
                     "add_edge: missing endpoint");
  const EdgeKey key = edge_key(u, v);
  if (edges_.count(key))
    throw GraphError(GraphError::Kind::duplicate_edge,
                     "add_edge: edge {" + std::to_string(key.first) + "," +
                         std::to_string(key.second) + "} already present");
  if (embedding.shape != ad::Shape{edge_dim_})
    throw GraphError(GraphError::Kind::dimension_mismatch,
                     "add_edge: embedding dimension != " +
                         std::to_string(edge_dim_));
  edges_.emplace(key, EdgeState{edge_type, std::move(embedding)});
}

void Graph::remove_node(int v) {
  if (!has_node(v))
    throw GraphError(GraphError::Kind::missing_node,
                     "remove_node: no node " + std::to_string(v));
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->first.first == v || it->first.second == v)
      it = edges_.erase(it);
    else
      ++it;
  }
  nodes_.erase(v);
}

NodeState& Graph::node(int id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    throw GraphError(GraphError::Kind::missing_node,
                     "node: no node " + std::to_string(id));
  return it->second;
}

const NodeState& Graph::node(int id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    throw GraphError(GraphError::Kind::missing_node,
                     "node: no node " + std::to_string(id));
  return it->second;
}

EdgeState& Graph::edge(int u, int v) {
  auto it = edges_.find(edge_key(u, v));
  if (it == edges_.end())
    throw GraphError(GraphError::Kind::missing_edge,
                     "edge: no edge {" + std::to_string(u) + "," +
                         std::to_string(v) + "}");
  return it->second;
}

const EdgeState& Graph::edge(int u, int v) const {
  auto it = edges_.find(edge_key(u, v));
  if (it == edges_.end())
    throw GraphError(GraphError::Kind::missing_edge,
                     "edge: no edge {" + std::to_string(u) + "," +
                         std::to_string(v) + "}");
  return it->second;
}

int Graph::degree(int v) const {
  int d = 0;
  for (const auto& [key, _] : edges_)
    if (key.first == v || key.second == v) ++d;
  return d;
}

std::vector<int> Graph::neighbors(int v) const {
  std::vector<int> out;
  for (const auto& [key, _] : edges_) {
    if (key.first == v) out.push_back(key.second);
    if (key.second == v) out.push_back(key.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Graph::node_ids() const {
  std::vector<int> out;
  out.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) out.push_back(id);
  return out;
}

bool Graph::is_valid_cycle() const {
  if (nodes_.size() < 3) return false;
  std::map<int, std::vector<int>> adj;
  for (const auto& [key, _] : edges_) {
    adj[key.first].push_back(key.second);
    adj[key.second].push_back(key.first);
  }
  for (const auto& [id, _] : nodes_) {
    auto it = adj.find(id);
    if (it == adj.end() || it->second.size() != 2) return false;
  }
  // 2-regular, so connected iff one walk covers everything.
  std::set<int> seen;
  std::vector<int> stack{nodes_.begin()->first};
  seen.insert(stack.back());
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (seen.insert(w).second) stack.push_back(w);
  }
  return seen.size() == nodes_.size();
}

void Graph::audit() const {
  for (const auto& [id, st] : nodes_) {
    if (st.embedding.shape != ad::Shape{node_dim_})
      throw std::logic_error("audit: node " + std::to_string(id) +
                             " embedding dimension");
    if (id >= next_id_)
      throw std::logic_error("audit: node id " + std::to_string(id) +
                             " >= next_id");
  }
  for (const auto& [key, st] : edges_) {
    if (key.first >= key.second)
      throw std::logic_error("audit: unnormalized or self-loop edge key");
    if (!nodes_.count(key.first) || !nodes_.count(key.second))
      throw std::logic_error("audit: dangling edge endpoint");
    if (st.embedding.shape != ad::Shape{edge_dim_})
      throw std::logic_error("audit: edge embedding dimension");
  }
}

}  // namespace sgvae
