#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sgvae/graph.hpp"

namespace sgvae {

struct GraphIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One graph per line: {"nodes":[{"id":int,"type":int}],
// "edges":[{"u":int,"v":int,"type":int}]}. Sample files append
// "valid_cycle": bool. Embeddings are model state and never serialized;
// loaded graphs start with zero embeddings. Node ids are written ascending
// and re-issued ascending on load, so files we wrote round-trip exactly.
std::string graph_to_jsonl_line(const Graph& g, bool with_valid_cycle = false);
Graph graph_from_jsonl_line(const std::string& line, int node_dim,
                            int edge_dim);

std::vector<Graph> read_graph_jsonl(const std::string& path, int node_dim,
                                    int edge_dim);
void write_graph_jsonl(const std::string& path,
                       const std::vector<Graph>& graphs,
                       bool with_valid_cycle = false);

}  // namespace sgvae
