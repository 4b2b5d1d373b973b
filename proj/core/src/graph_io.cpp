#include "sgvae/graph_io.hpp"

#include <fstream>
#include <map>

#include "json.hpp"

namespace sgvae {

namespace {

using ordered_json = nlohmann::ordered_json;

int require_int(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw GraphIoError(std::string("graph json: '") + key +
                       "' missing or not an integer");
  return j[key].get<int>();
}

}  // namespace

std::string graph_to_jsonl_line(const Graph& g, bool with_valid_cycle) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const auto& [id, st] : g.nodes())
    nodes.push_back({{"id", id}, {"type", st.node_type}});
  ordered_json edges = ordered_json::array();
  for (const auto& [key, st] : g.edges())
    edges.push_back(
        {{"u", key.first}, {"v", key.second}, {"type", st.edge_type}});
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  if (with_valid_cycle) j["valid_cycle"] = g.is_valid_cycle();
  return j.dump();
}

Graph graph_from_jsonl_line(const std::string& line, int node_dim,
                            int edge_dim) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw GraphIoError(std::string("graph json: parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array() ||
      !j.contains("edges") || !j["edges"].is_array())
    throw GraphIoError("graph json: expected object with nodes/edges arrays");

  // Re-issue ids ascending so iteration order matches the file's id order.
  std::map<int, int> type_by_id;
  for (const auto& n : j["nodes"]) {
    const int id = require_int(n, "id");
    const int type = require_int(n, "type");
    if (!type_by_id.emplace(id, type).second)
      throw GraphIoError("graph json: duplicate node id " + std::to_string(id));
  }
  Graph g(node_dim, edge_dim);
  std::map<int, int> remap;
  for (const auto& [id, type] : type_by_id)
    remap[id] = g.add_node(type, ad::Tensor::zeros(ad::Shape{node_dim}));

  for (const auto& e : j["edges"]) {
    const int u = require_int(e, "u");
    const int v = require_int(e, "v");
    const int type = require_int(e, "type");
    if (!remap.count(u) || !remap.count(v))
      throw GraphIoError("graph json: edge endpoint not in nodes");
    try {
      g.add_edge(remap[u], remap[v], type,
                 ad::Tensor::zeros(ad::Shape{edge_dim}));
    } catch (const GraphError& err) {
      throw GraphIoError(std::string("graph json: ") + err.what());
    }
  }
  return g;
}

std::vector<Graph> read_graph_jsonl(const std::string& path, int node_dim,
                                    int edge_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphIoError("cannot open '" + path + "'");
  std::vector<Graph> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(graph_from_jsonl_line(line, node_dim, edge_dim));
    } catch (const GraphIoError& e) {
      throw GraphIoError(path + ":" + std::to_string(lineno) + ": " +
                         e.what());
    }
  }
  return out;
}

void write_graph_jsonl(const std::string& path,
                       const std::vector<Graph>& graphs,
                       bool with_valid_cycle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphIoError("cannot open '" + path + "' for writing");
  for (const Graph& g : graphs)
    out << graph_to_jsonl_line(g, with_valid_cycle) << '\n';
  if (!out) throw GraphIoError("write failed for '" + path + "'");
}

}  // namespace sgvae
