#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgvae/graph.hpp"

namespace sgvae {

struct DatasetSpec {
  int min_len = 5;
  int max_len = 14;
  int graphs_per_length = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (min_len < 3)
      throw std::invalid_argument("dataset: min_len must be >= 3");
    if (max_len < min_len)
      throw std::invalid_argument("dataset: max_len must be >= min_len");
    if (graphs_per_length < 1)
      throw std::invalid_argument("dataset: graphs_per_length must be >= 1");
  }
};

// Cycle of n nodes: ids 0..n-1 in cycle order, all types 0, zero embeddings
// of the given dimensions.
Graph make_cycle(int n, int node_dim = 5, int edge_dim = 5);

// graphs_per_length cycles per length, lengths ascending.
std::vector<Graph> make_dataset(const DatasetSpec& spec, int node_dim = 5,
                                int edge_dim = 5);

// Writes make_dataset(spec) in the JSON-lines graph format.
void build_dataset(const DatasetSpec& spec, const std::string& path);

}  // namespace sgvae
