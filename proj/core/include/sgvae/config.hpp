#pragma once

#include <cstdint>
#include <stdexcept>

namespace sgvae {

// Architecture dimensions shared by the encoder and decoder. Stored in
// checkpoints so a saved model is self-describing.
struct ModelDims {
  int node_dim = 5;       // d, also the latent dimension
  int edge_dim = 5;       // d_e
  int graph_dim = 10;     // d_G, readout output
  int prop_rounds = 2;    // T, distinct parameters per round
  int edge_types = 1;     // E; edge logits have E+1 entries, last = no edge
  int node_types = 1;
  int hidden = 16;        // width of the one-hidden-layer decision networks

  void validate() const {
    if (node_dim <= 0 || edge_dim <= 0 || graph_dim <= 0 || prop_rounds <= 0 ||
        edge_types <= 0 || node_types <= 0 || hidden <= 0)
      throw std::invalid_argument("ModelDims: all dimensions must be positive");
  }
};

struct TrainConfig {
  ModelDims dims;
  double learning_rate = 0.01;
  int batch_size = 10;
  int epochs = 100;
  int samples_per_graph = 1;   // encoder trajectories per graph per step
  int max_nodes = 50;          // generation cap when sampling from the prior
  std::uint64_t seed = 0;
  int eval_interval = 5;       // epochs between accuracy/perplexity rows
  int eval_samples = 100;      // prior draws per accuracy evaluation
  int perplexity_samples = 4;  // encoder samples per graph for perplexity
  int checkpoint_interval = 0; // epochs between checkpoints, 0 = final only
  double grad_clip = 0.0;      // global-norm cap, 0 = off
  int threads = 1;
  bool timings = false;        // write real wall_ms values to metrics

  void validate() const {
    dims.validate();
    if (learning_rate < 0) throw std::invalid_argument("learning_rate < 0");
    if (batch_size <= 0 || epochs <= 0 || samples_per_graph <= 0 ||
        max_nodes <= 0 || eval_samples <= 0 || perplexity_samples <= 0 ||
        threads <= 0)
      throw std::invalid_argument("TrainConfig: counts must be positive");
    if (eval_interval < 0 || checkpoint_interval < 0 || grad_clip < 0)
      throw std::invalid_argument("TrainConfig: intervals must be >= 0");
  }
};

}  // namespace sgvae
