#pragma once

#include <span>
#include <vector>

#include "sgvae/graph.hpp"
#include "sgvae/model.hpp"
#include "sgvae/propnet.hpp"
#include "sgvae/rng.hpp"

namespace sgvae {

// Output of one decoding episode. The built graph's node ids are fresh
// (0..n-1 in creation order); under teacher forcing, id k corresponds to
// order[k] in the target. forced_stop marks episodes ended by the node cap
// rather than a sampled (or forced) stop decision, which therefore carry no
// final stop factor in log_p.
struct DecodeResult {
  Graph graph;
  ConstructionOrder order;
  ad::Var log_p;
  std::vector<ad::Var> step_logprobs;
  double log_p_value = 0.0;
  bool forced_stop = false;
};

// Grows a graph from a seed node carrying z. Each iteration: propagate,
// read out h_G, then either stop (Bernoulli on the stop logit; FALSE ends
// the episode) or add a node initialized from h_G and, for every existing
// node in creation order, sample an edge type (last index = no edge).
// Reaching max_nodes stops without a Bernoulli factor.
DecodeResult generate(ad::Tape& tape, ad::Var z,
                      const DecoderParamsRef& params, Rng& rng,
                      int max_nodes);

// Replays generation with every decision forced so the result reproduces
// `target` with nodes created in `order` (a permutation of target's ids).
// log_p is the probability of that exact trajectory. max_nodes mirrors the
// sampling cap: 0 means uncapped (a final stop factor is always charged);
// max_nodes == n replays a capped episode (no final factor, forced_stop
// set); 0 < max_nodes < n is an error since no capped run can reach n.
DecodeResult teacher_force(ad::Tape& tape, ad::Var z, const Graph& target,
                           std::span<const int> order,
                           const DecoderParamsRef& params, int max_nodes = 0);

}  // namespace sgvae
