#pragma once

#include <span>
#include <vector>

#include "sgvae/graph.hpp"
#include "sgvae/model.hpp"
#include "sgvae/propnet.hpp"
#include "sgvae/rng.hpp"

namespace sgvae {

// Output of one encoding episode. `order` is the construction order: the
// full removal sequence reversed, so the survivor comes first. Var fields
// stay differentiable on the episode's tape; the plain-value copies are for
// callers that only need numbers.
struct EncodeResult {
  ad::Var z;                        // survivor embedding, Tensor[d]
  ad::Var log_q;                    // sum of removal log-probs (0 for n = 1)
  std::vector<ad::Var> step_logprobs;
  ConstructionOrder order;
  std::vector<int> removal_order;   // as removed, survivor last
  ad::Tensor z_value;
  double log_q_value = 0.0;
};

// One stochastic encoding pass (graph destruction): embed types, then while
// more than one node remains, propagate, score each remaining node with the
// removal network, sample one from the softmax, and remove it. The caller's
// graph is copied, never modified. z is the last survivor's embedding as it
// stands when the loop ends (for a 1-node graph: its type embedding,
// unpropagated).
EncodeResult encode_sample(ad::Tape& tape, const Graph& x,
                           const EncoderParamsRef& params, Rng& rng);

// Same computation with every removal forced. `removal_order` must be a
// permutation of x's node ids; the last entry survives and is never scored.
// log_q is the probability the sampler would have assigned this exact
// sequence.
EncodeResult encode_given_order(ad::Tape& tape, const Graph& x,
                                const EncoderParamsRef& params,
                                std::span<const int> removal_order);

}  // namespace sgvae
