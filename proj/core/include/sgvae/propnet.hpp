#pragma once

#include <map>
#include <string>

#include "sgvae/graph.hpp"
#include "sgvae/model.hpp"

namespace sgvae {

// Tape-bound embedding state for one episode: the Graph carries structure and
// types, these maps carry the differentiable embeddings.
using NodeVars = std::map<int, ad::Var>;
using EdgeVars = std::map<EdgeKey, ad::Var>;

// T rounds of synchronous message passing. Per round, every edge {u,v} sends
// a message in both directions, m = MLP_t(h_sender (+) h_receiver (+) h_uv);
// each node sums its incoming messages (zero vector if isolated) and updates
// through that round's GRU. All messages in a round read pre-round
// embeddings, and sums run in ascending node id. Edge embeddings are not
// updated. Returns the new node embeddings.
NodeVars propagate_vars(const Graph& g, const NodeVars& h, const EdgeVars& he,
                        const PropParamsRef& params);

// Gated sum over nodes, ascending id: h_G = sum_v sigma(gate(h_v)) *
// transform(h_v). Throws on an empty graph.
ad::Var readout_vars(const Graph& g, const NodeVars& h,
                     const ReadoutParamsRef& params);

// Value-level wrappers over the graph's stored embeddings. `propagate`
// rewrites node embeddings in place; parameters are looked up under
// `prop_prefix` ("phi/prop" or "theta/prop") / `readout_prefix`
// ("theta/readout").
void propagate(Graph& g, const ParamStore& ps, const ModelDims& dims,
               const std::string& prop_prefix);
ad::Tensor readout(const Graph& g, const ParamStore& ps, const ModelDims& dims,
                   const std::string& readout_prefix);

}  // namespace sgvae
