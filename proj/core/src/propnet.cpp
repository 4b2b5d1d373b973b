#include "sgvae/propnet.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace sgvae {

namespace {

ad::Tape& tape_of(const NodeVars& h) {
  if (h.empty() || !h.begin()->second.valid())
    throw std::invalid_argument("propnet: no embeddings");
  return *h.begin()->second.tape;
}

// Adds a multiset of same-shape terms in an order fixed by their values, not
// by node ids. Float addition is not associative, so summing in id order
// would make results drift under relabeling; value order keeps propagation
// equivariant and readout invariant down to the last bit.
ad::Var fold_sum(ad::Tape& tape, std::vector<ad::Var> terms) {
  std::stable_sort(terms.begin(), terms.end(), [&](ad::Var x, ad::Var y) {
    const auto& xv = tape.value(x).data;
    const auto& yv = tape.value(y).data;
    return std::lexicographical_compare(xv.begin(), xv.end(), yv.begin(),
                                        yv.end());
  });
  ad::Var out;
  for (ad::Var t : terms) out = out.valid() ? ad::add(out, t) : t;
  return out;
}

ad::Var message(const MlpRef& mlp, ad::Var h_sender, ad::Var h_receiver,
                ad::Var h_edge) {
  const ad::Var parts[3] = {h_sender, h_receiver, h_edge};
  return mlp_apply(mlp, ad::concat(parts));
}

}  // namespace

NodeVars propagate_vars(const Graph& g, const NodeVars& h, const EdgeVars& he,
                        const PropParamsRef& params) {
  if (g.nodes().empty()) return {};
  if (h.size() != g.node_count())
    throw std::invalid_argument("propagate: embedding map does not match graph");
  for (const auto& [key, _] : g.edges())
    if (!he.count(key))
      throw std::invalid_argument("propagate: missing edge embedding");

  ad::Tape& tape = tape_of(h);
  const ad::Var zero_in =
      tape.constant(ad::Tensor::zeros(ad::Shape{g.node_dim()}));

  NodeVars cur = h;
  for (const auto& round : params.rounds) {
    NodeVars next;
    for (const auto& [v, hv] : cur) {
      std::vector<ad::Var> incoming;
      for (int u : g.neighbors(v))
        incoming.push_back(
            message(round.message, cur.at(u), hv, he.at(edge_key(u, v))));
      ad::Var a = fold_sum(tape, std::move(incoming));
      if (!a.valid()) a = zero_in;
      next[v] = ad::gru_cell(hv, a, round.gru);
    }
    cur = std::move(next);
  }
  return cur;
}

ad::Var readout_vars(const Graph& g, const NodeVars& h,
                     const ReadoutParamsRef& params) {
  if (g.nodes().empty())
    throw std::invalid_argument("readout: empty graph");
  if (h.size() != g.node_count())
    throw std::invalid_argument("readout: embedding map does not match graph");
  std::vector<ad::Var> gated;
  for (const auto& [v, hv] : h) {
    (void)v;
    gated.push_back(ad::smul(ad::sigmoid(affine_apply(params.gate, hv)),
                             affine_apply(params.transform, hv)));
  }
  return fold_sum(tape_of(h), std::move(gated));
}

void propagate(Graph& g, const ParamStore& ps, const ModelDims& dims,
               const std::string& prop_prefix) {
  if (g.nodes().empty()) return;
  ad::Tape tape;
  PropParamsRef params = bind_prop(tape, ps, dims, prop_prefix);
  NodeVars h;
  for (const auto& [v, st] : g.nodes()) h[v] = tape.constant(st.embedding);
  EdgeVars he;
  for (const auto& [key, st] : g.edges()) he[key] = tape.constant(st.embedding);
  NodeVars out = propagate_vars(g, h, he, params);
  for (auto& [v, var] : out) g.node(v).embedding = tape.value(var);
}

ad::Tensor readout(const Graph& g, const ParamStore& ps,
                   const ModelDims& /*dims*/,
                   const std::string& readout_prefix) {
  ad::Tape tape;
  ReadoutParamsRef params{
      {tape.param(readout_prefix + "/gate/W", ps.at(readout_prefix + "/gate/W")),
       tape.param(readout_prefix + "/gate/b", ps.at(readout_prefix + "/gate/b"))},
      {tape.param(readout_prefix + "/transform/W",
                  ps.at(readout_prefix + "/transform/W")),
       tape.param(readout_prefix + "/transform/b",
                  ps.at(readout_prefix + "/transform/b"))}};
  NodeVars h;
  for (const auto& [v, st] : g.nodes()) h[v] = tape.constant(st.embedding);
  ad::Var out = readout_vars(g, h, params);
  return tape.value(out);
}

}  // namespace sgvae
