#include "sgvae/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgvae {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Episode {
  ad::Tape& tape;
  const DecoderParamsRef& params;
  int node_dim;
  int edge_dim;
  int edge_types;
  Graph graph;
  NodeVars h;
  EdgeVars he;
  ConstructionOrder order;
  std::vector<ad::Var> logprobs;

  Episode(ad::Tape& tape_, ad::Var z, const DecoderParamsRef& params_)
      : tape(tape_),
        params(params_),
        node_dim(tape_.value(params_.node_init.W).shape.d0),
        edge_dim(tape_.value(params_.edge_embed.W).shape.d0),
        edge_types(tape_.value(params_.edge_embed.W).shape.d1),
        graph(node_dim, edge_dim) {
    const int seed = graph.add_node(0, tape.value(z));
    h[seed] = z;
    order.push_back(seed);
  }

  ad::Var step_readout() {
    h = propagate_vars(graph, h, he, params.prop);
    return readout_vars(graph, h, params.readout);
  }

  ad::Var stop_logit(ad::Var h_g) { return mlp_apply(params.stop, h_g); }

  // Adds the next node and charges the continue factor; returns its id.
  int add_node(ad::Var h_g, ad::Var logit) {
    logprobs.push_back(ad::pick(ad::log_sigmoid(logit), 0));
    ad::Var hv = affine_apply(params.node_init, h_g);
    const int v = graph.add_node(0, tape.value(hv));
    h[v] = hv;
    order.push_back(v);
    return v;
  }

  void finish_stop(ad::Var logit) {
    logprobs.push_back(ad::pick(ad::log_sigmoid(ad::scale(logit, -1.0)), 0));
  }

  // Edge-type log-probs for the pair (existing u, new v).
  ad::Var edge_log_probs(int u, int v, ad::Var h_g) {
    const ad::Var parts[3] = {h.at(u), h.at(v), h_g};
    return ad::log_softmax(mlp_apply(params.edge_logits, ad::concat(parts)));
  }

  // Charges the chosen type's factor and materializes the edge unless it is
  // the no-edge index.
  void apply_edge(int u, int v, ad::Var log_probs, int type) {
    logprobs.push_back(ad::pick(log_probs, type));
    if (type == edge_types) return;
    ad::Var emb = affine_apply(params.edge_embed,
                               tape.constant(one_hot(type, edge_types)));
    graph.add_edge(u, v, type, tape.value(emb));
    he[edge_key(u, v)] = emb;
  }

  DecodeResult finish(bool forced) {
    DecodeResult out{std::move(graph), std::move(order), {}, {}, 0.0, forced};
    out.log_p = tape.constant_scalar(0.0);
    for (const ad::Var& lp : logprobs) out.log_p = ad::add(out.log_p, lp);
    out.step_logprobs = std::move(logprobs);
    out.log_p_value = tape.scalar_value(out.log_p);
    for (auto& [v, var] : h) out.graph.node(v).embedding = tape.value(var);
    return out;
  }
};

}  // namespace

DecodeResult generate(ad::Tape& tape, ad::Var z,
                      const DecoderParamsRef& params, Rng& rng,
                      int max_nodes) {
  if (max_nodes < 1) throw std::invalid_argument("generate: max_nodes < 1");
  Episode ep(tape, z, params);
  for (;;) {
    ad::Var h_g = ep.step_readout();
    if (static_cast<int>(ep.graph.node_count()) == max_nodes)
      return ep.finish(true);

    ad::Var logit = ep.stop_logit(h_g);
    const double p_continue = stable_sigmoid(tape.scalar_value(logit));
    if (!rng.bernoulli(p_continue)) {
      ep.finish_stop(logit);
      return ep.finish(false);
    }

    const ConstructionOrder prior(ep.order);
    const int v = ep.add_node(h_g, logit);
    for (int u : prior) {
      ad::Var lp = ep.edge_log_probs(u, v, h_g);
      const ad::Tensor& t = tape.value(lp);
      std::vector<double> probs(t.data.size());
      for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(t[i]);
      ep.apply_edge(u, v, lp, rng.categorical(probs));
    }
  }
}

DecodeResult teacher_force(ad::Tape& tape, ad::Var z, const Graph& target,
                           std::span<const int> order,
                           const DecoderParamsRef& params, int max_nodes) {
  const std::size_t n = target.node_count();
  if (n == 0) throw std::invalid_argument("teacher_force: empty target");
  {
    std::vector<int> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != target.node_ids())
      throw std::invalid_argument(
          "teacher_force: order is not a permutation of the target");
  }
  if (max_nodes != 0 && static_cast<std::size_t>(max_nodes) < n)
    throw std::invalid_argument(
        "teacher_force: target larger than the node cap");

  Episode ep(tape, z, params);
  for (std::size_t t = 1; t < n; ++t) {
    ad::Var h_g = ep.step_readout();
    const int v = ep.add_node(h_g, ep.stop_logit(h_g));
    // Built id i corresponds to target node order[i]; the new node v is
    // order[t] and ids are sequential, so prior nodes are 0..v-1.
    for (int i = 0; i < v; ++i) {
      ad::Var lp = ep.edge_log_probs(i, v, h_g);
      const int type = target.has_edge(order[i], order[t])
                           ? target.edge(order[i], order[t]).edge_type
                           : ep.edge_types;
      ep.apply_edge(i, v, lp, type);
    }
  }
  ad::Var h_g = ep.step_readout();
  if (static_cast<int>(n) == max_nodes) return ep.finish(true);
  ep.finish_stop(ep.stop_logit(h_g));
  return ep.finish(false);
}

}  // namespace sgvae
