#include "sgvae/destructor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgvae {

namespace {

// Shared core: `forced` is empty when sampling, else the full removal order.
EncodeResult encode_impl(ad::Tape& tape, const Graph& x,
                         const EncoderParamsRef& params, Rng* rng,
                         std::span<const int> forced) {
  if (x.empty()) throw std::invalid_argument("encode: empty graph");

  if (rng == nullptr) {
    std::vector<int> sorted(forced.begin(), forced.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != x.node_ids())
      throw std::invalid_argument(
          "encode: order is not a permutation of the node set");
  }

  // One-hot widths come from the embedder weights: W is [d x n_types].
  const int node_types = tape.value(params.node_embed.W).shape.d1;
  const int edge_types = tape.value(params.edge_embed.W).shape.d1;

  Graph work = x;
  NodeVars h;
  for (const auto& [v, st] : work.nodes())
    h[v] = affine_apply(params.node_embed,
                        tape.constant(one_hot(st.node_type, node_types)));
  EdgeVars he;
  for (const auto& [key, st] : work.edges())
    he[key] = affine_apply(params.edge_embed,
                           tape.constant(one_hot(st.edge_type, edge_types)));

  EncodeResult out;
  std::size_t step = 0;
  while (work.node_count() > 1) {
    h = propagate_vars(work, h, he, params.prop);

    const std::vector<int> ids = work.node_ids();
    std::vector<ad::Var> scores;
    scores.reserve(ids.size());
    for (int v : ids) scores.push_back(mlp_apply(params.removal, h.at(v)));
    const ad::Var log_probs = ad::log_softmax(ad::stack_scalars(scores));

    int chosen;
    if (rng != nullptr) {
      const ad::Tensor& lp = tape.value(log_probs);
      std::vector<double> probs(lp.data.size());
      for (std::size_t i = 0; i < probs.size(); ++i)
        probs[i] = std::exp(lp[i]);
      chosen = rng->categorical(probs);
    } else {
      const int want = forced[step];
      const auto it = std::find(ids.begin(), ids.end(), want);
      if (it == ids.end())
        throw std::invalid_argument("encode: forced node already removed");
      chosen = static_cast<int>(it - ids.begin());
    }

    const int victim = ids[static_cast<std::size_t>(chosen)];
    out.step_logprobs.push_back(ad::pick(log_probs, chosen));
    out.removal_order.push_back(victim);

    work.remove_node(victim);
    h.erase(victim);
    for (auto it = he.begin(); it != he.end();)
      it = (it->first.first == victim || it->first.second == victim)
               ? he.erase(it)
               : ++it;
    ++step;
  }

  const int survivor = work.node_ids().front();
  if (rng == nullptr && forced.back() != survivor)
    throw std::invalid_argument("encode: forced order survivor mismatch");
  out.removal_order.push_back(survivor);
  out.order.assign(out.removal_order.rbegin(), out.removal_order.rend());

  out.z = h.at(survivor);
  out.log_q = tape.constant_scalar(0.0);
  for (const ad::Var& lp : out.step_logprobs) out.log_q = ad::add(out.log_q, lp);

  out.z_value = tape.value(out.z);
  out.log_q_value = tape.scalar_value(out.log_q);
  return out;
}

}  // namespace

EncodeResult encode_sample(ad::Tape& tape, const Graph& x,
                           const EncoderParamsRef& params, Rng& rng) {
  return encode_impl(tape, x, params, &rng, {});
}

EncodeResult encode_given_order(ad::Tape& tape, const Graph& x,
                                const EncoderParamsRef& params,
                                std::span<const int> removal_order) {
  return encode_impl(tape, x, params, nullptr, removal_order);
}

}  // namespace sgvae
