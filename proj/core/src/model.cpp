#include "sgvae/model.hpp"

#include <cmath>

namespace sgvae {

ad::Var affine_apply(const AffineRef& f, ad::Var x) {
  return ad::affine(f.W, x, f.b);
}

ad::Var mlp_apply(const MlpRef& f, ad::Var x) {
  return affine_apply(f.l2, ad::tanh(affine_apply(f.l1, x)));
}

ad::Tensor one_hot(int index, int size) {
  if (index < 0 || index >= size)
    throw std::invalid_argument("one_hot: index out of range");
  ad::Tensor t = ad::Tensor::zeros(ad::Shape{size});
  t[static_cast<std::size_t>(index)] = 1.0;
  return t;
}

namespace {

ad::Tensor glorot(const Rng& rng, const std::string& name, int rows,
                  int cols) {
  Rng sub = rng.fork(name);
  const double limit = std::sqrt(6.0 / (rows + cols));
  ad::Tensor t(ad::Shape{rows, cols});
  for (auto& x : t.data) x = (2.0 * sub.uniform() - 1.0) * limit;
  return t;
}

void add_affine(ParamStore& ps, const Rng& rng, const std::string& prefix,
                int out, int in) {
  ps.add(prefix + "/W", glorot(rng, prefix + "/W", out, in));
  ps.add(prefix + "/b", ad::Tensor::zeros(ad::Shape{out}));
}

void add_mlp(ParamStore& ps, const Rng& rng, const std::string& prefix,
             int in, int hidden, int out) {
  ps.add(prefix + "/W1", glorot(rng, prefix + "/W1", hidden, in));
  ps.add(prefix + "/b1", ad::Tensor::zeros(ad::Shape{hidden}));
  ps.add(prefix + "/W2", glorot(rng, prefix + "/W2", out, hidden));
  ps.add(prefix + "/b2", ad::Tensor::zeros(ad::Shape{out}));
}

void add_gru(ParamStore& ps, const Rng& rng, const std::string& prefix,
             int d) {
  for (const char* gate : {"r", "u", "c"}) {
    ps.add(prefix + "/W" + gate, glorot(rng, prefix + "/W" + gate, d, d));
    ps.add(prefix + "/U" + gate, glorot(rng, prefix + "/U" + gate, d, d));
    ps.add(prefix + "/b" + gate, ad::Tensor::zeros(ad::Shape{d}));
  }
}

void add_prop(ParamStore& ps, const Rng& rng, const std::string& prefix,
              const ModelDims& dims) {
  const int msg_in = 2 * dims.node_dim + dims.edge_dim;
  for (int t = 0; t < dims.prop_rounds; ++t) {
    const std::string round = prefix + "/round" + std::to_string(t);
    add_mlp(ps, rng, round + "/msg", msg_in, dims.hidden, dims.node_dim);
    add_gru(ps, rng, round + "/gru", dims.node_dim);
  }
}

AffineRef bind_affine(ad::Tape& tape, const ParamStore& ps,
                      const std::string& prefix) {
  return {tape.param(prefix + "/W", ps.at(prefix + "/W")),
          tape.param(prefix + "/b", ps.at(prefix + "/b"))};
}

MlpRef bind_mlp(ad::Tape& tape, const ParamStore& ps,
                const std::string& prefix) {
  return {{tape.param(prefix + "/W1", ps.at(prefix + "/W1")),
           tape.param(prefix + "/b1", ps.at(prefix + "/b1"))},
          {tape.param(prefix + "/W2", ps.at(prefix + "/W2")),
           tape.param(prefix + "/b2", ps.at(prefix + "/b2"))}};
}

ad::GruWeights bind_gru(ad::Tape& tape, const ParamStore& ps,
                        const std::string& prefix) {
  auto p = [&](const std::string& leaf) {
    return tape.param(prefix + "/" + leaf, ps.at(prefix + "/" + leaf));
  };
  ad::GruWeights w;
  w.w_r = p("Wr"), w.u_r = p("Ur"), w.b_r = p("br");
  w.w_u = p("Wu"), w.u_u = p("Uu"), w.b_u = p("bu");
  w.w_c = p("Wc"), w.u_c = p("Uc"), w.b_c = p("bc");
  return w;
}

}  // namespace

void init_encoder_params(ParamStore& ps, const ModelDims& dims,
                         const Rng& rng) {
  dims.validate();
  add_affine(ps, rng, "phi/node_embed", dims.node_dim, dims.node_types);
  add_affine(ps, rng, "phi/edge_embed", dims.edge_dim, dims.edge_types);
  add_prop(ps, rng, "phi/prop", dims);
  add_mlp(ps, rng, "phi/removal", dims.node_dim, dims.hidden, 1);
}

void init_decoder_params(ParamStore& ps, const ModelDims& dims,
                         const Rng& rng) {
  dims.validate();
  add_prop(ps, rng, "theta/prop", dims);
  add_affine(ps, rng, "theta/readout/gate", 1, dims.node_dim);
  add_affine(ps, rng, "theta/readout/transform", dims.graph_dim,
             dims.node_dim);
  add_mlp(ps, rng, "theta/stop", dims.graph_dim, dims.hidden, 1);
  add_affine(ps, rng, "theta/node_init", dims.node_dim, dims.graph_dim);
  add_mlp(ps, rng, "theta/edge_logits", 2 * dims.node_dim + dims.graph_dim,
          dims.hidden, dims.edge_types + 1);
  add_affine(ps, rng, "theta/edge_embed", dims.edge_dim, dims.edge_types);
}

PropParamsRef bind_prop(ad::Tape& tape, const ParamStore& ps,
                        const ModelDims& dims, const std::string& prefix) {
  PropParamsRef out;
  out.rounds.reserve(static_cast<std::size_t>(dims.prop_rounds));
  for (int t = 0; t < dims.prop_rounds; ++t) {
    const std::string round = prefix + "/round" + std::to_string(t);
    out.rounds.push_back(
        {bind_mlp(tape, ps, round + "/msg"), bind_gru(tape, ps, round + "/gru")});
  }
  return out;
}

EncoderParamsRef bind_encoder(ad::Tape& tape, const ParamStore& ps,
                              const ModelDims& dims) {
  EncoderParamsRef out;
  out.node_embed = bind_affine(tape, ps, "phi/node_embed");
  out.edge_embed = bind_affine(tape, ps, "phi/edge_embed");
  out.prop = bind_prop(tape, ps, dims, "phi/prop");
  out.removal = bind_mlp(tape, ps, "phi/removal");
  return out;
}

DecoderParamsRef bind_decoder(ad::Tape& tape, const ParamStore& ps,
                              const ModelDims& dims) {
  DecoderParamsRef out;
  out.prop = bind_prop(tape, ps, dims, "theta/prop");
  out.readout.gate = bind_affine(tape, ps, "theta/readout/gate");
  out.readout.transform = bind_affine(tape, ps, "theta/readout/transform");
  out.stop = bind_mlp(tape, ps, "theta/stop");
  out.node_init = bind_affine(tape, ps, "theta/node_init");
  out.edge_logits = bind_mlp(tape, ps, "theta/edge_logits");
  out.edge_embed = bind_affine(tape, ps, "theta/edge_embed");
  return out;
}

}  // namespace sgvae
