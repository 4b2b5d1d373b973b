#pragma once

#include <string>
#include <vector>

#include "sgvae/config.hpp"
#include "sgvae/param_store.hpp"
#include "sgvae/rng.hpp"
#include "sgvae/tape.hpp"

namespace sgvae {

// Tape-bound views of parameter groups. Binding pulls the named tensors out
// of a ParamStore onto a tape; the refs are only valid while that tape lives.

struct AffineRef {
  ad::Var W, b;
};

// One hidden layer, tanh.
struct MlpRef {
  AffineRef l1, l2;
};

struct PropRoundRef {
  MlpRef message;
  ad::GruWeights gru;
};

struct PropParamsRef {
  std::vector<PropRoundRef> rounds;
};

struct ReadoutParamsRef {
  AffineRef gate;       // d -> 1
  AffineRef transform;  // d -> d_G
};

struct EncoderParamsRef {
  AffineRef node_embed;  // node-type one-hot -> d
  AffineRef edge_embed;  // edge-type one-hot -> d_e
  PropParamsRef prop;
  MlpRef removal;        // d -> 1 logit
};

struct DecoderParamsRef {
  PropParamsRef prop;
  ReadoutParamsRef readout;
  MlpRef stop;           // d_G -> 1 logit, sigma gives continue probability
  AffineRef node_init;   // d_G -> d
  MlpRef edge_logits;    // h_u (+) h_v (+) h_G -> E+1, last = no edge
  AffineRef edge_embed;  // edge-type one-hot -> d_e
};

ad::Var affine_apply(const AffineRef& f, ad::Var x);
ad::Var mlp_apply(const MlpRef& f, ad::Var x);

// Glorot-uniform weights, zero biases. Each tensor is filled from a substream
// forked by its own name, so values do not depend on creation order.
void init_encoder_params(ParamStore& ps, const ModelDims& dims, const Rng& rng);
void init_decoder_params(ParamStore& ps, const ModelDims& dims, const Rng& rng);

PropParamsRef bind_prop(ad::Tape& tape, const ParamStore& ps,
                        const ModelDims& dims, const std::string& prefix);
EncoderParamsRef bind_encoder(ad::Tape& tape, const ParamStore& ps,
                              const ModelDims& dims);
DecoderParamsRef bind_decoder(ad::Tape& tape, const ParamStore& ps,
                              const ModelDims& dims);

// One-hot of `index` in `size` entries.
ad::Tensor one_hot(int index, int size);

}  // namespace sgvae
