#pragma once

#include <map>

#include "sgvae/param_store.hpp"
#include "sgvae/tape.hpp"

namespace sgvae {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are created lazily on the first
// step and are keyed by parameter name, so the same optimizer instance must
// always see the same parameter set.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one descent step in place. `grads` must contain exactly the keys
  // of `params` (the gradient of the loss, so parameters move against it).
  void step(ParamStore& params, const ad::GradMap& grads);

  long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, ad::Tensor> m_;
  std::map<std::string, ad::Tensor> v_;
};

// Scales `grads` in place so their global l2 norm is at most `max_norm`.
// No-op when max_norm <= 0 or the norm is already below it. Returns the
// pre-clip norm.
double clip_grad_norm(ad::GradMap& grads, double max_norm);

}  // namespace sgvae
