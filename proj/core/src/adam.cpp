#include "sgvae/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sgvae {

void Adam::step(ParamStore& params, const ad::GradMap& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam: gradient key set does not match parameters");
  for (const auto& [name, g] : grads) {
    if (!params.contains(name))
      throw std::invalid_argument("adam: gradient for unknown parameter '" +
                                  name + "'");
    if (g.shape != params.at(name).shape)
      throw std::invalid_argument("adam: gradient shape mismatch for '" + name +
                                  "'");
  }

  if (t_ == 0) {
    for (const auto& [name, g] : grads) {
      m_.emplace(name, ad::Tensor::zeros(g.shape));
      v_.emplace(name, ad::Tensor::zeros(g.shape));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (const auto& [name, g] : grads) {
    ad::Tensor& p = params.at(name);
    ad::Tensor& m = m_.at(name);
    ad::Tensor& v = v_.at(name);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double clip_grad_norm(ad::GradMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [_, g] : grads)
    for (std::size_t i = 0; i < g.numel(); ++i) sq += g[i] * g[i];
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [_, g] : grads)
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= scale;
  }
  return norm;
}

}  // namespace sgvae
