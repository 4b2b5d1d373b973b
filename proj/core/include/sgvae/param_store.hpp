#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgvae/config.hpp"
#include "sgvae/tensor.hpp"

namespace sgvae {

// Named collection of learnable tensors. Names are hierarchical and must live
// in exactly one of the "phi/" (encoder) or "theta/" (decoder) namespaces.
// Shapes are fixed at creation.
class ParamStore {
 public:
  void add(const std::string& name, ad::Tensor t);

  ad::Tensor& at(const std::string& name);
  const ad::Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<std::string> names(std::string_view prefix = "") const;
  std::size_t size() const { return params_.size(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, ad::Tensor> params_;
};

// Raised when a checkpoint file cannot be used; `field` names the offending
// entry so the CLI can report it.
struct CheckpointError : std::runtime_error {
  CheckpointError(const std::string& field_, const std::string& what_)
      : std::runtime_error("checkpoint field '" + field_ + "': " + what_),
        field(field_) {}
  std::string field;
};

struct Checkpoint {
  ParamStore params;
  std::optional<ModelDims> dims;
};

// JSON checkpoint, format_version 1. Float64 values are written in their
// shortest round-trip decimal form, so save/load is value-exact.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const ModelDims* dims = nullptr);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sgvae
