#include "sgvae/param_store.hpp"

#include <fstream>

#include "json.hpp"

namespace sgvae {

void ParamStore::add(const std::string& name, ad::Tensor t) {
  const bool phi = name.starts_with("phi/");
  const bool theta = name.starts_with("theta/");
  if (!phi && !theta)
    throw std::invalid_argument("parameter '" + name +
                                "' outside phi/ and theta/ namespaces");
  if (params_.count(name))
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  t.requires_grad = true;
  params_.emplace(name, std::move(t));
}

ad::Tensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

const ad::Tensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

bool ParamStore::contains(const std::string& name) const {
  return params_.count(name) > 0;
}

std::vector<std::string> ParamStore::names(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params_)
    if (name.starts_with(prefix)) out.push_back(name);
  return out;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json dims_to_json(const ModelDims& d) {
  ordered_json j;
  j["node_dim"] = d.node_dim;
  j["edge_dim"] = d.edge_dim;
  j["graph_dim"] = d.graph_dim;
  j["prop_rounds"] = d.prop_rounds;
  j["edge_types"] = d.edge_types;
  j["node_types"] = d.node_types;
  j["hidden"] = d.hidden;
  return j;
}

int get_dim_field(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw CheckpointError(std::string("config.") + key,
                          "missing or not an integer");
  return j[key].get<int>();
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const ModelDims* dims) {
  ordered_json j;
  j["format_version"] = 1;
  if (dims != nullptr) j["config"] = dims_to_json(*dims);
  ordered_json jp = ordered_json::object();
  for (const auto& [name, t] : params) {
    ordered_json entry;
    entry["shape"] = t.shape.dims();
    entry["data"] = t.data;
    jp[name] = std::move(entry);
  }
  j["params"] = std::move(jp);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("<document>", e.what());
  }

  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw CheckpointError("format_version", "missing or not an integer");
  if (j["format_version"].get<int>() != 1)
    throw CheckpointError("format_version", "unsupported version");
  if (!j.contains("params") || !j["params"].is_object())
    throw CheckpointError("params", "missing or not an object");

  Checkpoint ck;
  for (const auto& [name, entry] : j["params"].items()) {
    if (!entry.is_object() || !entry.contains("shape") ||
        !entry.contains("data"))
      throw CheckpointError("params." + name, "missing shape or data");
    if (!entry["shape"].is_array())
      throw CheckpointError("params." + name + ".shape", "not an array");
    std::vector<int> dims;
    for (const auto& d : entry["shape"]) {
      if (!d.is_number_integer() || d.get<int>() <= 0)
        throw CheckpointError("params." + name + ".shape",
                              "dimension not a positive integer");
      dims.push_back(d.get<int>());
    }
    if (dims.size() > 2)
      throw CheckpointError("params." + name + ".shape", "rank > 2");
    if (!entry["data"].is_array())
      throw CheckpointError("params." + name + ".data", "not an array");
    std::vector<double> data;
    data.reserve(entry["data"].size());
    for (const auto& v : entry["data"]) {
      if (!v.is_number())
        throw CheckpointError("params." + name + ".data", "non-numeric value");
      data.push_back(v.get<double>());
    }
    ad::Shape shape;
    if (dims.size() == 1)
      shape = ad::Shape{dims[0]};
    else if (dims.size() == 2)
      shape = ad::Shape{dims[0], dims[1]};
    if (shape.numel() != data.size())
      throw CheckpointError("params." + name,
                            "shape does not match data length");
    try {
      ck.params.add(name, ad::Tensor(shape, std::move(data)));
    } catch (const std::invalid_argument& e) {
      throw CheckpointError("params." + name, e.what());
    }
  }

  if (j.contains("config")) {
    if (!j["config"].is_object())
      throw CheckpointError("config", "not an object");
    const auto& jc = j["config"];
    ModelDims d;
    d.node_dim = get_dim_field(jc, "node_dim");
    d.edge_dim = get_dim_field(jc, "edge_dim");
    d.graph_dim = get_dim_field(jc, "graph_dim");
    d.prop_rounds = get_dim_field(jc, "prop_rounds");
    d.edge_types = get_dim_field(jc, "edge_types");
    d.node_types = get_dim_field(jc, "node_types");
    d.hidden = get_dim_field(jc, "hidden");
    try {
      d.validate();
    } catch (const std::invalid_argument& e) {
      throw CheckpointError("config", e.what());
    }
    ck.dims = d;
  }
  return ck;
}

}  // namespace sgvae
