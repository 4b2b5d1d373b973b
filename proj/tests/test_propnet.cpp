#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/propnet.hpp"

using namespace sgvae;
using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

Graph random_graph(int n, const ModelDims& dims, Rng& rng,
                   double edge_prob = 0.4) {
  Graph g(dims.node_dim, dims.edge_dim);
  for (int i = 0; i < n; ++i)
    g.add_node(0, th::random_tensor(Shape{dims.node_dim}, rng));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob)
        g.add_edge(i, j, 0, th::random_tensor(Shape{dims.edge_dim}, rng));
  return g;
}

// sigma[old_id] = new_id; embeddings and structure carried over.
Graph relabel(const Graph& g, const std::vector<int>& sigma) {
  std::vector<int> inverse(sigma.size());
  for (std::size_t v = 0; v < sigma.size(); ++v) inverse[sigma[v]] = int(v);
  Graph out(g.node_dim(), g.edge_dim());
  for (std::size_t nid = 0; nid < sigma.size(); ++nid) {
    const auto& st = g.node(inverse[nid]);
    out.add_node(st.node_type, st.embedding);
  }
  for (const auto& [key, st] : g.edges())
    out.add_edge(sigma[key.first], sigma[key.second], st.edge_type,
                 st.embedding);
  return out;
}

}  // namespace

TEST_CASE("an isolated node runs its GRU on a zero input") {
  ModelDims dims;
  dims.prop_rounds = 1;
  ParamStore ps = th::test_params(dims, 4);

  Graph g(dims.node_dim, dims.edge_dim);
  Rng rng(8);
  Tensor h0 = th::random_tensor(Shape{dims.node_dim}, rng);
  int v = g.add_node(0, h0);
  propagate(g, ps, dims, "phi/prop");

  Tape t;
  ad::GruWeights w{t.constant(ps.at("phi/prop/round0/gru/Wr")),
                   t.constant(ps.at("phi/prop/round0/gru/Ur")),
                   t.constant(ps.at("phi/prop/round0/gru/br")),
                   t.constant(ps.at("phi/prop/round0/gru/Wu")),
                   t.constant(ps.at("phi/prop/round0/gru/Uu")),
                   t.constant(ps.at("phi/prop/round0/gru/bu")),
                   t.constant(ps.at("phi/prop/round0/gru/Wc")),
                   t.constant(ps.at("phi/prop/round0/gru/Uc")),
                   t.constant(ps.at("phi/prop/round0/gru/bc"))};
  Var want = ad::gru_cell(t.constant(h0),
                          t.constant(Tensor::zeros(Shape{dims.node_dim})), w);
  CHECK(g.node(v).embedding.data == t.value(want).data);
}

TEST_CASE("identical embeddings around a cycle stay identical") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 11);
  Rng rng(12);
  Tensor shared = th::random_tensor(Shape{dims.node_dim}, rng);

  Graph g(dims.node_dim, dims.edge_dim);
  const int n = 6;
  for (int i = 0; i < n; ++i) g.add_node(0, shared);
  Tensor eshared = th::random_tensor(Shape{dims.edge_dim}, rng);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n, 0, eshared);

  propagate(g, ps, dims, "theta/prop");
  const auto& first = g.node(0).embedding.data;
  for (int i = 1; i < n; ++i) CHECK(g.node(i).embedding.data == first);
}

TEST_CASE("propagation is equivariant under relabeling, bit for bit") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 21);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 6;
    Graph g = random_graph(n, dims, rng);

    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(sigma[i], sigma[rng.next_u64() % (i + 1)]);

    Graph permuted = relabel(g, sigma);
    propagate(g, ps, dims, "phi/prop");
    propagate(permuted, ps, dims, "phi/prop");
    for (int v = 0; v < n; ++v)
      CHECK(permuted.node(sigma[v]).embedding.data ==
            g.node(v).embedding.data);
  }
}

TEST_CASE("readout is invariant under relabeling, bit for bit") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 22);
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Rng rng(seed);
    const int n = 7;
    Graph g = random_graph(n, dims, rng);
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(sigma[i], sigma[rng.next_u64() % (i + 1)]);
    Graph permuted = relabel(g, sigma);

    Tensor a = readout(g, ps, dims, "theta/readout");
    Tensor b = readout(permuted, ps, dims, "theta/readout");
    CHECK(a.data == b.data);
  }
}

TEST_CASE("readout of one node is its gated transform") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 23);
  Rng rng(24);
  Tensor h = th::random_tensor(Shape{dims.node_dim}, rng);
  Graph g(dims.node_dim, dims.edge_dim);
  g.add_node(0, h);

  Tensor got = readout(g, ps, dims, "theta/readout");

  Tape t;
  Var hv = t.constant(h);
  Var gate = ad::sigmoid(ad::affine(t.constant(ps.at("theta/readout/gate/W")),
                                    hv,
                                    t.constant(ps.at("theta/readout/gate/b"))));
  Var tr = ad::affine(t.constant(ps.at("theta/readout/transform/W")), hv,
                      t.constant(ps.at("theta/readout/transform/b")));
  const auto& want = t.value(ad::smul(gate, tr));
  CHECK(got.data == want.data);
}

TEST_CASE("two identical nodes read out exactly twice one node") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 25);
  Rng rng(26);
  Tensor h = th::random_tensor(Shape{dims.node_dim}, rng);

  Graph one(dims.node_dim, dims.edge_dim);
  one.add_node(0, h);
  Graph two(dims.node_dim, dims.edge_dim);
  two.add_node(0, h);
  two.add_node(0, h);

  Tensor r1 = readout(one, ps, dims, "theta/readout");
  Tensor r2 = readout(two, ps, dims, "theta/readout");
  for (std::size_t i = 0; i < r1.numel(); ++i) CHECK(r2[i] == 2.0 * r1[i]);
}

TEST_CASE("readout rejects an empty graph") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 27);
  Graph g(dims.node_dim, dims.edge_dim);
  CHECK_THROWS_AS(readout(g, ps, dims, "theta/readout"), std::invalid_argument);
}

namespace {

ModelDims small_dims() {
  ModelDims dims;
  dims.node_dim = 3;
  dims.edge_dim = 2;
  dims.graph_dim = 4;
  dims.prop_rounds = 2;
  dims.hidden = 3;
  return dims;
}

// Scalar through the whole prop stack plus readout, as a function of the
// decoder-side parameters.
double prop_stack_loss(const ParamStore& ps, const Graph& g,
                       const ModelDims& dims) {
  Tape tape;
  PropParamsRef prop = bind_prop(tape, ps, dims, "theta/prop");
  ReadoutParamsRef ro{
      {tape.param("theta/readout/gate/W", ps.at("theta/readout/gate/W")),
       tape.param("theta/readout/gate/b", ps.at("theta/readout/gate/b"))},
      {tape.param("theta/readout/transform/W",
                  ps.at("theta/readout/transform/W")),
       tape.param("theta/readout/transform/b",
                  ps.at("theta/readout/transform/b"))}};
  NodeVars h;
  for (const auto& [v, st] : g.nodes()) h[v] = tape.constant(st.embedding);
  EdgeVars he;
  for (const auto& [k, st] : g.edges()) he[k] = tape.constant(st.embedding);
  Var hg = readout_vars(g, propagate_vars(g, h, he, prop), ro);
  return tape.scalar_value(ad::sum(ad::mul(hg, hg)));
}

ad::GradMap prop_stack_grads(const ParamStore& ps, const Graph& g,
                             const ModelDims& dims) {
  Tape tape;
  PropParamsRef prop = bind_prop(tape, ps, dims, "theta/prop");
  ReadoutParamsRef ro{
      {tape.param("theta/readout/gate/W", ps.at("theta/readout/gate/W")),
       tape.param("theta/readout/gate/b", ps.at("theta/readout/gate/b"))},
      {tape.param("theta/readout/transform/W",
                  ps.at("theta/readout/transform/W")),
       tape.param("theta/readout/transform/b",
                  ps.at("theta/readout/transform/b"))}};
  NodeVars h;
  for (const auto& [v, st] : g.nodes()) h[v] = tape.constant(st.embedding);
  EdgeVars he;
  for (const auto& [k, st] : g.edges()) he[k] = tape.constant(st.embedding);
  Var hg = readout_vars(g, propagate_vars(g, h, he, prop), ro);
  return tape.backward(ad::sum(ad::mul(hg, hg)));
}

}  // namespace

TEST_CASE("gradients flow correctly through prop plus readout") {
  ModelDims dims = small_dims();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamStore full = th::test_params(dims, seed + 60);
    ParamStore ps;
    for (const auto& [name, t] : full)
      if (name.rfind("theta/prop/", 0) == 0 ||
          name.rfind("theta/readout/", 0) == 0)
        ps.add(name, t);

    Rng rng(seed);
    Graph g = random_graph(4, dims, rng, 0.6);
    auto grads = prop_stack_grads(ps, g, dims);
    auto r = th::fd_compare(
        ps, grads,
        [&](const ParamStore& p) { return prop_stack_loss(p, g, dims); });
    CAPTURE(r.worst_name);
    CHECK(r.max_rel <= 1e-4);
  }
}
