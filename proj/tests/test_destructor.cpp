#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/destructor.hpp"

using namespace sgvae;
using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

ParamStore zeroed(const ParamStore& ps) {
  ParamStore out;
  for (const auto& [name, t] : ps) {
    Tensor z = t;
    std::fill(z.data.begin(), z.data.end(), 0.0);
    out.add(name, z);
  }
  return out;
}

double order_mass(const Graph& x, const ParamStore& ps, const ModelDims& dims) {
  double mass = 0.0;
  for (const auto& removal : th::all_permutations(x.node_ids())) {
    Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims);
    mass += std::exp(encode_given_order(tape, x, enc, removal).log_q_value);
  }
  return mass;
}

}  // namespace

TEST_CASE("a single node encodes to its raw type embedding") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 1);
  Graph g(dims.node_dim, dims.edge_dim);
  int v = g.add_node(0, Tensor::zeros(Shape{dims.node_dim}));

  Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  Rng rng(2);
  EncodeResult r = encode_sample(tape, g, enc, rng);

  CHECK(r.order == ConstructionOrder{v});
  CHECK(r.log_q_value == 0.0);
  CHECK(r.step_logprobs.empty());

  Tape t2;
  Var want = ad::affine(t2.constant(ps.at("phi/node_embed/W")),
                        t2.constant(one_hot(0, dims.node_types)),
                        t2.constant(ps.at("phi/node_embed/b")));
  CHECK(r.z_value.data == t2.value(want).data);
}

TEST_CASE("two symmetric nodes split the mass exactly in half") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 3);
  Graph g(dims.node_dim, dims.edge_dim);
  g.add_node(0, Tensor::zeros(Shape{dims.node_dim}));
  g.add_node(0, Tensor::zeros(Shape{dims.node_dim}));

  for (const std::vector<int>& removal :
       {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims);
    EncodeResult r = encode_given_order(tape, g, enc, removal);
    CHECK(std::exp(r.log_q_value) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("all removal orders of a 4-cycle sum to one") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 5);
  CHECK(order_mass(make_cycle(4), ps, dims) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("all removal orders of a 3-node graph sum to one") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 6);
  CHECK(order_mass(th::make_path(3), ps, dims) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mass is normalized across shapes and sizes") {
  ModelDims dims;
  dims.hidden = 4;  // keep the enumeration cheap
  for (std::uint64_t seed : {7u, 8u}) {
    ParamStore ps = th::test_params(dims, seed);
    for (int n = 2; n <= 4; ++n) {
      CHECK(order_mass(th::make_path(n), ps, dims) ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(order_mass(th::make_star(n), ps, dims) ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(order_mass(th::make_complete(n), ps, dims) ==
            doctest::Approx(1.0).epsilon(1e-9));
      if (n >= 3)
        CHECK(order_mass(make_cycle(n), ps, dims) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero parameters give a uniform distribution over orders") {
  ModelDims dims;
  ParamStore ps = zeroed(th::test_params(dims, 9));
  Graph g = make_cycle(3);

  Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  EncodeResult r = encode_given_order(tape, g, enc, std::vector<int>{2, 0, 1});
  CHECK(r.log_q_value == doctest::Approx(-1.791759469228055).epsilon(1e-14));
  CHECK(r.log_q_value == doctest::Approx(-std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("a sampled episode replays bit-identically when forced") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 10);
  Graph g = make_cycle(5);

  Tape t1;
  EncoderParamsRef enc1 = bind_encoder(t1, ps, dims);
  Rng rng(11);
  EncodeResult sampled = encode_sample(t1, g, enc1, rng);

  Tape t2;
  EncoderParamsRef enc2 = bind_encoder(t2, ps, dims);
  EncodeResult forced = encode_given_order(t2, g, enc2, sampled.removal_order);

  CHECK(forced.log_q_value == sampled.log_q_value);
  CHECK(forced.z_value.data == sampled.z_value.data);
  CHECK(forced.order == sampled.order);
}

TEST_CASE("encoding leaves the caller's graph alone") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 12);
  Graph g = make_cycle(4);
  Rng seed_rng(1);
  for (int v : g.node_ids())
    g.node(v).embedding = th::random_tensor(Shape{dims.node_dim}, seed_rng);
  Graph before = g;

  Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  Rng rng(13);
  (void)encode_sample(tape, g, enc, rng);

  g.audit();
  CHECK(g.node_count() == before.node_count());
  CHECK(g.edge_count() == before.edge_count());
  for (int v : g.node_ids())
    CHECK(g.node(v).embedding.data == before.node(v).embedding.data);
}

TEST_CASE("bookkeeping fields agree with each other") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 14);
  Graph g = make_cycle(6);

  Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  Rng rng(15);
  EncodeResult r = encode_sample(tape, g, enc, rng);

  CHECK(r.step_logprobs.size() == g.node_count() - 1);
  double total = 0.0;
  for (const Var& lp : r.step_logprobs) total += tape.scalar_value(lp);
  CHECK(r.log_q_value == doctest::Approx(total).epsilon(1e-12));
  CHECK(tape.scalar_value(r.log_q) == r.log_q_value);

  std::vector<int> reversed(r.removal_order.rbegin(), r.removal_order.rend());
  CHECK(r.order == reversed);

  std::vector<int> sorted = r.order;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == g.node_ids());
}

TEST_CASE("bad inputs are rejected") {
  ModelDims dims;
  ParamStore ps = th::test_params(dims, 16);
  Graph empty(dims.node_dim, dims.edge_dim);

  Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  Rng rng(17);
  CHECK_THROWS_AS(encode_sample(tape, empty, enc, rng), std::invalid_argument);

  Graph g = make_cycle(3);
  Tape t2;
  EncoderParamsRef enc2 = bind_encoder(t2, ps, dims);
  CHECK_THROWS_AS(
      encode_given_order(t2, g, enc2, std::vector<int>{0, 1}),
      std::invalid_argument);
  Tape t3;
  EncoderParamsRef enc3 = bind_encoder(t3, ps, dims);
  CHECK_THROWS_AS(
      encode_given_order(t3, g, enc3, std::vector<int>{0, 1, 1}),
      std::invalid_argument);
}
