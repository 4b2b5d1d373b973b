#include <benchmark/benchmark.h>

#include <vector>

#include "sgvae/constructor.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/destructor.hpp"
#include "sgvae/evaluation.hpp"
#include "sgvae/model.hpp"
#include "sgvae/propnet.hpp"
#include "sgvae/trainer.hpp"

namespace {

using namespace sgvae;

const ModelDims& dims_of() {
  static const ModelDims dims;
  return dims;
}

ParamStore default_params(std::uint64_t seed) {
  ParamStore ps;
  const Rng init = Rng(seed).fork("init");
  init_encoder_params(ps, dims_of(), init);
  init_decoder_params(ps, dims_of(), init);
  return ps;
}

void bm_propagate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph g = make_cycle(n);
  const ParamStore ps = default_params(1);
  for (auto _ : state) {
    ad::Tape tape;
    DecoderParamsRef dec = bind_decoder(tape, ps, dims_of());
    NodeVars h;
    for (const auto& [v, st] : g.nodes()) h[v] = tape.constant(st.embedding);
    EdgeVars he;
    for (const auto& [k, st] : g.edges()) he[k] = tape.constant(st.embedding);
    ad::Var hg = readout_vars(g, propagate_vars(g, h, he, dec.prop),
                              dec.readout);
    benchmark::DoNotOptimize(tape.scalar_value(ad::sum(hg)));
  }
}

void bm_encode(benchmark::State& state) {
  const Graph g = make_cycle(static_cast<int>(state.range(0)));
  const ParamStore ps = default_params(1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    ad::Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims_of());
    Rng rng = Rng(7).fork("bench", i++);
    EncodeResult r = encode_sample(tape, g, enc, rng);
    benchmark::DoNotOptimize(r.log_q_value);
  }
}

void bm_teacher_force(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph g = make_cycle(n);
  std::vector<int> order(g.node_count());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  const ParamStore ps = default_params(1);
  ad::Tensor z(ad::Shape{dims_of().node_dim});
  Rng rng = Rng(3).fork("z");
  for (auto& v : z.data) v = rng.normal();
  for (auto _ : state) {
    ad::Tape tape;
    DecoderParamsRef dec = bind_decoder(tape, ps, dims_of());
    DecodeResult r = teacher_force(tape, tape.constant(z), g, order, dec);
    benchmark::DoNotOptimize(r.log_p_value);
  }
}

void bm_generate(benchmark::State& state) {
  const ParamStore ps = default_params(1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng rng = Rng(9).fork("bench", i++);
    ad::Tensor z(ad::Shape{dims_of().node_dim});
    for (auto& v : z.data) v = rng.normal();
    ad::Tape tape;
    DecoderParamsRef dec = bind_decoder(tape, ps, dims_of());
    DecodeResult r = generate(tape, tape.constant(z), dec, rng, 50);
    benchmark::DoNotOptimize(r.graph.node_count());
  }
}

void bm_step_grads(benchmark::State& state) {
  const Graph g = make_cycle(static_cast<int>(state.range(0)));
  const ParamStore ps = default_params(1);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng rng = Rng(5).fork("bench", i++);
    ad::GradMap grads = reinforce_step_grads(g, ps, dims_of(), rng, 1);
    benchmark::DoNotOptimize(grads.size());
  }
}

void bm_exact_grads(benchmark::State& state) {
  ModelDims dims;
  dims.node_dim = 2;
  dims.edge_dim = 2;
  dims.graph_dim = 2;
  dims.prop_rounds = 1;
  dims.hidden = 8;
  const Graph g = make_cycle(static_cast<int>(state.range(0)), dims.node_dim,
                             dims.edge_dim);
  ParamStore ps;
  const Rng init = Rng(1).fork("init");
  init_encoder_params(ps, dims, init);
  init_decoder_params(ps, dims, init);
  for (auto _ : state) {
    ad::GradMap grads = exact_expectation_grads(g, ps, dims);
    benchmark::DoNotOptimize(grads.size());
  }
}

BENCHMARK(bm_propagate)->Arg(5)->Arg(14)->Arg(50);
BENCHMARK(bm_encode)->Arg(5)->Arg(14);
BENCHMARK(bm_teacher_force)->Arg(5)->Arg(14);
BENCHMARK(bm_generate);
BENCHMARK(bm_step_grads)->Arg(5)->Arg(14);
BENCHMARK(bm_exact_grads)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
