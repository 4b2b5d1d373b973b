#include "sgvae/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "sgvae/evaluation.hpp"
#include "sgvae/parallel.hpp"
#include "sgvae/util.hpp"

namespace sgvae {

namespace {

struct Episode {
  ad::Var objective_part;  // contribution to the ascent objective
  ElboSample sample;
};

// One trajectory's contribution: score term with a detached bracket
// coefficient plus the pathwise log p(x,pi|z) + log p(z). `weight` is 1 for
// Monte Carlo samples and q_pi in exact mode.
Episode run_episode(ad::Tape& tape, const Graph& x,
                    const EncoderParamsRef& enc, const DecoderParamsRef& dec,
                    Rng* rng, std::span<const int> forced_removal,
                    detail::BracketFn bracket, bool include_pathwise,
                    bool weight_by_q) {
  EncodeResult e = rng != nullptr
                       ? encode_sample(tape, x, enc, *rng)
                       : encode_given_order(tape, x, enc, forced_removal);
  DecodeResult d = teacher_force(tape, e.z, x, e.order, dec);
  ad::Var log_pz = ad::gaussian_logpdf(e.z);

  Episode out;
  out.sample.log_p_x_pi_given_z = d.log_p_value;
  out.sample.log_p_z = tape.scalar_value(log_pz);
  out.sample.log_q_pi = e.log_q_value;
  out.sample.elbo_term =
      out.sample.log_p_x_pi_given_z + out.sample.log_p_z - out.sample.log_q_pi;
  out.sample.order = e.order;
  if (!std::isfinite(out.sample.elbo_term))
    throw std::runtime_error("elbo term not finite");

  const double w = weight_by_q ? std::exp(e.log_q_value) : 1.0;
  ad::Var score = ad::scale(e.log_q, w * bracket(out.sample.elbo_term));
  if (include_pathwise) {
    ad::Var path = ad::scale(ad::add(d.log_p, log_pz), w);
    out.objective_part = ad::add(score, path);
  } else {
    out.objective_part = score;
  }
  return out;
}

double default_bracket(double elbo_term) { return elbo_term - 1.0; }

// All permutations of the node ids, lexicographic. Each one is a removal
// order (last entry survives).
std::vector<std::vector<int>> all_orders(const Graph& x) {
  std::vector<int> ids = x.node_ids();
  std::vector<std::vector<int>> out;
  std::sort(ids.begin(), ids.end());
  do {
    out.push_back(ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
  return out;
}

void check_enumerable(const Graph& x) {
  if (x.node_count() > 6)
    throw std::invalid_argument("exhaustive mode: graph larger than 6 nodes");
  if (x.empty()) throw std::invalid_argument("exhaustive mode: empty graph");
}

ad::GradMap negate(ad::GradMap grads) {
  for (auto& [_, g] : grads)
    for (auto& v : g.data) v = -v;
  return grads;
}

}  // namespace

ElboEstimate elbo_estimate(const Graph& x, const ParamStore& ps,
                           const ModelDims& dims, Rng& rng, int n) {
  if (n < 1) throw std::invalid_argument("elbo_estimate: n < 1");
  ElboEstimate out;
  out.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ad::Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims);
    DecoderParamsRef dec = bind_decoder(tape, ps, dims);
    Episode ep = run_episode(tape, x, enc, dec, &rng, {}, default_bracket,
                             true, false);
    out.samples.push_back(std::move(ep.sample));
  }
  double sum = 0.0;
  for (const ElboSample& s : out.samples) sum += s.elbo_term;
  out.mean = sum / n;
  return out;
}

double exhaustive_elbo(const Graph& x, const ParamStore& ps,
                       const ModelDims& dims) {
  check_enumerable(x);
  double total = 0.0;
  for (const std::vector<int>& order : all_orders(x)) {
    ad::Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims);
    DecoderParamsRef dec = bind_decoder(tape, ps, dims);
    Episode ep = run_episode(tape, x, enc, dec, nullptr, order,
                             default_bracket, true, false);
    total += std::exp(ep.sample.log_q_pi) * ep.sample.elbo_term;
  }
  return total;
}

ad::GradMap reinforce_step_grads(const Graph& x, const ParamStore& ps,
                                 const ModelDims& dims, Rng& rng, int n,
                                 std::vector<ElboSample>* samples_out) {
  if (n < 1) throw std::invalid_argument("reinforce_step_grads: n < 1");
  ad::GradMap acc;
  for (int i = 0; i < n; ++i) {
    ad::Tape tape;
    EncoderParamsRef enc = bind_encoder(tape, ps, dims);
    DecoderParamsRef dec = bind_decoder(tape, ps, dims);
    Episode ep = run_episode(tape, x, enc, dec, &rng, {}, default_bracket,
                             true, false);
    if (samples_out != nullptr) samples_out->push_back(ep.sample);
    ad::GradMap g = tape.backward(ep.objective_part);
    if (acc.empty()) {
      acc = std::move(g);
    } else {
      for (auto& [name, t] : acc) {
        const ad::Tensor& src = g.at(name);
        for (std::size_t k = 0; k < t.numel(); ++k) t[k] += src[k];
      }
    }
  }
  for (auto& [_, t] : acc)
    for (auto& v : t.data) v = -v / n;
  return acc;
}

namespace detail {

ad::GradMap exact_grads_with_bracket(const Graph& x, const ParamStore& ps,
                                     const ModelDims& dims, BracketFn bracket,
                                     bool include_pathwise) {
  check_enumerable(x);
  ad::Tape tape;
  EncoderParamsRef enc = bind_encoder(tape, ps, dims);
  DecoderParamsRef dec = bind_decoder(tape, ps, dims);
  ad::Var objective;
  for (const std::vector<int>& order : all_orders(x)) {
    Episode ep = run_episode(tape, x, enc, dec, nullptr, order, bracket,
                             include_pathwise, true);
    objective = objective.valid() ? ad::add(objective, ep.objective_part)
                                  : ep.objective_part;
  }
  return negate(tape.backward(objective));
}

}  // namespace detail

ad::GradMap exact_expectation_grads(const Graph& x, const ParamStore& ps,
                                    const ModelDims& dims) {
  return detail::exact_grads_with_bracket(x, ps, dims, default_bracket, true);
}

namespace {

struct BatchResult {
  ad::GradMap grads;
  double elbo_sum = 0.0;
  int sample_count = 0;
};

}  // namespace

std::vector<MetricsRow> train(const std::vector<Graph>& dataset,
                              const TrainConfig& cfg, ParamStore& params,
                              const TrainOutputs& outputs) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (params.size() == 0) throw std::invalid_argument("train: uninitialized params");

  const Rng root(cfg.seed);
  Adam adam({cfg.learning_rate});
  std::vector<MetricsRow> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<int> indices(dataset.size());
  std::iota(indices.begin(), indices.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    // Seeded in-place shuffle, independent of library distributions.
    Rng shuffle_rng = root.fork("shuffle", static_cast<std::uint64_t>(epoch));
    for (std::size_t i = indices.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.next_u64() % static_cast<std::uint64_t>(i));
      std::swap(indices[i - 1], indices[j]);
    }

    double elbo_sum = 0.0;
    long sample_count = 0;
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(indices.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const int b = static_cast<int>(stop - start);

      std::vector<BatchResult> parts = parallel_map(b, cfg.threads, [&](int k) {
        const int gi = indices[start + static_cast<std::size_t>(k)];
        Rng episode_rng = root.fork("episode", static_cast<std::uint64_t>(epoch),
                                    static_cast<std::uint64_t>(gi));
        BatchResult r;
        std::vector<ElboSample> samples;
        r.grads = reinforce_step_grads(dataset[static_cast<std::size_t>(gi)],
                                       params, cfg.dims, episode_rng,
                                       cfg.samples_per_graph, &samples);
        for (const ElboSample& s : samples) r.elbo_sum += s.elbo_term;
        r.sample_count = static_cast<int>(samples.size());
        return r;
      });

      ad::GradMap batch_grads = std::move(parts[0].grads);
      elbo_sum += parts[0].elbo_sum;
      sample_count += parts[0].sample_count;
      for (std::size_t k = 1; k < parts.size(); ++k) {
        for (auto& [name, t] : batch_grads) {
          const ad::Tensor& src = parts[k].grads.at(name);
          for (std::size_t i = 0; i < t.numel(); ++i) t[i] += src[i];
        }
        elbo_sum += parts[k].elbo_sum;
        sample_count += parts[k].sample_count;
      }
      for (auto& [_, t] : batch_grads)
        for (auto& v : t.data) v /= b;

      if (cfg.grad_clip > 0.0) clip_grad_norm(batch_grads, cfg.grad_clip);
      adam.step(params, batch_grads);
    }

    MetricsRow row;
    row.epoch = epoch;
    row.mean_neg_elbo = -elbo_sum / static_cast<double>(sample_count);

    if (cfg.eval_interval > 0 && epoch % cfg.eval_interval == 0) {
      const Rng eval_rng = root.fork("eval", static_cast<std::uint64_t>(epoch));
      row.gen_accuracy =
          generation_accuracy(params, cfg.dims, eval_rng.fork("accuracy"),
                              cfg.eval_samples, cfg.max_nodes, cfg.threads);
      row.perplexity =
          perplexity(dataset, params, cfg.dims, eval_rng.fork("perplexity"),
                     cfg.perplexity_samples, cfg.threads);
    }

    if (cfg.timings) {
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    history.push_back(row);

    if (!outputs.checkpoint_dir.empty() && cfg.checkpoint_interval > 0 &&
        epoch % cfg.checkpoint_interval == 0)
      save_checkpoint(outputs.checkpoint_dir + "/checkpoint_epoch" +
                          std::to_string(epoch) + ".json",
                      params, &cfg.dims);
  }

  if (!outputs.checkpoint_dir.empty())
    save_checkpoint(outputs.checkpoint_dir + "/checkpoint_final.json", params,
                    &cfg.dims);
  if (!outputs.metrics_csv.empty()) write_metrics_csv(outputs.metrics_csv, history);
  return history;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "epoch,mean_neg_elbo,gen_accuracy,perplexity,wall_ms\n";
  for (const MetricsRow& r : rows) {
    out << r.epoch << ',' << format_double(r.mean_neg_elbo) << ',';
    if (!std::isnan(r.gen_accuracy)) out << format_double(r.gen_accuracy);
    out << ',';
    if (!std::isnan(r.perplexity)) out << format_double(r.perplexity);
    out << ',' << format_double(r.wall_ms) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace sgvae
