// Command-line front end: dataset generation, training, evaluation, and
// prior sampling. Exit codes: 0 success, 2 invalid arguments, 3 I/O or file
// format failure, 4 unusable checkpoint.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgvae/constructor.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/evaluation.hpp"
#include "sgvae/graph_io.hpp"
#include "sgvae/model.hpp"
#include "sgvae/parallel.hpp"
#include "sgvae/trainer.hpp"
#include "sgvae/util.hpp"

namespace {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw sgvae::GraphIoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw sgvae::GraphIoError("write failed for '" + path + "'");
}

sgvae::ParamStore init_params(const sgvae::ModelDims& dims,
                              std::uint64_t seed) {
  sgvae::ParamStore ps;
  const sgvae::Rng init = sgvae::Rng(seed).fork("init");
  sgvae::init_encoder_params(ps, dims, init);
  sgvae::init_decoder_params(ps, dims, init);
  return ps;
}

struct DatasetArgs {
  sgvae::DatasetSpec spec;
  std::string out;
};

struct TrainArgs {
  sgvae::TrainConfig cfg;
  std::string data;
  std::string out;
};

struct EvalArgs {
  std::string checkpoint;
  std::string mode = "accuracy";
  std::string out;   // directory; stdout when empty
  std::string data;  // perplexity only
  std::uint64_t seed = 0;
  int n = 100;
  int per_length = 40;
  int min_len = 5;
  int max_len = 14;
  int points = 10;
  int samples = 1000;
  int max_nodes = 50;
  int elbo_samples = 4;
  double eps_factor = 3.0;
  int threads = 1;
};

struct SampleArgs {
  std::string checkpoint;
  std::string out;  // stdout when empty
  std::uint64_t seed = 0;
  int n = 10;
  int max_nodes = 50;
  int threads = 1;
};

void add_dims_options(CLI::App* cmd, sgvae::ModelDims& dims) {
  cmd->add_option("--node-dim", dims.node_dim, "node/latent dimension d")
      ->capture_default_str();
  cmd->add_option("--edge-dim", dims.edge_dim, "edge embedding dimension")
      ->capture_default_str();
  cmd->add_option("--graph-dim", dims.graph_dim, "readout dimension")
      ->capture_default_str();
  cmd->add_option("--prop-rounds", dims.prop_rounds, "message-passing rounds")
      ->capture_default_str();
  cmd->add_option("--edge-types", dims.edge_types, "edge type count")
      ->capture_default_str();
  cmd->add_option("--node-types", dims.node_types, "node type count")
      ->capture_default_str();
  cmd->add_option("--hidden", dims.hidden, "decision-network hidden width")
      ->capture_default_str();
}

void run_dataset(const DatasetArgs& a) {
  a.spec.validate();
  sgvae::build_dataset(a.spec, a.out);
}

void run_train(CLI::App* cmd, const TrainArgs& a) {
  a.cfg.validate();
  std::vector<sgvae::Graph> data = sgvae::read_graph_jsonl(
      a.data, a.cfg.dims.node_dim, a.cfg.dims.edge_dim);
  if (data.empty())
    throw sgvae::GraphIoError("dataset '" + a.data + "' holds no graphs");

  fs::create_directories(a.out);
  write_text_file(a.out + "/config.txt", cmd->config_to_str(true, false));

  sgvae::ParamStore ps = init_params(a.cfg.dims, a.cfg.seed);
  sgvae::save_checkpoint(a.out + "/checkpoint_init.json", ps, &a.cfg.dims);
  sgvae::TrainOutputs outputs{a.out + "/metrics.csv", a.out};
  sgvae::train(data, a.cfg, ps, outputs);
}

// Writes `text` to <dir>/<name> when dir is set, else to standard output.
void emit(const std::string& dir, const std::string& name,
          const std::string& text) {
  if (dir.empty())
    std::cout << text;
  else
    write_text_file(dir + "/" + name, text);
}

void run_eval(CLI::App* cmd, const EvalArgs& a) {
  const sgvae::Checkpoint ck = sgvae::load_checkpoint(a.checkpoint);
  const sgvae::ModelDims dims = ck.dims.value_or(sgvae::ModelDims{});
  const sgvae::Rng rng = sgvae::Rng(a.seed).fork("eval");
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text_file(a.out + "/config.txt", cmd->config_to_str(true, false));
  }

  if (a.mode == "accuracy") {
    const double acc = sgvae::generation_accuracy(ck.params, dims, rng, a.n,
                                                  a.max_nodes, a.threads);
    std::cout << sgvae::format_double(acc) << '\n';
    if (!a.out.empty())
      write_text_file(a.out + "/accuracy.csv",
                      "n,accuracy\n" + std::to_string(a.n) + "," +
                          sgvae::format_double(acc) + "\n");
  } else if (a.mode == "embed") {
    const std::vector<sgvae::LatentRow> rows =
        sgvae::embed_corpus(ck.params, dims, rng, a.per_length, a.min_len,
                            a.max_len, a.threads);
    if (a.out.empty())
      sgvae::write_latent_csv(std::cout, rows);
    else
      sgvae::write_latent_csv(a.out + "/latent.csv", rows);
  } else if (a.mode == "interpolate") {
    const std::vector<sgvae::LatentRow> rows =
        sgvae::embed_corpus(ck.params, dims, rng.fork("corpus"), a.per_length,
                            a.min_len, a.max_len, a.threads);
    const sgvae::InterpolationReport report = sgvae::interpolation_report(
        ck.params, dims, rng.fork("decode"), rows, a.points, a.samples,
        a.max_nodes, a.eps_factor, a.threads);
    if (a.out.empty())
      sgvae::write_interpolation_csv(std::cout, report);
    else
      sgvae::write_interpolation_csv(a.out + "/interpolation.csv", report);
  } else if (a.mode == "perplexity") {
    if (a.data.empty())
      throw CLI::ValidationError("--data is required for --mode perplexity");
    const std::vector<sgvae::Graph> data =
        sgvae::read_graph_jsonl(a.data, dims.node_dim, dims.edge_dim);
    if (data.empty())
      throw sgvae::GraphIoError("dataset '" + a.data + "' holds no graphs");
    const double ppl = sgvae::perplexity(data, ck.params, dims, rng,
                                         a.elbo_samples, a.threads);
    std::cout << sgvae::format_double(ppl) << '\n';
    if (!a.out.empty())
      write_text_file(
          a.out + "/perplexity.csv",
          "perplexity,elbo_samples,definition\n" + sgvae::format_double(ppl) +
              "," + std::to_string(a.elbo_samples) +
              ",exp(mean(-elbo/node_count))\n");
  } else {
    throw CLI::ValidationError("--mode must be one of accuracy|embed|interpolate|perplexity");
  }
}

void run_sample(const SampleArgs& a) {
  if (a.n < 1) throw CLI::ValidationError("-n must be >= 1");
  const sgvae::Checkpoint ck = sgvae::load_checkpoint(a.checkpoint);
  const sgvae::ModelDims dims = ck.dims.value_or(sgvae::ModelDims{});
  const sgvae::Rng rng = sgvae::Rng(a.seed).fork("sample");

  std::vector<std::string> lines =
      sgvae::parallel_map(a.n, a.threads, [&](int i) {
        sgvae::Rng draw = rng.fork("draw", static_cast<std::uint64_t>(i));
        sgvae::ad::Tensor z(sgvae::ad::Shape{dims.node_dim});
        for (auto& v : z.data) v = draw.normal();
        sgvae::ad::Tape tape;
        sgvae::DecoderParamsRef dec = bind_decoder(tape, ck.params, dims);
        sgvae::DecodeResult r =
            sgvae::generate(tape, tape.constant(z), dec, draw, a.max_nodes);
        return sgvae::graph_to_jsonl_line(r.graph, true);
      });

  std::string text;
  for (const std::string& line : lines) {
    text += line;
    text += '\n';
  }
  if (a.out.empty())
    std::cout << text;
  else
    write_text_file(a.out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential graph VAE: cycle dataset, training, evaluation"};
  app.require_subcommand(1);

  DatasetArgs da;
  CLI::App* dataset = app.add_subcommand("dataset", "generate a cycle corpus");
  dataset->add_option("--min-len", da.spec.min_len, "shortest cycle (>= 3)")
      ->capture_default_str();
  dataset->add_option("--max-len", da.spec.max_len, "longest cycle")
      ->capture_default_str();
  dataset->add_option("--per-length", da.spec.graphs_per_length,
                      "graphs per length")
      ->capture_default_str();
  dataset->add_option("--seed", da.spec.seed, "generation seed")
      ->capture_default_str();
  dataset->add_option("-o,--out", da.out, "output JSONL path")->required();

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "train on a dataset file");
  train->set_config("--config", "", "key=value file; flags take precedence");
  train->add_option("--data", ta.data, "dataset JSONL path")->required();
  train->add_option("-o,--out", ta.out, "run directory")->required();
  add_dims_options(train, ta.cfg.dims);
  train->add_option("--lr", ta.cfg.learning_rate, "Adam learning rate")
      ->capture_default_str();
  train->add_option("--batch-size", ta.cfg.batch_size, "minibatch size")
      ->capture_default_str();
  train->add_option("--epochs", ta.cfg.epochs, "training epochs")
      ->capture_default_str();
  train->add_option("--samples-per-graph", ta.cfg.samples_per_graph,
                    "encoder trajectories per graph per step")
      ->capture_default_str();
  train->add_option("--max-nodes", ta.cfg.max_nodes, "generation cap")
      ->capture_default_str();
  train->add_option("--seed", ta.cfg.seed, "global seed")->capture_default_str();
  train->add_option("--eval-interval", ta.cfg.eval_interval,
                    "epochs between accuracy/perplexity rows (0 = never)")
      ->capture_default_str();
  train->add_option("--eval-samples", ta.cfg.eval_samples,
                    "prior draws per accuracy evaluation")
      ->capture_default_str();
  train->add_option("--perplexity-samples", ta.cfg.perplexity_samples,
                    "bound samples per graph for perplexity")
      ->capture_default_str();
  train->add_option("--checkpoint-interval", ta.cfg.checkpoint_interval,
                    "epochs between checkpoints (0 = final only)")
      ->capture_default_str();
  train->add_option("--grad-clip", ta.cfg.grad_clip,
                    "global-norm gradient cap (0 = off)")
      ->capture_default_str();
  train->add_option("--threads", ta.cfg.threads, "worker threads")
      ->capture_default_str();
  train->add_flag("--timings", ta.cfg.timings,
                  "write real wall_ms values (breaks byte-reproducibility)");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint JSON path")
      ->required();
  eval->add_option("--mode", ea.mode,
                   "accuracy | embed | interpolate | perplexity")
      ->capture_default_str();
  eval->add_option("-o,--out", ea.out, "output directory (default: stdout)");
  eval->add_option("--data", ea.data, "dataset path (perplexity mode)");
  eval->add_option("--seed", ea.seed, "evaluation seed")->capture_default_str();
  eval->add_option("--n", ea.n, "prior draws for accuracy")
      ->capture_default_str();
  eval->add_option("--per-length", ea.per_length, "corpus rows per length")
      ->capture_default_str();
  eval->add_option("--min-len", ea.min_len, "corpus shortest cycle")
      ->capture_default_str();
  eval->add_option("--max-len", ea.max_len, "corpus longest cycle")
      ->capture_default_str();
  eval->add_option("--points", ea.points, "interpolation coordinates")
      ->capture_default_str();
  eval->add_option("--samples", ea.samples, "decodes per coordinate")
      ->capture_default_str();
  eval->add_option("--max-nodes", ea.max_nodes, "generation cap")
      ->capture_default_str();
  eval->add_option("--elbo-samples", ea.elbo_samples,
                   "bound samples per graph (perplexity mode)")
      ->capture_default_str();
  eval->add_option("--eps-factor", ea.eps_factor,
                   "cluster threshold multiple of median NN distance")
      ->capture_default_str();
  eval->add_option("--threads", ea.threads, "worker threads")
      ->capture_default_str();

  SampleArgs sa;
  CLI::App* sample = app.add_subcommand("sample", "sample graphs from the prior");
  sample->add_option("--checkpoint", sa.checkpoint, "checkpoint JSON path")
      ->required();
  sample->add_option("-n", sa.n, "number of samples")->capture_default_str();
  sample->add_option("--max-nodes", sa.max_nodes, "generation cap")
      ->capture_default_str();
  sample->add_option("--seed", sa.seed, "sampling seed")->capture_default_str();
  sample->add_option("-o,--out", sa.out, "output JSONL path (default: stdout)");
  sample->add_option("--threads", sa.threads, "worker threads")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (dataset->parsed()) run_dataset(da);
    if (train->parsed()) run_train(train, ta);
    if (eval->parsed()) run_eval(eval, ea);
    if (sample->parsed()) run_sample(sa);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const sgvae::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::out_of_range& e) {
    // Raised when a loaded checkpoint is missing a parameter the model needs.
    std::cerr << "error: checkpoint incompatible: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
