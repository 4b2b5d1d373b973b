// End-to-end checks of the command-line binary. The test runner exports
// SGVAE_BIN with the built executable's path.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string bin_path() {
  const char* bin = std::getenv("SGVAE_BIN");
  REQUIRE(bin != nullptr);
  return std::string(bin);
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = "\"" + bin_path() + "\" " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() /
               ("sgvae_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Shared tiny corpus: lengths 3..5, two graphs each.
std::string small_dataset(const fs::path& dir) {
  const std::string data = (dir / "data.jsonl").string();
  RunResult r = run("dataset --min-len 3 --max-len 5 --per-length 2 -o " + data);
  REQUIRE(r.code == 0);
  return data;
}

const std::string kFastTrain =
    " --epochs 2 --eval-interval 2 --eval-samples 20 --perplexity-samples 1"
    " --max-nodes 20 --batch-size 3";

}  // namespace

TEST_CASE("dataset subcommand writes the default 100-cycle corpus") {
  fs::path dir = fresh_dir("dataset");
  const std::string out = (dir / "cycles.jsonl").string();
  RunResult r = run("dataset -o " + out);
  CHECK(r.code == 0);
  CHECK(count_lines(slurp(out)) == 100);

  RunResult again = run("dataset -o " + (dir / "again.jsonl").string());
  CHECK(again.code == 0);
  CHECK(slurp(dir / "again.jsonl") == slurp(out));
  fs::remove_all(dir);
}

TEST_CASE("invalid arguments exit with code 2") {
  fs::path dir = fresh_dir("badargs");
  CHECK(run("dataset --min-len 2 -o " + (dir / "x.jsonl").string()).code == 2);
  CHECK(run("train").code == 2);
  CHECK(run("frobnicate").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("training runs are byte-reproducible across reruns and threads") {
  fs::path dir = fresh_dir("train");
  const std::string data = small_dataset(dir);
  const std::string common = "train --data " + data + kFastTrain + " --seed 3 -o ";

  fs::path a = dir / "a", b = dir / "b", c = dir / "c";
  REQUIRE(run(common + a.string()).code == 0);
  REQUIRE(run(common + b.string()).code == 0);
  REQUIRE(run(common + c.string() + " --threads 3").code == 0);

  CHECK(fs::exists(a / "config.txt"));
  const std::string metrics = slurp(a / "metrics.csv");
  CHECK(metrics.rfind("epoch,mean_neg_elbo,gen_accuracy,perplexity,wall_ms",
                      0) == 0);
  CHECK(metrics == slurp(b / "metrics.csv"));
  CHECK(metrics == slurp(c / "metrics.csv"));
  const std::string final_ck = slurp(a / "checkpoint_final.json");
  CHECK(final_ck == slurp(b / "checkpoint_final.json"));
  CHECK(final_ck == slurp(c / "checkpoint_final.json"));
  fs::remove_all(dir);
}

TEST_CASE("a zero learning rate leaves the initial parameters untouched") {
  fs::path dir = fresh_dir("lr0");
  const std::string data = small_dataset(dir);
  fs::path out = dir / "run";
  REQUIRE(run("train --data " + data + " --epochs 1 --eval-interval 0" +
              " --lr 0 --batch-size 3 -o " + out.string())
              .code == 0);
  CHECK(slurp(out / "checkpoint_init.json") ==
        slurp(out / "checkpoint_final.json"));
  fs::remove_all(dir);
}

TEST_CASE("eval reports an accuracy fraction on standard output") {
  fs::path dir = fresh_dir("evalacc");
  const std::string data = small_dataset(dir);
  fs::path out = dir / "run";
  REQUIRE(run("train --data " + data + kFastTrain + " -o " + out.string())
              .code == 0);
  const std::string ck = (out / "checkpoint_final.json").string();

  RunResult r = run("eval --checkpoint " + ck + " --n 20 --max-nodes 12");
  REQUIRE(r.code == 0);
  const double acc = std::stod(r.out);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);

  RunResult again = run("eval --checkpoint " + ck + " --n 20 --max-nodes 12");
  CHECK(again.out == r.out);

  RunResult ppl = run("eval --checkpoint " + ck +
                      " --mode perplexity --elbo-samples 1 --data " + data);
  REQUIRE(ppl.code == 0);
  CHECK(std::stod(ppl.out) > 0.0);

  RunResult emb = run("eval --checkpoint " + ck +
                      " --mode embed --per-length 2 --min-len 3 --max-len 4");
  REQUIRE(emb.code == 0);
  CHECK(emb.out.rfind("graph_id,cycle_len,z0,", 0) == 0);
  CHECK(count_lines(emb.out) == 5);  // header + 2 lengths x 2 rows

  RunResult interp = run("eval --checkpoint " + ck +
                         " --mode interpolate --points 3 --samples 20"
                         " --per-length 2 --min-len 3 --max-len 4"
                         " --max-nodes 8");
  REQUIRE(interp.code == 0);
  CHECK(interp.out.rfind("coord,mean,stderr,n_valid,n_total,cdf_3", 0) == 0);
  CHECK(count_lines(interp.out) == 4);  // header + 3 coordinates
  fs::remove_all(dir);
}

TEST_CASE("prior sampling is seeded, capped, and thread-invariant") {
  fs::path dir = fresh_dir("sample");
  const std::string data = small_dataset(dir);
  fs::path out = dir / "run";
  REQUIRE(run("train --data " + data + kFastTrain + " -o " + out.string())
              .code == 0);
  const std::string ck = (out / "checkpoint_final.json").string();

  RunResult r = run("sample --checkpoint " + ck +
                    " -n 5 --seed 7 --max-nodes 12");
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 5);
  CHECK(r.out.find("\"valid_cycle\":") != std::string::npos);

  RunResult again = run("sample --checkpoint " + ck +
                        " -n 5 --seed 7 --max-nodes 12");
  CHECK(again.out == r.out);
  RunResult threaded = run("sample --checkpoint " + ck +
                           " -n 5 --seed 7 --max-nodes 12 --threads 4");
  CHECK(threaded.out == r.out);

  RunResult single = run("sample --checkpoint " + ck +
                         " -n 4 --seed 1 --max-nodes 1");
  REQUIRE(single.code == 0);
  CHECK(count_lines(single.out) == 4);
  CHECK(single.out.find("\"valid_cycle\":true") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("I/O failures and unusable checkpoints use distinct exit codes") {
  fs::path dir = fresh_dir("codes");
  // missing dataset file: generic I/O failure
  CHECK(run("train --data " + (dir / "absent.jsonl").string() + " -o " +
            (dir / "r").string())
            .code == 3);
  // missing checkpoint file: generic I/O failure
  CHECK(run("eval --checkpoint " + (dir / "absent.json").string()).code == 3);
  // present but corrupt checkpoint
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"params\":{}}";
  }
  CHECK(run("eval --checkpoint " + (dir / "bad.json").string()).code == 4);
  // perplexity without a dataset is an argument error
  {
    std::ofstream junk(dir / "junk.json");
    junk << "{\"format_version\":1,\"params\":{}}";
  }
  CHECK(run("eval --checkpoint " + (dir / "junk.json").string() +
            " --mode perplexity")
            .code == 2);
  fs::remove_all(dir);
}
