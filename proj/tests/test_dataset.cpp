#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "sgvae/dataset.hpp"
#include "sgvae/graph_io.hpp"

using namespace sgvae;

TEST_CASE("make_cycle builds what it promises") {
  Graph c5 = make_cycle(5);
  CHECK(c5.node_count() == 5);
  CHECK(c5.edge_count() == 5);
  for (int v : c5.node_ids()) {
    CHECK(c5.degree(v) == 2);
    CHECK(c5.node(v).node_type == 0);
  }
  CHECK(c5.is_valid_cycle());
  CHECK(c5.node_ids() == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(c5.has_edge(0, 4));
  CHECK(c5.has_edge(2, 3));

  CHECK(make_cycle(3).is_valid_cycle());
  CHECK(make_cycle(14).is_valid_cycle());
  CHECK_THROWS_AS(make_cycle(2), std::invalid_argument);

  Graph custom = make_cycle(4, 3, 2);
  CHECK(custom.node_dim() == 3);
  CHECK(custom.edge_dim() == 2);
  custom.audit();
}

TEST_CASE("default corpus is ten cycles each of lengths five to fourteen") {
  DatasetSpec spec;
  auto graphs = make_dataset(spec);
  REQUIRE(graphs.size() == 100);
  std::map<int, int> histogram;
  for (const auto& g : graphs) {
    CHECK(g.is_valid_cycle());
    ++histogram[int(g.node_count())];
  }
  CHECK(histogram.size() == 10);
  for (int len = 5; len <= 14; ++len) CHECK(histogram[len] == 10);
  // lengths ascending
  for (std::size_t i = 1; i < graphs.size(); ++i)
    CHECK(graphs[i].node_count() >= graphs[i - 1].node_count());
}

TEST_CASE("spec validation names its constraints") {
  DatasetSpec bad;
  bad.min_len = 2;
  CHECK_THROWS_WITH_AS(bad.validate(), "dataset: min_len must be >= 3",
                       std::invalid_argument);
  DatasetSpec inverted;
  inverted.min_len = 8;
  inverted.max_len = 5;
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
  DatasetSpec none;
  none.graphs_per_length = 0;
  CHECK_THROWS_AS(none.validate(), std::invalid_argument);
}

TEST_CASE("single-graph spec emits one triangle line") {
  DatasetSpec spec;
  spec.min_len = 3;
  spec.max_len = 3;
  spec.graphs_per_length = 1;
  auto graphs = make_dataset(spec);
  REQUIRE(graphs.size() == 1);
  CHECK(graphs[0].node_count() == 3);
  CHECK(graphs[0].is_valid_cycle());
}

TEST_CASE("dataset files round-trip and rebuild byte-identically") {
  auto dir = std::filesystem::temp_directory_path() /
             ("sgvae_ds_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string a = (dir / "a.jsonl").string();
  std::string b = (dir / "b.jsonl").string();

  DatasetSpec spec;
  build_dataset(spec, a);
  build_dataset(spec, b);

  std::ifstream fa(a), fb(b);
  std::string ca((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  CHECK(ca == cb);
  CHECK(std::count(ca.begin(), ca.end(), '\n') == 100);

  auto loaded = read_graph_jsonl(a, 5, 5);
  REQUIRE(loaded.size() == 100);
  for (const auto& g : loaded) CHECK(g.is_valid_cycle());
  CHECK(graph_to_jsonl_line(loaded[0]) == graph_to_jsonl_line(make_cycle(5)));
  std::filesystem::remove_all(dir);
}
