#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hcls/errors.hpp"
#include "hcls/io.hpp"

using namespace hcls;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hcls_io_" + name + "_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

LoadedGraph parse(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in, "t.edges");
}

}  // namespace

TEST_CASE("edge list parsing") {
  SUBCASE("header keeps isolated nodes") {
    const LoadedGraph lg = parse("# nodes=5\n0 1\n1 3\n");
    CHECK(lg.graph.num_nodes() == 5);
    CHECK(lg.graph.num_edges() == 2);
    CHECK(lg.graph.has_edge(3, 1));
  }
  SUBCASE("duplicates in either orientation collapse") {
    const LoadedGraph lg = parse("# nodes=3\n0 1\n1 0\n0 1\n");
    CHECK(lg.graph.num_edges() == 1);
    CHECK(lg.duplicates == 2);
  }
  SUBCASE("self-loops are dropped and counted") {
    const LoadedGraph lg = parse("# nodes=4\n3 3\n0 1\n");
    CHECK(lg.self_loops == 1);
    CHECK(lg.graph.num_edges() == 1);
  }
  SUBCASE("comments and blank lines are skipped") {
    const LoadedGraph lg = parse("% konect style\n\n# comment\n1 2\n2 3\n");
    CHECK(lg.graph.num_edges() == 2);
  }
  SUBCASE("labels without a header are relabeled in numeric order") {
    const LoadedGraph lg = parse("10 2\n2 7\n");
    CHECK(lg.graph.num_nodes() == 3);
    REQUIRE(lg.labels.size() == 3);
    CHECK(lg.labels[0] == "2");
    CHECK(lg.labels[1] == "7");
    CHECK(lg.labels[2] == "10");
    CHECK(lg.graph.has_edge(0, 2));
    CHECK(lg.graph.has_edge(0, 1));
  }
  SUBCASE("string labels are relabeled") {
    const LoadedGraph lg = parse("b a\nc b\n");
    CHECK(lg.labels == std::vector<std::string>{"a", "b", "c"});
  }
}

TEST_CASE("malformed edge lists name the line") {
  try {
    parse("# nodes=4\n0 1\n2\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("t.edges:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("# only a comment\n"), DataError);
  CHECK_THROWS_AS(parse("# nodes=3\n0 5\n"), DataError);
  CHECK_THROWS_AS(load_edge_list("/nonexistent/file.edges"), DataError);
}

TEST_CASE("edge list round-trip") {
  Rng rng(1);
  const LatentConfiguration c = sample_positions(Geometry::Hyperbolic, 40, ModelParams{5.0, 5.0, 0.05}, rng);
  const Graph g = generate_graph(c, rng);
  std::ostringstream out;
  write_edge_list(out, g);
  CHECK(out.str().starts_with("# nodes=40\n"));
  CHECK(parse(out.str()).graph == g);
}

TEST_CASE("ground truth round-trip") {
  const fs::path dir = scratch_dir("truth");
  Rng rng(2);
  for (Geometry geo : {Geometry::Hyperbolic, Geometry::Euclidean}) {
    GroundTruth t{sample_positions(geo, 15, ModelParams{4.0, 3.5, 0.1}, rng), 77};
    save_ground_truth(dir / "t.json", t);
    const GroundTruth back = load_ground_truth(dir / "t.json");
    CHECK(back.seed == 77);
    CHECK(back.config.geometry() == geo);
    CHECK(back.config.params.R == 4.0);
    CHECK(back.config.params.alpha == 3.5);
    CHECK(back.config.params.T == 0.1);
    // Distances are reproduced to the last bit.
    CHECK(back.config.distance_matrix() == t.config.distance_matrix());
  }
  fs::remove_all(dir);
}

TEST_CASE("checkpoint round-trip and corruption") {
  const fs::path dir = scratch_dir("ckpt");
  Rng rng(3);
  const LatentConfiguration c = sample_positions(Geometry::Hyperbolic, 20, ModelParams{4.0, 4.0, 0.1}, rng);
  const Graph g = generate_graph(c, rng);
  VariationalConfig cfg;
  cfg.epochs = 20;
  cfg.hidden_dim = 8;
  cfg.fixed_T = 0.2;
  const VariationalState s = fit_vi(g, cfg);
  save_checkpoint(dir / "c.bin", s, g);
  const VariationalState back = load_checkpoint(dir / "c.bin");
  CHECK(back.model == s.model);
  CHECK(back.encoder.w1 == s.encoder.w1);
  CHECK(back.encoder.w2 == s.encoder.w2);
  CHECK(back.globals == s.globals);
  CHECK(back.fixed_T == s.fixed_T);
  CHECK(reconstruct_probabilities(g, back) == reconstruct_probabilities(g, s));
  const auto shape = checkpoint_graph_shape(dir / "c.bin");
  CHECK(shape.first == 20);
  CHECK(shape.second == g.num_edges());

  const auto size = fs::file_size(dir / "c.bin");
  fs::copy_file(dir / "c.bin", dir / "short.bin");
  fs::resize_file(dir / "short.bin", size - 16);
  CHECK_THROWS_AS(load_checkpoint(dir / "short.bin"), DataError);
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOTACKPT";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.bin"), DataError);
  fs::remove_all(dir);
}
