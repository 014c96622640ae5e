#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("hcls_cli_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Runs the CLI with stdout captured to dir/stdout.txt; returns the exit code.
int run(const fs::path& dir, const std::string& args) {
  const std::string cmd = std::string(HCLS_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_files(const fs::path& dir, const std::string& suffix) {
  int k = 0;
  for (const auto& e : fs::directory_iterator(dir)) k += e.path().string().ends_with(suffix);
  return k;
}

}  // namespace

TEST_CASE("cli: info and usage errors") {
  TempDir t;
  CHECK(run(t.path, "info") == 0);
  CHECK(slurp(t.path / "stdout.txt").find("eigen") != std::string::npos);
  CHECK(run(t.path, "--help") == 0);
  CHECK(run(t.path, "no-such-command") == 1);
  CHECK(run(t.path, "fit") == 1);
  CHECK(run(t.path, "fit " + (t.path / "missing.edges").string()) != 0);
}

TEST_CASE("cli: generate is reproducible and feeds metrics and fit") {
  TempDir t;
  const fs::path a = t.path / "a", b = t.path / "b";
  CHECK(run(t.path, "generate --n 30,40 --R 3 --T 0.05 --reps 2 --seed 7 -o " + a.string()) == 0);
  CHECK(run(t.path, "generate --n 30,40 --R 3 --T 0.05 --reps 2 --seed 7 -o " + b.string()) == 0);
  CHECK(count_files(a, ".edges") == 4);
  CHECK(count_files(a, ".truth.json") == 4);
  for (const auto& e : fs::directory_iterator(a)) CHECK(slurp(e.path()) == slurp(b / e.path().filename()));

  const fs::path edges = a / "hyperbolic_N30_R3_T0.05_rep0.edges";
  const fs::path truth = a / "hyperbolic_N30_R3_T0.05_rep0.truth.json";
  REQUIRE(fs::exists(edges));
  REQUIRE(fs::exists(truth));
  CHECK(slurp(edges).starts_with("# nodes=30\n"));

  CHECK(run(t.path, "metrics " + edges.string() + " -o " + (t.path / "m.csv").string()) == 0);
  const std::string csv = slurp(t.path / "m.csv");
  CHECK(csv.starts_with("n,m,density,circuit_rank,"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const fs::path out = t.path / "fit";
  CHECK(run(t.path, "fit " + edges.string() + " --epochs 200 --hidden 16 --threshold 0.4 --truth " + truth.string() +
                        " -o " + out.string()) == 0);
  const auto report = nlohmann::json::parse(slurp(out / "eval.json"));
  CHECK(report.contains("auc"));
  CHECK(report.contains("accuracy"));
  CHECK(report.contains("pearson"));
  CHECK(report.contains("spearman"));
  CHECK(fs::exists(out / "checkpoint.bin"));

  CHECK(run(t.path, "export-embedding --checkpoint " + (out / "checkpoint.bin").string() + " --graph " +
                        edges.string() + " -o " + (t.path / "emb.csv").string() + " --svg " +
                        (t.path / "emb.svg").string()) == 0);
  const std::string emb = slurp(t.path / "emb.csv");
  CHECK(emb.starts_with("id,r,theta,poincare_rho,poincare_x,poincare_y\n"));
  CHECK(std::count(emb.begin(), emb.end(), '\n') == 31);
  CHECK(slurp(t.path / "emb.svg").starts_with("<svg"));

  // A checkpoint paired with the wrong graph is a data error.
  const fs::path other = a / "hyperbolic_N40_R3_T0.05_rep0.edges";
  CHECK(run(t.path, "export-embedding --checkpoint " + (out / "checkpoint.bin").string() + " --graph " +
                        other.string()) == 2);
  CHECK(run(t.path, "export-embedding --truth " + truth.string() + " --rotation-weights degree") == 1);
  CHECK(run(t.path, "info " + (out / "checkpoint.bin").string()) == 0);
}

TEST_CASE("cli: HMC fit and the large-graph guard") {
  TempDir t;
  CHECK(run(t.path, "generate --n 15 --R 3 --T 0.05 --reps 1 --seed 3 -o " + t.path.string()) == 0);
  const fs::path edges = t.path / "hyperbolic_N15_R3_T0.05_rep0.edges";
  const fs::path out = t.path / "hmc";
  CHECK(run(t.path, "fit " + edges.string() + " --engine hmc --warmup 60 --draws 20 --leapfrog 8 -o " +
                        out.string()) == 0);
  CHECK(slurp(out / "draws.csv").starts_with("iter,R,alpha,T\n"));
  CHECK(nlohmann::json::parse(slurp(out / "diagnostics.json")).contains("acceptance_rate"));

  {
    std::ofstream big(t.path / "big.edges");
    big << "# nodes=600\n";
    for (int i = 0; i + 1 < 600; ++i) big << i << ' ' << i + 1 << '\n';
  }
  CHECK(run(t.path, "fit " + (t.path / "big.edges").string() + " --engine hmc -o " + out.string()) == 1);
  CHECK(slurp(t.path / "stderr.txt").find("--force") != std::string::npos);
  CHECK(run(t.path, "fit " + edges.string() + " --engine hmc --model ecls -o " + out.string()) == 1);
}

TEST_CASE("cli: malformed input exits with a data error") {
  TempDir t;
  {
    std::ofstream bad(t.path / "bad.edges");
    bad << "# nodes=4\n0 1\nnot an edge\n";
  }
  CHECK(run(t.path, "metrics " + (t.path / "bad.edges").string()) == 2);
  CHECK(slurp(t.path / "stderr.txt").find(":3") != std::string::npos);
  CHECK(run(t.path, "fit " + (t.path / "bad.edges").string()) == 2);
}
