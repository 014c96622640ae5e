// hcls: command-line front end.
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcls/embedding.hpp"
#include "hcls/errors.hpp"
#include "hcls/eval.hpp"
#include "hcls/experiment.hpp"
#include "hcls/generative.hpp"
#include "hcls/io.hpp"
#include "hcls/metrics.hpp"
#include "hcls/vi.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hcls;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr int kHmcNodeLimit = 500;

std::string default_output_dir() {
  const char* env = std::getenv("HCLS_OUTPUT_DIR");
  return env && *env ? env : ".";
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Accepts a scalar or an array.
template <class T>
std::vector<T> json_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

LoadedGraph load_graph_reporting(const fs::path& path) {
  LoadedGraph g = load_edge_list(path);
  if (g.self_loops > 0) {
    std::cerr << "warning: " << path.string() << ": dropped " << g.self_loops << " self-loop(s)\n";
  }
  if (g.duplicates > 0) {
    std::cerr << "warning: " << path.string() << ": dropped " << g.duplicates << " duplicate edge(s)\n";
  }
  return g;
}

bool labels_are_identity(const std::vector<std::string>& labels) {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != std::to_string(k)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config;
  std::string out = default_output_dir();
  std::vector<int> n{100};
  std::vector<double> R{5.0};
  std::vector<double> T{0.01};
  std::string geometry = "hyperbolic";
  std::string link = "fermi-dirac";
  int reps = 1;
  std::optional<double> alpha;
  std::uint64_t seed = 1;
};

LinkFunction parse_link_name(const std::string& name) {
  if (name == "fermi-dirac") return LinkFunction::FermiDirac;
  if (name == "two-logistic") return LinkFunction::TwoLogistic;
  if (name == "exponential") return LinkFunction::Exponential;
  throw ConfigError("unknown link '" + name + "' (expected fermi-dirac, two-logistic or exponential)");
}

int cmd_generate(GenerateArgs a, const CLI::App& sub) {
  if (!a.config.empty()) {
    const json c = read_json(a.config);
    try {
      // Command-line flags win over the file.
      if (c.contains("N") && !sub.count("--n")) a.n = json_list<int>(c["N"]);
      if (c.contains("R") && !sub.count("--R")) a.R = json_list<double>(c["R"]);
      if (c.contains("T") && !sub.count("--T")) a.T = json_list<double>(c["T"]);
      if (c.contains("geometry") && !sub.count("--geometry")) a.geometry = c["geometry"].get<std::string>();
      if (c.contains("link") && !sub.count("--link")) a.link = c["link"].get<std::string>();
      if (c.contains("reps") && !sub.count("--reps")) a.reps = c["reps"].get<int>();
      if (c.contains("alpha") && !sub.count("--alpha")) a.alpha = c["alpha"].get<double>();
      if (c.contains("seed") && !sub.count("--seed")) a.seed = c["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ConfigError(a.config + ": " + e.what());
    }
  }
  const Geometry geometry = parse_geometry(a.geometry);
  const LinkFunction link = parse_link_name(a.link);
  if (a.reps < 1) throw ConfigError("reps must be at least 1");

  fs::create_directories(a.out);
  int written = 0;
  for (const int n : a.n) {
    if (n < 2) throw ConfigError("N must be at least 2");
    for (const double R : a.R) {
      for (const double T : a.T) {
        const GridCell cell{n, R, geometry, T};
        for (int rep = 0; rep < a.reps; ++rep) {
          const std::uint64_t seed = replicate_seed(a.seed, cell, rep);
          SimulatedGraph sim;
          if (geometry == Geometry::Euclidean && !a.alpha && link == LinkFunction::FermiDirac) {
            sim = simulate(cell, seed);
          } else {
            ModelParams params{R, a.alpha.value_or(R), T};
            params.validate();
            Rng rng(seed);
            sim.truth = sample_positions(geometry, n, params, rng);
            sim.truth.link = link;
            sim.graph = generate_graph(sim.truth, rng);
          }
          const std::string stem = std::string(to_string(geometry)) + "_N" + std::to_string(n) + "_R" + fmt(R) +
                                   "_T" + fmt(T) + "_rep" + std::to_string(rep);
          save_edge_list(fs::path(a.out) / (stem + ".edges"), sim.graph);
          save_ground_truth(fs::path(a.out) / (stem + ".truth.json"), GroundTruth{sim.truth, seed});
          ++written;
        }
      }
    }
  }
  std::cout << "wrote " << written << " graph(s) to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_metrics(const MetricsArgs& a) {
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw DataError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  write_metrics_header(out);
  for (const std::string& path : a.inputs) {
    const LoadedGraph g = load_graph_reporting(path);
    write_metrics_row(out, metric_panel(g.graph));
  }
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string graph;
  std::string engine = "vi";
  std::string model = "hcls";
  std::string config;
  std::string truth;
  std::string out = default_output_dir();
  std::uint64_t seed = 1;
  bool force = false;
  double threshold = 0.5;
  double fixed_T = 0.5;
  std::optional<int> epochs, hidden, warmup, draws, leapfrog;
  std::optional<double> lr;
};

void apply_fit_config(const json& c, FitOptions& o) {
  o.vi.epochs = c.value("epochs", o.vi.epochs);
  o.vi.learning_rate = c.value("learning_rate", o.vi.learning_rate);
  o.vi.hidden_dim = c.value("hidden_dim", o.vi.hidden_dim);
  o.vi.n_mc = c.value("n_mc", o.vi.n_mc);
  o.vi.clip_norm = c.value("clip_norm", o.vi.clip_norm);
  o.vi.warm_start_epochs = c.value("warm_start_epochs", o.vi.warm_start_epochs);
  o.hmc.warmup = c.value("warmup", o.hmc.warmup);
  o.hmc.draws = c.value("draws", o.hmc.draws);
  o.hmc.n_leapfrog = c.value("n_leapfrog", o.hmc.n_leapfrog);
  o.hmc.step_size = c.value("step_size", o.hmc.step_size);
  o.hmc.target_accept = c.value("target_accept", o.hmc.target_accept);
  o.hmc.thin = c.value("thin", o.hmc.thin);
  o.hmc.init_optim_steps = c.value("init_optim_steps", o.hmc.init_optim_steps);
  o.fixed_T = c.value("fixed_T", o.fixed_T);
}

int cmd_fit(const FitArgs& a, const CLI::App& sub) {
  FitOptions options;
  options.engine = parse_engine(a.engine);
  const FitModel model = parse_fit_model(a.model);
  if (!a.config.empty()) {
    try {
      apply_fit_config(read_json(a.config), options);
    } catch (const json::exception& e) {
      throw ConfigError(a.config + ": " + e.what());
    }
  }
  if (sub.count("--fixed-T") || a.config.empty()) options.fixed_T = a.fixed_T;
  if (a.epochs) options.vi.epochs = *a.epochs;
  if (a.hidden) options.vi.hidden_dim = *a.hidden;
  if (a.lr) options.vi.learning_rate = *a.lr;
  if (a.warmup) options.hmc.warmup = *a.warmup;
  if (a.draws) options.hmc.draws = *a.draws;
  if (a.leapfrog) options.hmc.n_leapfrog = *a.leapfrog;
  options.vi.seed = a.seed;
  options.hmc.seed = a.seed;

  const LoadedGraph loaded = load_graph_reporting(a.graph);
  const Graph& g = loaded.graph;
  if (g.num_edges() == 0) throw DataError(a.graph + ": graph has no edges");

  if (options.engine == Engine::Hmc && g.num_nodes() > kHmcNodeLimit) {
    std::cerr << "warning: HMC costs O(N^2) per gradient evaluation and N = " << g.num_nodes() << " exceeds "
              << kHmcNodeLimit << "; the VI engine is the scalable option\n";
    if (!a.force) {
      std::cerr << "error: pass --force to run HMC anyway\n";
      return kExitUsage;
    }
  }

  std::optional<GroundTruth> truth;
  if (!a.truth.empty()) {
    truth = load_ground_truth(a.truth);
    if (truth->config.size() != g.num_nodes()) {
      throw DataError(a.truth + ": truth has " + std::to_string(truth->config.size()) + " nodes, graph has " +
                      std::to_string(g.num_nodes()));
    }
  }

  const FitOutcome outcome = fit_model(g, model, options);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (!labels_are_identity(loaded.labels)) save_label_mapping(dir / "labels.csv", loaded.labels);
  if (outcome.vi_state) {
    save_checkpoint(dir / "checkpoint.bin", *outcome.vi_state, g);
  }
  if (outcome.draws) {
    save_draws_csv(dir / "draws.csv", *outcome.draws);
    save_diagnostics_json(dir / "diagnostics.json", *outcome.draws);
    save_position_draws(dir / "positions.bin", *outcome.draws);
    if (outcome.draws->diagnostic_failure) {
      std::cerr << "warning: sampler diagnostics flagged a problem (see diagnostics.json)\n";
    }
  }

  EvalReport report;
  report.auc = auc(outcome.probabilities, g);
  report.accuracy = accuracy(outcome.probabilities, g, a.threshold);
  if (truth) {
    const Correlations c = distance_correlations(truth->config.distance_matrix(), outcome.distances);
    report.pearson = c.pearson;
    report.spearman = c.spearman;
  }
  save_eval_json(dir / "eval.json", report);

  json j{{"auc", report.auc}, {"accuracy", report.accuracy}};
  if (report.pearson) {
    j["pearson"] = *report.pearson;
    j["spearman"] = *report.spearman;
  }
  std::cout << j.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string protocol;
  std::string out = default_output_dir();
  bool full = false;
  std::optional<int> reps;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::vector<int> n;
  std::vector<double> R;
  std::string engine = "vi";
  std::optional<int> epochs;
  bool quiet = false;
};

std::vector<GridCell> grid(const std::vector<int>& ns, const std::vector<double>& Rs, Geometry geometry, double T) {
  std::vector<GridCell> cells;
  for (const int n : ns) {
    for (const double R : Rs) cells.push_back({n, R, geometry, T});
  }
  return cells;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  body(f);
  std::cout << "wrote " << path.string() << '\n';
}

int cmd_experiment(const ExperimentArgs& a) {
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const ProgressFn progress = a.quiet ? ProgressFn{} : ProgressFn([](const std::string& s) { std::cerr << s << '\n'; });

  if (a.protocol == "fig5") {
    EnsembleOptions e;
    e.replicates = a.reps.value_or(a.full ? 1000 : 100);
    e.seed = a.seed;
    if (!a.n.empty()) e.n = a.n.front();
    if (!a.R.empty()) e.R = a.R.front();
    const std::vector<Ensemble> ensembles = run_tree_likeness(e, progress);
    write_file(dir / "fig5_summary.csv", [&](std::ostream& o) { write_ensemble_summary_csv(o, ensembles); });
    write_file(dir / "fig5_panels.csv", [&](std::ostream& o) { write_ensemble_panels_csv(o, ensembles); });
    return 0;
  }

  ReconstructionStudy study;
  study.seed = a.seed;
  study.jobs = a.jobs;
  study.fit.engine = parse_engine(a.engine);
  if (a.epochs) study.fit.vi.epochs = *a.epochs;
  const auto pick_n = [&](std::vector<int> d) { return a.n.empty() ? d : a.n; };
  const auto pick_R = [&](std::vector<double> d) { return a.R.empty() ? d : a.R; };

  if (a.protocol == "table2") {
    study.cells = grid(pick_n({30, 50, 100, 150, 200}), pick_R({3, 5, 7, 10}), Geometry::Hyperbolic, 0.01);
    study.replicates = a.reps.value_or(a.full ? 30 : 3);
  } else if (a.protocol == "fig8") {
    std::vector<int> ns{50, 100, 150, 200, 500, 1000};
    if (a.full) ns.push_back(5000);
    study.cells = grid(pick_n(ns), pick_R({3, 5, 7, 10}), Geometry::Hyperbolic, 0.01);
    study.replicates = a.reps.value_or(a.full ? 10 : 3);
    study.models = {FitModel::Hcls, FitModel::Ecls};
  } else if (a.protocol == "misspec") {
    const std::vector<int> ns = pick_n({50, 100});
    const std::vector<double> Rs = pick_R({5});
    for (auto [geometry, T] : {std::pair{Geometry::Euclidean, 0.5}, std::pair{Geometry::Hyperbolic, 0.01},
                               std::pair{Geometry::Hyperbolic, 0.5}}) {
      for (const GridCell& c : grid(ns, Rs, geometry, T)) study.cells.push_back(c);
    }
    study.replicates = a.reps.value_or(a.full ? 10 : 3);
  } else {
    throw ConfigError("unknown protocol '" + a.protocol + "'");
  }
  if (study.replicates < 1) throw ConfigError("reps must be at least 1");
  if (study.fit.engine == Engine::Hmc) {
    for (const FitModel m : study.models) {
      if (m == FitModel::Ecls) throw ConfigError("the HMC engine fits hyperbolic models only; use --engine vi");
    }
  }

  const ReconstructionResult result = run_reconstruction(study, progress);
  write_file(dir / (a.protocol + ".csv"), [&](std::ostream& o) { write_comparison_csv(o, study, result); });
  write_file(dir / (a.protocol + "_records.csv"), [&](std::ostream& o) { write_records_csv(o, result); });
  if (a.protocol == "misspec") {
    write_file(dir / "misspec_pairwise.csv", [&](std::ostream& o) { write_pairwise_csv(o, study, result); });
  }
  return 0;
}

// ---------------------------------------------------------------- export-embedding

struct ExportArgs {
  std::string checkpoint;
  std::string truth;
  std::string graph;
  std::string reference;
  std::string out;
  std::string svg;
  std::string weights = "degree";
};

std::vector<EuclideanPoint> read_reference_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  std::vector<EuclideanPoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (lineno == 1 && line.find_first_not_of("0123456789.,-+eE \t") != std::string::npos) continue;  // header
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string a, b, c;
    if (!std::getline(s, a, ',') || !std::getline(s, b, ',') || !std::getline(s, c, ',')) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected id,x,y");
    }
    try {
      pts.push_back({std::stod(b), std::stod(c)});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected id,x,y");
    }
  }
  return pts;
}

int cmd_export(const ExportArgs& a) {
  if (a.checkpoint.empty() == a.truth.empty()) throw ConfigError("give exactly one of --checkpoint or --truth");
  const RotationWeights kind = parse_rotation_weights(a.weights);

  std::optional<Graph> graph;
  if (!a.graph.empty()) graph = load_graph_reporting(a.graph).graph;

  LatentConfiguration config;
  if (!a.checkpoint.empty()) {
    if (!graph) throw ConfigError("--checkpoint needs --graph (the encoder reads the adjacency)");
    const auto [n, m] = checkpoint_graph_shape(a.checkpoint);
    if (n != graph->num_nodes() || m != graph->num_edges()) {
      throw DataError(a.checkpoint + ": checkpoint was fitted to a graph with n=" + std::to_string(n) +
                      ", m=" + std::to_string(m));
    }
    config = decoded_configuration(*graph, load_checkpoint(a.checkpoint));
  } else {
    config = load_ground_truth(a.truth).config;
  }
  const int n = config.size();
  if (graph && graph->num_nodes() != n) throw DataError("graph and embedding sizes differ");
  if (!graph && kind == RotationWeights::Degree) {
    throw ConfigError("degree weights need --graph; pass it or use --rotation-weights uniform");
  }
  const Eigen::VectorXd w = graph ? rotation_weights(*graph, kind) : Eigen::VectorXd::Ones(n);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw DataError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  out.precision(17);

  std::string svg;
  if (config.geometry() == Geometry::Hyperbolic) {
    const auto& pts = std::get<std::vector<PolarPoint>>(config.positions);
    const std::vector<PolarPoint> rotated = canonical_rotation(pts, w);
    out << "id,r,theta,poincare_rho,poincare_x,poincare_y\n";
    for (int i = 0; i < n; ++i) {
      const PoincarePoint p = to_poincare(rotated[static_cast<std::size_t>(i)]);
      out << i << ',' << rotated[static_cast<std::size_t>(i)].r << ',' << rotated[static_cast<std::size_t>(i)].theta
          << ',' << p.rho << ',' << p.x() << ',' << p.y() << '\n';
    }
    if (!a.svg.empty()) svg = embedding_svg(graph ? *graph : Graph(n), rotated);
  } else if (config.geometry() == Geometry::Euclidean) {
    const auto& pts = std::get<std::vector<EuclideanPoint>>(config.positions);
    std::vector<EuclideanPoint> aligned;
    if (!a.reference.empty()) {
      const std::vector<EuclideanPoint> ref = read_reference_csv(a.reference);
      if (static_cast<int>(ref.size()) != n) throw DataError(a.reference + ": reference has a different node count");
      aligned = procrustes_align(pts, ref);
    } else {
      aligned = canonical_rotation(pts, w);
    }
    out << "id,x,y\n";
    for (int i = 0; i < n; ++i) {
      out << i << ',' << aligned[static_cast<std::size_t>(i)].x << ',' << aligned[static_cast<std::size_t>(i)].y
          << '\n';
    }
    if (!a.svg.empty()) svg = embedding_svg(graph ? *graph : Graph(n), aligned);
  } else {
    throw ConfigError("export supports hyperbolic and Euclidean embeddings");
  }
  if (!a.svg.empty()) {
    std::ofstream s(a.svg);
    if (!s) throw DataError("cannot write " + a.svg);
    s << svg;
  }
  return 0;
}

// ---------------------------------------------------------------- info

int cmd_info(const std::string& path) {
  std::cout << "hcls " << HCLS_VERSION << "\n"
            << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "\n";
  if (path.empty()) {
    std::cout << "subcommands: generate, metrics, fit, experiment, export-embedding, info\n";
    return 0;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  char magic[8] = {};
  f.read(magic, 8);
  if (f.gcount() == 8 && std::string(magic, 8) == "HCLSVI01") {
    const VariationalState s = load_checkpoint(path);
    const auto [n, m] = checkpoint_graph_shape(path);
    const ModelParams p = s.params();
    std::cout << "vi checkpoint: model " << (s.model == LatentModel::Hyperbolic ? "hyperbolic" : "euclidean")
              << ", graph n=" << n << " m=" << m << ", hidden " << s.encoder.hidden() << ", step " << s.step
              << "\nR " << p.R << ", alpha " << p.alpha << ", T " << p.T;
    if (s.model == LatentModel::Euclidean) std::cout << ", tau " << s.tau();
    if (!s.elbo_trace.empty()) std::cout << "\nfinal elbo " << s.elbo_trace.back();
    std::cout << '\n';
    return 0;
  }
  if (path.size() > 5 && path.ends_with(".json")) {
    const GroundTruth t = load_ground_truth(path);
    const ModelParams& p = t.config.params;
    std::cout << "ground truth: " << to_string(t.config.geometry()) << ", n=" << t.config.size() << ", R " << p.R
              << ", alpha " << p.alpha << ", T " << p.T << ", seed " << t.seed << '\n';
    return 0;
  }
  const LoadedGraph g = load_graph_reporting(path);
  const Components c = connected_components(g.graph);
  std::cout << "graph: n=" << g.graph.num_nodes() << " m=" << g.graph.num_edges() << " density "
            << g.graph.density() << " components " << c.count() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic continuous latent space network models"};
  app.require_subcommand(1);
  std::function<int()> action;

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "Simulate graphs and ground-truth positions over a grid");
  g->add_option("config", gen.config, "JSON config with N, R, T, geometry, reps, alpha, link, seed");
  g->add_option("--out,-o", gen.out, "output directory (default $HCLS_OUTPUT_DIR or .)");
  g->add_option("--n", gen.n, "node counts")->delimiter(',');
  g->add_option("--R", gen.R, "disk radii")->delimiter(',');
  g->add_option("--T", gen.T, "temperatures")->delimiter(',');
  g->add_option("--geometry", gen.geometry)->check(CLI::IsMember({"hyperbolic", "euclidean", "spherical"}));
  g->add_option("--link", gen.link)->check(CLI::IsMember({"fermi-dirac", "two-logistic", "exponential"}));
  g->add_option("--reps", gen.reps);
  g->add_option("--alpha", gen.alpha, "threshold; default R (Euclidean: density-matched)");
  g->add_option("--seed", gen.seed);
  g->callback([&] { action = [&] { return cmd_generate(gen, *g); }; });

  MetricsArgs met;
  CLI::App* m = app.add_subcommand("metrics", "Structural metric panel, one CSV row per edge list");
  m->add_option("inputs", met.inputs)->required();
  m->add_option("--out,-o", met.out, "CSV path (default stdout)");
  m->callback([&] { action = [&] { return cmd_metrics(met); }; });

  FitArgs fit;
  CLI::App* f = app.add_subcommand("fit", "Fit a latent space model to an edge list");
  f->add_option("graph", fit.graph)->required();
  f->add_option("--engine", fit.engine)->check(CLI::IsMember({"vi", "hmc"}));
  f->add_option("--model", fit.model)->check(CLI::IsMember({"hcls", "hcls-fixed-T", "ecls"}));
  f->add_option("--config", fit.config, "JSON with engine settings");
  f->add_option("--truth", fit.truth, "ground-truth JSON; adds distance correlations to the report");
  f->add_option("--out,-o", fit.out, "output directory (default $HCLS_OUTPUT_DIR or .)");
  f->add_option("--seed", fit.seed);
  f->add_option("--fixed-T", fit.fixed_T, "temperature for hcls-fixed-T");
  f->add_option("--epochs", fit.epochs);
  f->add_option("--hidden", fit.hidden);
  f->add_option("--lr", fit.lr);
  f->add_option("--warmup", fit.warmup);
  f->add_option("--draws", fit.draws);
  f->add_option("--leapfrog", fit.leapfrog);
  f->add_flag("--force", fit.force, "allow HMC on graphs with more than 500 nodes");
  f->add_option("--threshold", fit.threshold, "probability cutoff for accuracy")->check(CLI::Range(0.0, 1.0));
  f->callback([&] { action = [&] { return cmd_fit(fit, *f); }; });

  ExperimentArgs exp;
  CLI::App* e = app.add_subcommand("experiment", "Run a simulation protocol end to end");
  e->add_option("protocol", exp.protocol)->required()->check(CLI::IsMember({"table2", "fig5", "fig8", "misspec"}));
  e->add_option("--out,-o", exp.out, "output directory (default $HCLS_OUTPUT_DIR or .)");
  e->add_flag("--full", exp.full, "replicate counts of the original study");
  e->add_option("--reps", exp.reps, "replicates per cell");
  e->add_option("--seed", exp.seed);
  e->add_option("--jobs,-j", exp.jobs, "worker threads");
  e->add_option("--n", exp.n, "override node counts")->delimiter(',');
  e->add_option("--R", exp.R, "override radii")->delimiter(',');
  e->add_option("--engine", exp.engine)->check(CLI::IsMember({"vi", "hmc"}));
  e->add_option("--epochs", exp.epochs, "VI epochs");
  e->add_flag("--quiet,-q", exp.quiet);
  e->callback([&] { action = [&] { return cmd_experiment(exp); }; });

  ExportArgs ex;
  CLI::App* x = app.add_subcommand("export-embedding", "Canonically oriented coordinates of a fitted embedding");
  x->add_option("--checkpoint", ex.checkpoint, "VI checkpoint");
  x->add_option("--truth", ex.truth, "ground-truth JSON");
  x->add_option("--graph", ex.graph, "edge list the embedding belongs to");
  x->add_option("--reference", ex.reference, "id,x,y CSV to Procrustes-align Euclidean embeddings to");
  x->add_option("--out,-o", ex.out, "CSV path (default stdout)");
  x->add_option("--svg", ex.svg, "also write a scatter plot");
  x->add_option("--rotation-weights", ex.weights)->check(CLI::IsMember({"degree", "uniform"}));
  x->callback([&] { action = [&] { return cmd_export(ex); }; });

  std::string info_path;
  CLI::App* i = app.add_subcommand("info", "Version, or a summary of a graph, truth or checkpoint file");
  i->add_option("path", info_path);
  i->callback([&] { action = [&] { return cmd_info(info_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const CalibrationError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
}
