#include "hcls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "hcls/errors.hpp"

namespace hcls {
namespace {

// FNV-1a, so replicate seeds do not depend on the standard library.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

// Expected density of hyperbolic graphs at alpha = R, averaged over draws.
double reference_density(int n, double R, double T, std::uint64_t seed, int draws = 20) {
  Rng rng(seed);
  double total = 0.0;
  for (int k = 0; k < draws; ++k) {
    total += expected_density(sample_positions(Geometry::Hyperbolic, n, ModelParams{R, R, T}, rng));
  }
  return total / draws;
}

}  // namespace

std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::Hcls: return "hcls";
    case FitModel::HclsFixedT: return "hcls-fixed-T";
    case FitModel::Ecls: return "ecls";
  }
  return "unknown";
}

FitModel parse_fit_model(std::string_view name) {
  if (name == "hcls") return FitModel::Hcls;
  if (name == "hcls-fixed-T") return FitModel::HclsFixedT;
  if (name == "ecls") return FitModel::Ecls;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected hcls, hcls-fixed-T or ecls)");
}

std::string_view to_string(Engine e) { return e == Engine::Vi ? "vi" : "hmc"; }

Engine parse_engine(std::string_view name) {
  if (name == "vi") return Engine::Vi;
  if (name == "hmc") return Engine::Hmc;
  throw ConfigError("unknown engine '" + std::string(name) + "' (expected vi or hmc)");
}

FitOutcome fit_model(const Graph& g, FitModel model, const FitOptions& options) {
  FitOutcome out;
  if (options.engine == Engine::Hmc) {
    if (model == FitModel::Ecls) throw ConfigError("fit_model: the HMC engine fits hyperbolic models only");
    out.draws = model == FitModel::Hcls ? hmc_sample(g, options.hmc)
                                        : fixed_temperature_mode(g, options.fixed_T, options.hmc);
    out.probabilities = posterior_edge_probabilities(*out.draws);
    out.distances = posterior_distance_summary(*out.draws);
    return out;
  }
  VariationalConfig config = options.vi;
  if (model == FitModel::HclsFixedT) config.fixed_T = options.fixed_T;
  out.vi_state = fit_vi(g, model == FitModel::Ecls ? LatentModel::Euclidean : LatentModel::Hyperbolic, config);
  out.probabilities = reconstruct_probabilities(g, *out.vi_state);
  out.distances = decoded_configuration(g, *out.vi_state).distance_matrix();
  return out;
}

std::string GridCell::key() const {
  std::string k = "N=" + std::to_string(n) + ",R=" + format_number(R);
  if (geometry != Geometry::Hyperbolic || T != 0.01) {
    k += "," + std::string(to_string(geometry)) + ",T=" + format_number(T);
  }
  return k;
}

std::uint64_t replicate_seed(std::uint64_t seed, const GridCell& cell, int rep) {
  return derive_seed(seed, fnv1a(cell.key()) ^ mix64(static_cast<std::uint64_t>(rep)));
}

SimulatedGraph simulate(const GridCell& cell, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams params{cell.R, cell.R, cell.T};
  if (cell.geometry == Geometry::Euclidean) {
    const double target = reference_density(cell.n, cell.R, cell.T, derive_seed(seed, 0xde7));
    Rng calibration(derive_seed(seed, 0xca1));
    params.alpha = calibrate_alpha_for_density(Geometry::Euclidean, cell.n, cell.R, cell.T, target, calibration);
  } else if (cell.geometry == Geometry::Spherical) {
    throw ConfigError("simulate: spherical cells are not supported");
  }
  SimulatedGraph s;
  s.truth = sample_positions(cell.geometry, cell.n, params, rng);
  s.graph = generate_graph(s.truth, rng);
  return s;
}

ReconstructionResult run_reconstruction(const ReconstructionStudy& study, const ProgressFn& progress) {
  struct Task {
    const GridCell* cell;
    int rep;
    ReconstructionResult out;
  };
  std::vector<Task> tasks;
  for (const GridCell& cell : study.cells) {
    for (int rep = 0; rep < study.replicates; ++rep) tasks.push_back({&cell, rep, {}});
  }

  std::mutex report_mutex;
  auto report = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(report_mutex);
    progress(msg);
  };

  auto run_task = [&](Task& task) {
    const GridCell& cell = *task.cell;
    const std::uint64_t seed = replicate_seed(study.seed, cell, task.rep);
    const SimulatedGraph sim = simulate(cell, seed);
    const std::int64_t pairs = static_cast<std::int64_t>(cell.n) * (cell.n - 1) / 2;
    if (sim.graph.num_edges() == 0 || sim.graph.num_edges() == pairs) {
      report(cell.key() + " rep " + std::to_string(task.rep) + ": degenerate graph skipped");
      return;
    }
    for (const FitModel model : study.models) {
      FitOptions fit = study.fit;
      fit.vi.seed = derive_seed(seed, 0xf17);
      fit.hmc.seed = derive_seed(seed, 0xf17);
      const FitOutcome outcome = fit_model(sim.graph, model, fit);
      const double a = auc(outcome.probabilities, sim.graph);
      const double acc = accuracy(outcome.probabilities, sim.graph);
      task.out.auc.push_back({cell.key(), task.rep, std::string(to_string(model)), a});
      task.out.accuracy.push_back({cell.key(), task.rep, std::string(to_string(model)), acc});
      std::ostringstream msg;
      msg << cell.key() << " rep " << task.rep << ' ' << to_string(model) << ": auc " << a << " accuracy " << acc;
      report(msg.str());
    }
  };

  // Each task owns its seed and its output slot, so the result does not
  // depend on the number of workers or on scheduling.
  const int workers = std::max(1, std::min<int>(study.jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (Task& t : tasks) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
          try {
            run_task(tasks[k]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = tasks.size();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ReconstructionResult result;
  for (Task& t : tasks) {
    result.auc.insert(result.auc.end(), t.out.auc.begin(), t.out.auc.end());
    result.accuracy.insert(result.accuracy.end(), t.out.accuracy.begin(), t.out.accuracy.end());
  }
  return result;
}

void write_comparison_csv(std::ostream& out, const ReconstructionStudy& study, const ReconstructionResult& result) {
  const ComparisonSummary auc_summary = paired_comparison(result.auc);
  const ComparisonSummary acc_summary = paired_comparison(result.accuracy);
  out << "N,R,geometry,T,model,avg_auc,max_auc,best_auc,avg_accuracy,max_accuracy,best_accuracy,replicates\n";
  for (const GridCell& cell : study.cells) {
    const auto a = auc_summary.find(cell.key());
    const auto b = acc_summary.find(cell.key());
    if (a == auc_summary.end() || b == acc_summary.end()) continue;
    for (const FitModel model : study.models) {
      const std::string name(to_string(model));
      const auto sa = a->second.find(name);
      const auto sb = b->second.find(name);
      if (sa == a->second.end() || sb == b->second.end()) continue;
      out << cell.n << ',' << cell.R << ',' << to_string(cell.geometry) << ',' << cell.T << ',' << name << ','
          << sa->second.mean << ',' << sa->second.max << ',' << sa->second.prop_best << ',' << sb->second.mean << ','
          << sb->second.max << ',' << sb->second.prop_best << ',' << sa->second.count << '\n';
    }
  }
}

void write_pairwise_csv(std::ostream& out, const ReconstructionStudy& study, const ReconstructionResult& result) {
  // (cell, replicate) -> model -> auc
  std::map<std::pair<std::string, int>, std::map<std::string, double>> table;
  for (const ComparisonRecord& r : result.auc) table[{r.cell, r.replicate}][r.model] = r.value;

  out << "N,R,geometry,T,model_a,model_b,wins_a,ties,replicates,prop_a_better\n";
  for (const GridCell& cell : study.cells) {
    for (const FitModel a : study.models) {
      for (const FitModel b : study.models) {
        if (a == b) continue;
        const std::string na(to_string(a)), nb(to_string(b));
        int wins = 0, ties = 0, count = 0;
        for (const auto& [key, scores] : table) {
          if (key.first != cell.key()) continue;
          const auto ia = scores.find(na);
          const auto ib = scores.find(nb);
          if (ia == scores.end() || ib == scores.end()) continue;
          ++count;
          if (ia->second > ib->second) ++wins;
          else if (ia->second == ib->second) ++ties;
        }
        if (count == 0) continue;
        out << cell.n << ',' << cell.R << ',' << to_string(cell.geometry) << ',' << cell.T << ',' << na << ',' << nb
            << ',' << wins << ',' << ties << ',' << count << ',' << static_cast<double>(wins) / count << '\n';
      }
    }
  }
}

void write_records_csv(std::ostream& out, const ReconstructionResult& result) {
  out << "cell,replicate,model,auc,accuracy\n";
  for (std::size_t k = 0; k < result.auc.size(); ++k) {
    const ComparisonRecord& r = result.auc[k];
    out << '"' << r.cell << "\"," << r.replicate << ',' << r.model << ',' << r.value << ','
        << result.accuracy[k].value << '\n';
  }
}

std::vector<Ensemble> run_tree_likeness(const EnsembleOptions& options, const ProgressFn& progress) {
  if (options.temperatures.empty() || options.replicates < 1) throw ConfigError("run_tree_likeness: empty design");
  const double T_ref = *std::min_element(options.temperatures.begin(), options.temperatures.end());
  const double target = options.target_density.value_or(
      reference_density(options.n, options.R, T_ref, derive_seed(options.seed, 0xde7)));

  std::vector<Ensemble> out;
  for (const Geometry geometry : {Geometry::Hyperbolic, Geometry::Euclidean}) {
    for (const double T : options.temperatures) {
      Ensemble e;
      e.geometry = geometry;
      e.T = T;
      const GridCell cell{options.n, options.R, geometry, T};
      if (geometry == Geometry::Hyperbolic && T == T_ref && !options.target_density) {
        e.alpha = options.R;
      } else {
        Rng calibration(derive_seed(options.seed, fnv1a(cell.key()) ^ 0xca1));
        e.alpha = calibrate_alpha_for_density(geometry, options.n, options.R, T, target, calibration);
      }
      for (int rep = 0; rep < options.replicates; ++rep) {
        Rng rng(replicate_seed(options.seed, cell, rep));
        const LatentConfiguration c = sample_positions(geometry, options.n, ModelParams{options.R, e.alpha, T}, rng);
        e.panels.push_back(metric_panel(generate_graph(c, rng)));
      }
      if (progress) {
        progress(std::string(to_string(geometry)) + " T=" + format_number(T) + " alpha=" + format_number(e.alpha) +
                 ": " + std::to_string(options.replicates) + " replicates");
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

namespace {

struct MetricColumn {
  const char* name;
  double (*get)(const MetricPanel&);
};

constexpr MetricColumn kMetricColumns[] = {
    {"density", [](const MetricPanel& p) { return p.edge_density; }},
    {"circuit_rank", [](const MetricPanel& p) { return static_cast<double>(p.circuit_rank); }},
    {"clustering", [](const MetricPanel& p) { return p.clustering; }},
    {"mean_betweenness", [](const MetricPanel& p) { return p.mean_betweenness; }},
    {"mean_closeness", [](const MetricPanel& p) { return p.mean_closeness; }},
    {"mean_eigenvector", [](const MetricPanel& p) { return p.mean_eigenvector; }},
    {"mean_path_length", [](const MetricPanel& p) { return p.mean_path_length; }},
    {"modularity", [](const MetricPanel& p) { return p.modularity; }},
};

}  // namespace

void write_ensemble_summary_csv(std::ostream& out, const std::vector<Ensemble>& ensembles) {
  out << "geometry,T,alpha,metric,mean,sd,replicates\n";
  for (const Ensemble& e : ensembles) {
    for (const MetricColumn& col : kMetricColumns) {
      double sum = 0.0, sum2 = 0.0;
      for (const MetricPanel& p : e.panels) {
        const double v = col.get(p);
        sum += v;
        sum2 += v * v;
      }
      const double k = static_cast<double>(e.panels.size());
      const double mean = sum / k;
      const double sd = k > 1 ? std::sqrt(std::max(0.0, (sum2 - k * mean * mean) / (k - 1))) : 0.0;
      out << to_string(e.geometry) << ',' << e.T << ',' << e.alpha << ',' << col.name << ',' << mean << ',' << sd
          << ',' << e.panels.size() << '\n';
    }
  }
}

void write_ensemble_panels_csv(std::ostream& out, const std::vector<Ensemble>& ensembles) {
  out << "geometry,T,replicate,";
  write_metrics_header(out);
  for (const Ensemble& e : ensembles) {
    for (std::size_t k = 0; k < e.panels.size(); ++k) {
      out << to_string(e.geometry) << ',' << e.T << ',' << k << ',';
      write_metrics_row(out, e.panels[k]);
    }
  }
}

void write_metrics_header(std::ostream& out) {
  out << "n,m,density,circuit_rank,clustering,mean_betweenness,mean_closeness,mean_eigenvector,mean_path_length,"
         "modularity\n";
}

void write_metrics_row(std::ostream& out, const MetricPanel& p) {
  const auto old = out.precision(12);
  out << p.n << ',' << p.m << ',' << p.edge_density << ',' << p.circuit_rank << ',' << p.clustering << ','
      << p.mean_betweenness << ',' << p.mean_closeness << ',' << p.mean_eigenvector << ',' << p.mean_path_length
      << ',' << p.modularity << '\n';
  out.precision(old);
}

}  // namespace hcls
