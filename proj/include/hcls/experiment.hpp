#pragma once

// Simulation protocols: generate -> fit -> score -> aggregate.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcls/eval.hpp"
#include "hcls/generative.hpp"
#include "hcls/graph.hpp"
#include "hcls/hmc.hpp"
#include "hcls/metrics.hpp"
#include "hcls/vi.hpp"

namespace hcls {

/// Candidate models: learnable-T hyperbolic, hyperbolic with T pinned, Euclidean.
enum class FitModel { Hcls, HclsFixedT, Ecls };
enum class Engine { Vi, Hmc };

std::string_view to_string(FitModel m);
FitModel parse_fit_model(std::string_view name);
std::string_view to_string(Engine e);
Engine parse_engine(std::string_view name);

struct FitOptions {
  Engine engine = Engine::Vi;
  VariationalConfig vi;
  HmcConfig hmc;
  double fixed_T = 0.5;
};

struct FitOutcome {
  Eigen::MatrixXd probabilities;  ///< fitted p_ij, zero diagonal
  Eigen::MatrixXd distances;      ///< inferred latent distances
  std::optional<VariationalState> vi_state;
  std::optional<PosteriorDraws> draws;
};

/// HMC supports the hyperbolic models only.
FitOutcome fit_model(const Graph& g, FitModel model, const FitOptions& options);

/// One simulation setting.
struct GridCell {
  int n = 100;
  double R = 5.0;
  Geometry geometry = Geometry::Hyperbolic;
  double T = 0.01;

  /// "N=100,R=5" plus ",euclidean,T=0.5" style suffixes when not the default source.
  std::string key() const;
};

/// Data for one replicate. Hyperbolic cells use alpha = R; Euclidean cells use
/// tau = R / 2.448 and alpha calibrated to the density of the hyperbolic cell
/// with the same N, R and T.
struct SimulatedGraph {
  LatentConfiguration truth;
  Graph graph;
};

SimulatedGraph simulate(const GridCell& cell, std::uint64_t seed);

/// Seed of replicate rep in cell, independent of the order cells are run.
std::uint64_t replicate_seed(std::uint64_t seed, const GridCell& cell, int rep);

struct ReconstructionStudy {
  std::vector<GridCell> cells;
  int replicates = 3;
  std::vector<FitModel> models{FitModel::Hcls, FitModel::HclsFixedT, FitModel::Ecls};
  FitOptions fit;
  std::uint64_t seed = 1;
  int jobs = 1;  ///< worker threads; results do not depend on it
};

struct ReconstructionResult {
  std::vector<ComparisonRecord> auc;
  std::vector<ComparisonRecord> accuracy;
};

using ProgressFn = std::function<void(const std::string&)>;

ReconstructionResult run_reconstruction(const ReconstructionStudy& study, const ProgressFn& progress = {});

/// Rows: cell columns, model, then mean/max/prop-best for AUC and accuracy.
void write_comparison_csv(std::ostream& out, const ReconstructionStudy& study, const ReconstructionResult& result);

/// Head-to-head table: for each cell and ordered model pair (a, b), the share
/// of replicates where a scores strictly higher AUC than b.
void write_pairwise_csv(std::ostream& out, const ReconstructionStudy& study, const ReconstructionResult& result);

/// One row per replicate and model.
void write_records_csv(std::ostream& out, const ReconstructionResult& result);

/// Structural-metric ensembles across geometries and temperatures.
struct EnsembleOptions {
  int n = 100;
  double R = 5.0;
  std::vector<double> temperatures{0.01, 0.1, 0.5};
  int replicates = 100;
  std::uint64_t seed = 1;
  /// Density every ensemble is calibrated to; defaults to the expected
  /// density of the hyperbolic ensemble at alpha = R and the lowest T.
  std::optional<double> target_density;
};

struct Ensemble {
  Geometry geometry = Geometry::Hyperbolic;
  double T = 0.0;
  double alpha = 0.0;
  std::vector<MetricPanel> panels;
};

std::vector<Ensemble> run_tree_likeness(const EnsembleOptions& options, const ProgressFn& progress = {});

/// Per-ensemble mean and standard deviation of every panel metric.
void write_ensemble_summary_csv(std::ostream& out, const std::vector<Ensemble>& ensembles);

/// One panel row per replicate.
void write_ensemble_panels_csv(std::ostream& out, const std::vector<Ensemble>& ensembles);

/// Column order: n, m, density, circuit_rank, clustering, mean_betweenness,
/// mean_closeness, mean_eigenvector, mean_path_length, modularity.
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricPanel& p);

}  // namespace hcls
