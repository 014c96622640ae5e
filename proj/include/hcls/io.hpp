#pragma once

// File formats.
//
// Edge list: optional header line "# nodes=N", then one "i j" pair per line.
// Blank lines and other lines starting with '#' or '%' are skipped. Written
// files are 0-based with i < j.
//
// VI checkpoint: the 8-byte magic "HCLSVI01", a little-endian uint64 header
// length, a JSON header, then little-endian float64 payload blocks at the
// offsets listed in the header.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcls/eval.hpp"
#include "hcls/generative.hpp"
#include "hcls/graph.hpp"
#include "hcls/hmc.hpp"
#include "hcls/vi.hpp"

namespace hcls {

struct LoadedGraph {
  Graph graph;
  std::vector<std::string> labels;  ///< original label of each node id
  int self_loops = 0;               ///< dropped
  int duplicates = 0;               ///< dropped repeats, in either orientation
};

/// Parses an edge list. With a "# nodes=N" header and integer labels in
/// [0, N), ids are kept as given (isolated nodes included); otherwise labels
/// are relabeled to 0..n-1 in sorted order (numeric when all labels are
/// integers). Throws DataError naming the line for malformed input and for
/// files with neither a header nor an edge.
LoadedGraph parse_edge_list(std::istream& in, std::string_view source = "<input>");
LoadedGraph load_edge_list(const std::filesystem::path& path);

void write_edge_list(std::ostream& out, const Graph& g);
void save_edge_list(const std::filesystem::path& path, const Graph& g);

/// "id,label" CSV.
void save_label_mapping(const std::filesystem::path& path, const std::vector<std::string>& labels);

/// Positions and parameters of a generated graph.
struct GroundTruth {
  LatentConfiguration config;
  std::uint64_t seed = 0;
};

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// "iter,R,alpha,T" rows, one per stored draw.
void save_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws);

/// Acceptance rate, divergences, step size, ESS and split-R-hat per scalar.
void save_diagnostics_json(const std::filesystem::path& path, const PosteriorDraws& draws);

/// Position draws as little-endian float64, draw-major, (r, theta) per node.
void save_position_draws(const std::filesystem::path& path, const PosteriorDraws& draws);

struct EvalReport {
  double auc = 0.0;
  double accuracy = 0.0;
  std::optional<double> pearson, spearman;  ///< present when true distances are known
};

void save_eval_json(const std::filesystem::path& path, const EvalReport& report);

void save_checkpoint(const std::filesystem::path& path, const VariationalState& state, const Graph& g);

/// Throws DataError on a corrupt or truncated file.
VariationalState load_checkpoint(const std::filesystem::path& path);

/// (n, m) recorded in the checkpoint header.
std::pair<int, std::int64_t> checkpoint_graph_shape(const std::filesystem::path& path);

}  // namespace hcls
