#pragma once

// Graph-reconstruction scoring. Every metric runs over unordered pairs i < j.

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "hcls/graph.hpp"

namespace hcls {

/// Midranks (1-based) of values; tied entries share the average rank.
Eigen::VectorXd midranks(const Eigen::VectorXd& values);

/// Rank-based (Mann-Whitney) AUC of pairwise scores against the edge set.
/// Throws DomainError when the truth has no edges or no non-edges.
double auc(const Eigen::MatrixXd& scores, const Graph& truth);

/// Fraction of pairs where 1[score >= threshold] equals the edge indicator.
double accuracy(const Eigen::MatrixXd& scores, const Graph& truth, double threshold = 0.5);

struct Correlations {
  double pearson = 0.0;
  double spearman = 0.0;
};

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Pearson and Spearman correlation over the strict upper triangle.
Correlations distance_correlations(const Eigen::MatrixXd& true_d, const Eigen::MatrixXd& inferred_d);

/// Strict upper triangle, row-major.
Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m);

/// One fitted model's score on one replicate of one setting.
struct ComparisonRecord {
  std::string cell;   ///< setting key, e.g. "N=100,R=5"
  int replicate = 0;
  std::string model;
  double value = 0.0;
};

struct ModelSummary {
  double mean = 0.0;
  double max = 0.0;
  double prop_best = 0.0;  ///< ties credit every tied model
  int count = 0;
};

/// cell -> model -> summary. Higher values are better.
using ComparisonSummary = std::map<std::string, std::map<std::string, ModelSummary>>;

ComparisonSummary paired_comparison(const std::vector<ComparisonRecord>& records);

}  // namespace hcls
