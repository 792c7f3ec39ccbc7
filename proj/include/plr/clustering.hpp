#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plr/feature_store.hpp"
#include "plr/metrics.hpp"

namespace plr {

inline constexpr int kNoise = -1;

struct ClusterParams {
  std::string algorithm;
  std::vector<std::pair<std::string, std::string>> values;
};

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id in [0, n_clusters) or kNoise
  int n_clusters = 0;
  ClusterParams params;
};

struct DbscanParams {
  double eps = 0.42;
  int min_samples = 4;
  Metric metric = Metric::Euclidean;
};

struct DbscanResult {
  ClusterAssignment assignment;
  std::vector<bool> core;
};

/// Exact DBSCAN over L2-normalized rows. A point is core when its closed
/// eps-ball (self included) holds at least min_samples points. Core points
/// connected through eps-edges form a cluster; cluster ids follow the lowest
/// core index of each cluster. A border point joins the cluster of its
/// nearest core neighbor, ties going to the smaller sample id and then the
/// smaller row index, which keeps the labeling independent of row order.
ClusterAssignment dbscan(const FeatureSet& fs, const DbscanParams& params);
DbscanResult dbscan_detailed(const FeatureSet& fs, const DbscanParams& params);

struct KmeansResult {
  ClusterAssignment assignment;
  std::vector<double> objective;  // sum of squared distances after each assignment step
  std::size_t iterations = 0;
};

inline constexpr std::size_t kKmeansMaxIterations = 300;

/// Lloyd's algorithm on L2-normalized rows with k-means++ seeding. Stops when
/// no assignment changes or after kKmeansMaxIterations. Labels are relabeled
/// contiguously by first occurrence.
ClusterAssignment kmeans(const FeatureSet& fs, int k, std::uint64_t seed);
KmeansResult kmeans_detailed(const FeatureSet& fs, int k, std::uint64_t seed);

/// floor(n / 15); throws HeuristicZero when that is 0.
int k_heuristic(long long n);

/// Relabels non-noise labels to 0..m-1 in order of first appearance.
int relabel_by_first_occurrence(std::vector<int>& labels);

}  // namespace plr
