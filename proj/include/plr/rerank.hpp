#pragma once

#include "plr/feature_store.hpp"
#include "plr/metrics.hpp"

namespace plr {

struct RerankParams {
  int k1 = 20;
  int k2 = 6;
  double lambda = 0.3;
};

/// k-reciprocal encoding re-ranking over the union of query and gallery.
/// Neighbor ranks and Gaussian encoding weights use squared Euclidean
/// distances between L2-normalized rows, scaled by each row's maximum. The
/// result is lambda * d + (1 - lambda) * d_jaccard, where d is the plain
/// Euclidean distance between L2-normalized rows, so lambda = 1 reproduces
/// pairwise_distances(query, gallery, Metric::Euclidean).
DistanceMatrix k_reciprocal_rerank(const FeatureSet& query, const FeatureSet& gallery, const RerankParams& p);

}  // namespace plr
