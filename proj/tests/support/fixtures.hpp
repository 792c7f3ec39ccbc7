#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "plr/feature_store.hpp"

namespace fixture {

std::string sample_id(std::size_t i);

/// Standard-normal N x D features, cameras uniform in [0, n_cameras),
/// persons uniform in [0, n_persons) when n_persons > 0.
plr::FeatureSet random_features(std::size_t n, std::size_t d, int n_cameras, int n_persons, std::uint64_t seed);

/// 200 points: 5 Gaussian blobs of 38 points in 2-D plus 10 uniform outliers.
plr::FeatureSet blobs_with_outliers(std::uint64_t seed);

/// Rows given explicitly; ids are s0000, s0001, ...
plr::FeatureSet from_rows(const std::vector<std::vector<float>>& rows, const std::vector<int>& cameras,
                          const std::vector<int>& persons = {});

/// One query (person 1, camera 0) and a gallery holding its match from
/// camera 1 at distance 0.1 and a person-2 entry at distance 0.5.
struct QueryGallery {
  plr::FeatureSet query;
  plr::FeatureSet gallery;
};
QueryGallery tiny_eval();

/// Three queries and eight gallery points on the unit circle arranged in
/// three groups. With k1 = 3 the k-reciprocal sets (after expansion) are the
/// groups themselves: {q0, g0, g1, g2}, {q1, g3, g4, g5} and {q2, g6, g7}.
/// `jaccard` holds the query x gallery Jaccard distances for k2 = 2 worked
/// out from those literal sets.
struct RerankHand {
  plr::FeatureSet query;
  plr::FeatureSet gallery;
  std::vector<std::vector<double>> jaccard;
};
RerankHand rerank_hand();

}  // namespace fixture
