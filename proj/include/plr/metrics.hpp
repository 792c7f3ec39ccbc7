#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "plr/feature_store.hpp"

namespace plr {

/// Euclidean is always taken between L2-normalized rows; Cosine is
/// 1 - cosine similarity. Reranked tags matrices produced by k-reciprocal
/// re-ranking and cannot be requested from pairwise_distances.
enum class Metric { Euclidean, Cosine, Reranked };

const char* to_string(Metric m) noexcept;
Metric parse_metric(std::string_view name);

struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Metric metric = Metric::Euclidean;
  std::vector<float> values;  // row-major rows x cols

  float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// Dense query x gallery distances. Accumulation is in double, storage in
/// float; evaluation runs in row blocks through a BLAS Gram product.
DistanceMatrix pairwise_distances(const FeatureSet& a, const FeatureSet& b, Metric metric);

struct EvalResult {
  std::vector<double> cmc;  // cmc[r-1] = match rate within the top r
  double map = 0.0;
  std::size_t n_valid_queries = 0;

  double rank(std::size_t r) const { return cmc.at(r - 1); }
};

/// Single-gallery-shot Re-ID protocol. For each query, gallery entries of the
/// same person seen by the same camera are dropped, as are junk entries
/// (person -1). Ties in distance are ordered by gallery person id. Queries
/// without a remaining correct match do not count.
EvalResult evaluate(const DistanceMatrix& dist, std::span<const int> q_persons, std::span<const int> q_cams,
                    std::span<const int> g_persons, std::span<const int> g_cams, std::size_t max_rank);

/// Same as above, reading labels from the sets that produced `dist`.
EvalResult evaluate(const DistanceMatrix& dist, const FeatureSet& query, const FeatureSet& gallery,
                    std::size_t max_rank);

}  // namespace plr
