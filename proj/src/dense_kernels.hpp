#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "plr/feature_store.hpp"
#include "plr/metrics.hpp"

namespace plr::detail {

/// Row-major double copy of a feature matrix with every non-zero row scaled to
/// unit length. `sq_norms[i]` is the squared norm after scaling (1 or 0).
struct UnitRows {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;
  std::vector<double> sq_norms;

  const double* row(std::size_t i) const { return values.data() + i * d; }
};

UnitRows unit_rows(const FeatureSet& fs);

/// out[i*nb + j] = <a_i, b_j> for a block of a's rows.
void gram(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t d, double* out);

/// Distance between unit-or-zero rows given their Gram entry.
inline double distance_from_gram(double g, double sq_a, double sq_b, Metric metric) {
  if (metric == Metric::Cosine) {
    if (sq_a == 0.0 || sq_b == 0.0) return 1.0;
    const double v = 1.0 - g;
    return v > 0.0 ? v : 0.0;
  }
  const double sq = sq_a + sq_b - 2.0 * g;
  return sq > 0.0 ? std::sqrt(sq) : 0.0;
}

/// Exact distance of two unit-or-zero rows, computed directly.
double direct_distance(const double* a, double sq_a, const double* b, double sq_b, std::size_t d, Metric metric);

/// Streams the distance matrix between `a` and `b` in row blocks. The
/// callback receives [row_begin, row_end) and a (row_end-row_begin) x b.n
/// block of double distances, valid only during the call.
void for_each_distance_block(const UnitRows& a, const UnitRows& b, Metric metric,
                             const std::function<void(std::size_t, std::size_t, const double*)>& fn);

}  // namespace plr::detail
