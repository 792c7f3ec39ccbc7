#include "plr/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dense_kernels.hpp"
#include "plr/error.hpp"

namespace plr {
namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;  // ascending column

detail::UnitRows stack_unit_rows(const FeatureSet& q, const FeatureSet& g) {
  auto uq = detail::unit_rows(q);
  auto ug = detail::unit_rows(g);
  detail::UnitRows u;
  u.n = uq.n + ug.n;
  u.d = uq.d;
  u.values = std::move(uq.values);
  u.values.insert(u.values.end(), ug.values.begin(), ug.values.end());
  u.sq_norms = std::move(uq.sq_norms);
  u.sq_norms.insert(u.sq_norms.end(), ug.sq_norms.begin(), ug.sq_norms.end());
  return u;
}

// Members f of `forward` (a prefix of rank[probe]) whose own prefix of length
// `len` contains probe. Order follows `forward`.
std::vector<std::size_t> reciprocal(std::size_t probe, std::size_t len,
                                    const std::vector<std::vector<std::size_t>>& rank) {
  std::vector<std::size_t> out;
  const auto& fwd = rank[probe];
  for (std::size_t a = 0; a < len && a < fwd.size(); ++a) {
    const std::size_t f = fwd[a];
    const auto& back = rank[f];
    const auto end = back.begin() + static_cast<std::ptrdiff_t>(std::min(len, back.size()));
    if (std::find(back.begin(), end, probe) != end) out.push_back(f);
  }
  return out;
}

}  // namespace

DistanceMatrix k_reciprocal_rerank(const FeatureSet& query, const FeatureSet& gallery, const RerankParams& p) {
  if (query.dim() != gallery.dim()) throw Error(ErrorKind::DimensionMismatch, "query and gallery widths differ");
  if (p.k2 < 1 || p.k1 < p.k2) throw Error(ErrorKind::InvalidArgument, "re-ranking needs k1 >= k2 >= 1");
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]");
  if (gallery.size() < static_cast<std::size_t>(p.k1) + 1) {
    throw Error(ErrorKind::GalleryTooSmall,
                "gallery of " + std::to_string(gallery.size()) + " needs >= k1+1 = " + std::to_string(p.k1 + 1));
  }

  const std::size_t nq = query.size();
  const std::size_t ng = gallery.size();
  const auto unit = stack_unit_rows(query, gallery);
  const std::size_t n = unit.n;
  const std::size_t k1 = static_cast<std::size_t>(p.k1);
  const std::size_t k2 = static_cast<std::size_t>(p.k2);
  const std::size_t keep = std::min(n, k1 + 1);

  // Ranked neighbor prefixes, row maxima of squared distance and the plain
  // query x gallery distances.
  std::vector<std::vector<std::size_t>> rank(n);
  std::vector<double> row_max_sq(n, 0.0);
  DistanceMatrix out{nq, ng, Metric::Reranked, std::vector<float>(nq * ng)};
  std::vector<double> original(nq * ng);
  detail::for_each_distance_block(unit, unit, Metric::Euclidean, [&](std::size_t lo, std::size_t hi, const double* b) {
#pragma omp parallel
    {
      std::vector<std::pair<double, std::size_t>> scratch(n);
#pragma omp for schedule(static)
      for (std::size_t i = lo; i < hi; ++i) {
        const double* r = b + (i - lo) * n;
        double mx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          scratch[j] = {r[j] * r[j], j};
          mx = std::max(mx, r[j] * r[j]);
        }
        row_max_sq[i] = mx;
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(keep), scratch.end());
        rank[i].resize(keep);
        for (std::size_t t = 0; t < keep; ++t) rank[i][t] = scratch[t].second;
        if (i < nq) std::copy(r + nq, r + n, original.begin() + static_cast<std::ptrdiff_t>(i * ng));
      }
    }
  });

  auto scaled_sq = [&](std::size_t i, std::size_t j) {
    if (row_max_sq[i] == 0.0) return 0.0;
    const double d = detail::direct_distance(unit.row(i), unit.sq_norms[i], unit.row(j), unit.sq_norms[j], unit.d,
                                             Metric::Euclidean);
    return d * d / row_max_sq[i];
  };

  // Encoding vectors over k-reciprocal sets expanded by their half-size sets.
  const auto half = static_cast<std::size_t>(std::nearbyint(static_cast<double>(k1) / 2.0));
  std::vector<SparseRow> enc(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    const auto base = reciprocal(i, k1 + 1, rank);
    std::vector<std::size_t> sorted_base = base;
    std::sort(sorted_base.begin(), sorted_base.end());
    std::vector<std::size_t> expansion = base;
    for (std::size_t cand : base) {
      const auto cand_set = reciprocal(cand, half + 1, rank);
      std::size_t overlap = 0;
      for (std::size_t c : cand_set) overlap += std::binary_search(sorted_base.begin(), sorted_base.end(), c) ? 1 : 0;
      if (static_cast<double>(overlap) > 2.0 / 3.0 * static_cast<double>(cand_set.size())) {
        expansion.insert(expansion.end(), cand_set.begin(), cand_set.end());
      }
    }
    std::sort(expansion.begin(), expansion.end());
    expansion.erase(std::unique(expansion.begin(), expansion.end()), expansion.end());

    SparseRow row;
    row.reserve(expansion.size());
    double total = 0.0;
    for (std::size_t j : expansion) {
      const double w = std::exp(-scaled_sq(i, j));
      row.emplace_back(j, w);
      total += w;
    }
    for (auto& e : row) e.second /= total;
    enc[i] = std::move(row);
  }

  // Local query expansion: average the encodings of the k2 nearest rows.
  if (k2 > 1) {
    std::vector<SparseRow> expanded(n);
#pragma omp parallel
    {
      std::vector<double> acc(n, 0.0);
      std::vector<std::size_t> touched;
#pragma omp for schedule(dynamic, 8)
      for (std::size_t i = 0; i < n; ++i) {
        touched.clear();
        const std::size_t m = std::min(k2, rank[i].size());
        for (std::size_t t = 0; t < m; ++t) {
          for (const auto& [col, w] : enc[rank[i][t]]) {
            if (acc[col] == 0.0) touched.push_back(col);
            acc[col] += w;
          }
        }
        std::sort(touched.begin(), touched.end());
        SparseRow row;
        row.reserve(touched.size());
        for (std::size_t col : touched) {
          row.emplace_back(col, acc[col] / static_cast<double>(k2));
          acc[col] = 0.0;
        }
        expanded[i] = std::move(row);
      }
    }
    enc = std::move(expanded);
  }

  // Inverted index: for every column, the rows holding a non-zero weight.
  std::vector<std::vector<std::pair<std::size_t, double>>> inverted(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& [col, w] : enc[r]) inverted[col].emplace_back(r, w);
  }

  const double lambda = p.lambda;
#pragma omp parallel
  {
    std::vector<double> shared(n, 0.0);
#pragma omp for schedule(dynamic, 8)
    for (std::size_t i = 0; i < nq; ++i) {
      std::fill(shared.begin(), shared.end(), 0.0);
      for (const auto& [col, w] : enc[i]) {
        for (const auto& [r, v] : inverted[col]) shared[r] += std::min(w, v);
      }
      for (std::size_t g = 0; g < ng; ++g) {
        const double s = shared[nq + g];
        const double jaccard = 1.0 - s / (2.0 - s);
        out.values[i * ng + g] =
            static_cast<float>(lambda * original[i * ng + g] + (1.0 - lambda) * jaccard);
      }
    }
  }
  return out;
}

}  // namespace plr
