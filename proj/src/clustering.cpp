#include "plr/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "dense_kernels.hpp"
#include "plr/error.hpp"

namespace plr {
namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller index becomes the root so the component root is its minimum.
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

}  // namespace

int relabel_by_first_occurrence(std::vector<int>& labels) {
  std::unordered_map<int, int> remap;
  for (int& l : labels) {
    if (l == kNoise) continue;
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return static_cast<int>(remap.size());
}

DbscanResult dbscan_detailed(const FeatureSet& fs, const DbscanParams& params) {
  if (!(params.eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  if (params.min_samples < 1) throw Error(ErrorKind::InvalidArgument, "min_samples must be >= 1");
  if (params.metric == Metric::Reranked) throw Error(ErrorKind::InvalidArgument, "dbscan needs a raw metric");

  const auto unit = detail::unit_rows(fs);
  const std::size_t n = unit.n;
  const double eps = params.eps;

  // Pass 1: closed-ball neighbor counts.
  std::vector<std::size_t> counts(n, 0);
  detail::for_each_distance_block(unit, unit, params.metric, [&](std::size_t lo, std::size_t hi, const double* b) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = lo; i < hi; ++i) {
      const double* r = b + (i - lo) * n;
      std::size_t c = 0;
      for (std::size_t j = 0; j < n; ++j) c += r[j] <= eps ? 1 : 0;
      counts[i] = c;
    }
  });
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = counts[i] >= static_cast<std::size_t>(params.min_samples);

  // Pass 2: core-core edges for connectivity, nearest core for every non-core point.
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  DisjointSets sets(n);
  std::vector<std::size_t> nearest_core(n, kNone);
  std::vector<double> nearest_dist(n, std::numeric_limits<double>::infinity());
  const auto& ids = fs.ids();
  detail::for_each_distance_block(unit, unit, params.metric, [&](std::size_t lo, std::size_t hi, const double* b) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = lo; i < hi; ++i) {
      if (core[i]) continue;
      const double* r = b + (i - lo) * n;
      for (std::size_t j = 0; j < n; ++j) {
        if (!core[j] || r[j] > eps) continue;
        const std::size_t cur = nearest_core[i];
        const bool better = cur == kNone || r[j] < nearest_dist[i] ||
                            (r[j] == nearest_dist[i] && (ids[j] < ids[cur] || (ids[j] == ids[cur] && j < cur)));
        if (better) {
          nearest_core[i] = j;
          nearest_dist[i] = r[j];
        }
      }
    }
    // Union-find stays sequential.
    for (std::size_t i = lo; i < hi; ++i) {
      if (!core[i]) continue;
      const double* r = b + (i - lo) * n;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (core[j] && r[j] <= eps) sets.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
    }
  });

  DbscanResult out;
  auto& labels = out.assignment.labels;
  labels.assign(n, kNoise);
  std::vector<int> root_label(n, kNoise);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const auto root = sets.find(static_cast<std::uint32_t>(i));
    if (root_label[root] == kNoise) root_label[root] = next++;
    labels[i] = root_label[root];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] && nearest_core[i] != kNone) labels[i] = labels[nearest_core[i]];
  }
  out.assignment.n_clusters = next;
  out.assignment.params = {"dbscan",
                           {{"eps", fmt_double(params.eps)},
                            {"min_samples", std::to_string(params.min_samples)},
                            {"metric", to_string(params.metric)}}};
  out.core = std::move(core);
  return out;
}

ClusterAssignment dbscan(const FeatureSet& fs, const DbscanParams& params) {
  return dbscan_detailed(fs, params).assignment;
}

KmeansResult kmeans_detailed(const FeatureSet& fs, int k, std::uint64_t seed) {
  const std::size_t n = fs.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::InvalidK, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  const auto unit = detail::unit_rows(fs);
  const std::size_t d = unit.d;
  const std::size_t kk = static_cast<std::size_t>(k);
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  std::vector<double> centroids(kk * d);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  auto sq_to = [&](std::size_t i, const double* c) {
    double s = 0.0;
    const double* x = unit.row(i);
    for (std::size_t t = 0; t < d; ++t) {
      const double diff = x[t] - c[t];
      s += diff * diff;
    }
    return s;
  };
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < kk; ++c) {
    if (c > 0) {
      const double total = std::accumulate(min_sq.begin(), min_sq.end(), 0.0);
      if (total > 0.0) {
        const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          acc += min_sq[i];
          if (acc > target && min_sq[i] > 0.0) {
            pick = i;
            break;
          }
        }
        if (pick == n) {
          // Rounding left target at the very end of the cumulative sum.
          for (std::size_t i = n; i-- > 0;) {
            if (min_sq[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every point coincides with a chosen center.
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) rest.push_back(i);
        }
        pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
      }
    }
    chosen[pick] = true;
    std::copy(unit.row(pick), unit.row(pick) + d, centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
    for (std::size_t i = 0; i < n; ++i) min_sq[i] = std::min(min_sq[i], sq_to(i, &centroids[c * d]));
  }

  KmeansResult result;
  std::vector<int> assign(n, -1);
  std::vector<double> gram_buf(n * kk);
  std::vector<double> c_sq(kk);
  for (std::size_t it = 0; it < kKmeansMaxIterations; ++it) {
    for (std::size_t c = 0; c < kk; ++c) {
      const double* cc = &centroids[c * d];
      c_sq[c] = std::inner_product(cc, cc + d, cc, 0.0);
    }
    detail::gram(unit.values.data(), n, centroids.data(), kk, d, gram_buf.data());
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* g = &gram_buf[i * kk];
      std::size_t best = 0;
      double best_sq = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double sq = unit.sq_norms[i] + c_sq[c] - 2.0 * g[c];
        if (sq < best_sq) {
          best_sq = sq;
          best = c;
        }
      }
      objective += std::max(best_sq, 0.0);
      if (assign[i] != static_cast<int>(best)) {
        assign[i] = static_cast<int>(best);
        changed = true;
      }
    }
    result.objective.push_back(objective);
    result.iterations = it + 1;
    if (!changed) break;

    std::vector<double> sums(kk * d, 0.0);
    std::vector<std::size_t> counts(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(assign[i]);
      ++counts[c];
      const double* x = unit.row(i);
      for (std::size_t t = 0; t < d; ++t) sums[c * d + t] += x[t];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its previous centroid
      for (std::size_t t = 0; t < d; ++t) centroids[c * d + t] = sums[c * d + t] / static_cast<double>(counts[c]);
    }
  }

  auto& a = result.assignment;
  a.labels = std::move(assign);
  a.n_clusters = relabel_by_first_occurrence(a.labels);
  a.params = {"kmeans", {{"k", std::to_string(k)}, {"seed", std::to_string(seed)}}};
  return result;
}

ClusterAssignment kmeans(const FeatureSet& fs, int k, std::uint64_t seed) {
  return kmeans_detailed(fs, k, seed).assignment;
}

int k_heuristic(long long n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 0");
  const long long k = n / 15;
  if (k == 0) throw Error(ErrorKind::HeuristicZero, "floor(" + std::to_string(n) + "/15) = 0");
  return static_cast<int>(k);
}

}  // namespace plr
