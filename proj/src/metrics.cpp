#include "plr/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dense_kernels.hpp"
#include "plr/error.hpp"

namespace plr {

const char* to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Euclidean: return "euclidean";
    case Metric::Cosine: return "cosine";
    case Metric::Reranked: return "reranked";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "cosine") return Metric::Cosine;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

DistanceMatrix pairwise_distances(const FeatureSet& a, const FeatureSet& b, Metric metric) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  if (metric == Metric::Reranked) {
    throw Error(ErrorKind::InvalidArgument, "reranked distances come from k_reciprocal_rerank");
  }
  const auto ua = detail::unit_rows(a);
  const auto ub = detail::unit_rows(b);
  DistanceMatrix out{a.size(), b.size(), metric, std::vector<float>(a.size() * b.size())};
  detail::for_each_distance_block(ua, ub, metric, [&](std::size_t lo, std::size_t hi, const double* block) {
    std::transform(block, block + (hi - lo) * ub.n, out.values.begin() + static_cast<std::ptrdiff_t>(lo * ub.n),
                   [](double v) { return static_cast<float>(v); });
  });
  return out;
}

namespace {

struct QueryScore {
  bool valid = false;
  std::size_t first_hit = 0;  // 0-based position of the first correct match
  double ap = 0.0;
};

QueryScore score_query(std::span<const float> dist, int q_person, int q_cam, std::span<const int> g_persons,
                       std::span<const int> g_cams, std::vector<std::size_t>& order) {
  order.clear();
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (g_persons[j] == kUnknownPerson) continue;
    if (g_persons[j] == q_person && g_cams[j] == q_cam) continue;
    order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (dist[x] != dist[y]) return dist[x] < dist[y];
    if (g_persons[x] != g_persons[y]) return g_persons[x] < g_persons[y];
    return x < y;
  });

  QueryScore s;
  std::size_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (g_persons[order[pos]] != q_person) continue;
    if (hits == 0) s.first_hit = pos;
    ++hits;
    precision_sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
  }
  if (hits == 0) return s;
  s.valid = true;
  s.ap = precision_sum / static_cast<double>(hits);
  return s;
}

}  // namespace

EvalResult evaluate(const DistanceMatrix& dist, std::span<const int> q_persons, std::span<const int> q_cams,
                    std::span<const int> g_persons, std::span<const int> g_cams, std::size_t max_rank) {
  if (q_persons.size() != dist.rows || q_cams.size() != dist.rows || g_persons.size() != dist.cols ||
      g_cams.size() != dist.cols) {
    throw Error(ErrorKind::DimensionMismatch, "label lists do not match the distance matrix shape");
  }
  if (max_rank < 1) throw Error(ErrorKind::InvalidArgument, "max_rank must be >= 1");

  std::vector<QueryScore> scores(dist.rows);
#pragma omp parallel
  {
    std::vector<std::size_t> order;
    order.reserve(dist.cols);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t i = 0; i < dist.rows; ++i) {
      scores[i] = score_query(dist.row(i), q_persons[i], q_cams[i], g_persons, g_cams, order);
    }
  }

  EvalResult r;
  r.cmc.assign(max_rank, 0.0);
  double ap_sum = 0.0;
  for (const auto& s : scores) {
    if (!s.valid) continue;
    ++r.n_valid_queries;
    ap_sum += s.ap;
    for (std::size_t k = s.first_hit; k < max_rank; ++k) r.cmc[k] += 1.0;
  }
  if (r.n_valid_queries == 0) throw Error(ErrorKind::NoValidQuery, "no query has a valid gallery match");
  const double n = static_cast<double>(r.n_valid_queries);
  for (auto& c : r.cmc) c /= n;
  r.map = ap_sum / n;
  return r;
}

EvalResult evaluate(const DistanceMatrix& dist, const FeatureSet& query, const FeatureSet& gallery,
                    std::size_t max_rank) {
  if (!query.has_persons() || !gallery.has_persons()) {
    throw Error(ErrorKind::InvalidArgument, "evaluation needs ground-truth persons on query and gallery");
  }
  return evaluate(dist, *query.persons(), query.cameras(), *gallery.persons(), gallery.cameras(), max_rank);
}

}  // namespace plr
