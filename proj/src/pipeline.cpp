#include "plr/pipeline.hpp"

#include <chrono>
#include <unordered_set>

#include "plr/camera_norm.hpp"
#include "plr/error.hpp"

namespace plr {
namespace {

void check_disjoint(const FeatureSet& train, const FeatureSet& query, const FeatureSet& gallery) {
  const std::unordered_set<std::string> ids(train.ids().begin(), train.ids().end());
  for (const FeatureSet* fs : {&query, &gallery}) {
    for (const auto& id : fs->ids()) {
      if (ids.count(id)) throw Error(ErrorKind::InvalidArgument, "sample '" + id + "' is both training and test data");
    }
  }
}

double eps_for(const LoopConfig& cfg, int iteration) {
  if (cfg.eps_schedule.empty()) return cfg.dbscan.eps;
  const auto at = std::min(static_cast<std::size_t>(iteration - 1), cfg.eps_schedule.size() - 1);
  return cfg.eps_schedule[at];
}

}  // namespace

std::string_view to_string(ClusterAlgorithm a) noexcept { return a == ClusterAlgorithm::Dbscan ? "dbscan" : "kmeans"; }

ClusterAlgorithm parse_algorithm(std::string_view name) {
  if (name == "dbscan") return ClusterAlgorithm::Dbscan;
  if (name == "kmeans") return ClusterAlgorithm::Kmeans;
  throw Error(ErrorKind::InvalidArgument, "unknown clustering algorithm '" + std::string(name) + "'");
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Patience: return "patience";
    case StopReason::EmptySelection: return "empty_selection";
  }
  return "unknown";
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) noexcept {
  return seed * 1000003ULL + static_cast<std::uint64_t>(iteration);
}

void validate(const LoopConfig& cfg) {
  if (cfg.max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
  if (cfg.patience < 1) throw Error(ErrorKind::InvalidArgument, "patience must be >= 1");
  if (!(cfg.min_improvement >= 0.0)) throw Error(ErrorKind::InvalidArgument, "min_improvement must be >= 0");
  if (cfg.max_rank < 1) throw Error(ErrorKind::InvalidArgument, "max_rank must be >= 1");
  if (cfg.dbscan.min_samples < 1) throw Error(ErrorKind::InvalidArgument, "min_samples must be >= 1");
  if (!(cfg.dbscan.eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  for (double e : cfg.eps_schedule)
    if (!(e > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps schedule values must be > 0");
  if (cfg.rules.min_size < 1 || cfg.rules.min_cameras < 1) {
    throw Error(ErrorKind::InvalidArgument, "min_size and min_cameras must be >= 1");
  }
  if (cfg.pk.p < 2 || cfg.pk.k < 2) throw Error(ErrorKind::InvalidArgument, "PK sampling needs p >= 2 and k >= 2");
  if (const auto* m = std::get_if<MockTrainer>(&cfg.trainer)) {
    if (!(m->alpha > 0.0 && m->alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mock alpha must lie in (0, 1]");
    if (m->propagate && !(m->ridge > 0.0)) throw Error(ErrorKind::InvalidArgument, "mock ridge must be > 0");
  } else {
    if (std::get<ExternalTrainer>(cfg.trainer).command.empty()) {
      throw Error(ErrorKind::InvalidArgument, "external trainer command is empty");
    }
    if (cfg.workdir.empty()) throw Error(ErrorKind::InvalidArgument, "external trainer needs a workdir");
  }
}

LoopResult run_loop(const FeatureSet& train, const FeatureSet& query, const FeatureSet& gallery,
                    const LoopConfig& cfg, const IterationObserver& observer) {
  validate(cfg);
  check_disjoint(train, query, gallery);
  if (query.dim() != gallery.dim()) throw Error(ErrorKind::DimensionMismatch, "query and gallery widths differ");
  if (!query.has_persons() || !gallery.has_persons()) {
    throw Error(ErrorKind::InvalidArgument, "query and gallery need ground-truth persons");
  }

  LoopResult result;
  ModelState state{train, query, gallery};
  double best_map = 0.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = iteration_seed(cfg.seed, it);
    const FeatureSet clustered = cfg.use_camera_norm ? camera_normalize(state.train) : state.train;

    IterationRecord rec;
    rec.iteration = it;
    ClusterAssignment ca;
    if (cfg.algorithm == ClusterAlgorithm::Dbscan) {
      DbscanParams p = cfg.dbscan;
      p.eps = eps_for(cfg, it);
      rec.eps = p.eps;
      ca = dbscan(clustered, p);
    } else {
      ca = kmeans(clustered, k_heuristic(static_cast<long long>(clustered.size())), seed);
    }
    rec.n_clusters_raw = ca.n_clusters;

    auto ds = select_clusters_unchecked(state.train, ca, cfg.rules);
    if (ds.report.n_selected_clusters == 0) {
      if (result.records.empty()) {
        throw Error(ErrorKind::EmptySelection, "iteration " + std::to_string(it) + ": no cluster survived selection");
      }
      result.stop = StopReason::EmptySelection;
      break;
    }
    rec.n_clusters_selected = ds.n_identities();
    rec.n_selected_samples = ds.report.n_selected_samples;
    rec.portion_selected = ds.report.portion_selected;
    if (state.train.has_persons()) rec.purity = mean_cluster_purity(state.train, ds);

    if (const auto* mock = std::get_if<MockTrainer>(&cfg.trainer)) {
      state = mock_step(state, ds, *mock);
    } else {
      PkConfig pk = cfg.pk;
      pk.seed = seed;
      const auto batches = pk_epoch(ds, pk);
      state = external_step(state, ds, batches, it, seed, std::get<ExternalTrainer>(cfg.trainer), cfg.workdir);
    }

    const auto dist = pairwise_distances(state.query, state.gallery, Metric::Euclidean);
    rec.eval = evaluate(dist, state.query, state.gallery, cfg.max_rank);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (result.records.empty() || rec.eval.map > best_map + cfg.min_improvement) {
      best_map = rec.eval.map;
      result.best = result.records.size();
    }
    result.records.push_back(rec);
    if (observer) observer(result.records.back());
    if (result.records.size() - 1 - result.best >= static_cast<std::size_t>(cfg.patience)) {
      result.stop = StopReason::Patience;
      break;
    }
  }
  return result;
}

}  // namespace plr
