#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "plr/clustering.hpp"
#include "plr/metrics.hpp"
#include "plr/sampler.hpp"
#include "plr/selection.hpp"
#include "plr/trainer.hpp"

namespace plr {

enum class ClusterAlgorithm { Dbscan, Kmeans };
std::string_view to_string(ClusterAlgorithm a) noexcept;
ClusterAlgorithm parse_algorithm(std::string_view name);

struct LoopConfig {
  ClusterAlgorithm algorithm = ClusterAlgorithm::Dbscan;
  DbscanParams dbscan;
  /// eps for iterations 1, 2, ...; the last entry holds for later iterations.
  /// Empty means dbscan.eps throughout.
  std::vector<double> eps_schedule;
  SelectionRules rules;
  PkConfig pk;
  bool use_camera_norm = true;
  int max_iterations = 15;
  int patience = 3;
  /// An mAP counts as an improvement when it beats the best so far by more
  /// than this margin.
  double min_improvement = 0.0;
  TrainerConfig trainer = MockTrainer{};
  std::uint64_t seed = 0;
  std::size_t max_rank = 10;
  std::filesystem::path workdir;  // required by the external trainer
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double eps = 0.0;   // 0 for k-means
  int n_clusters_raw = 0;
  int n_clusters_selected = 0;
  std::size_t n_selected_samples = 0;
  double portion_selected = 0.0;
  std::optional<double> purity;  // when training persons are known
  EvalResult eval;
  double wall_time = 0.0;  // seconds
};

enum class StopReason { MaxIterations, Patience, EmptySelection };
std::string_view to_string(StopReason r) noexcept;

struct LoopResult {
  std::vector<IterationRecord> records;
  std::size_t best = 0;  // index into records of the best mAP
  StopReason stop = StopReason::MaxIterations;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Progressive refinement: cluster (optionally on camera-normalized training
/// features), select, emit PK batches, train, evaluate query against gallery.
/// Stops at max_iterations, after `patience` iterations without an mAP
/// improvement, or when selection comes back empty after the first
/// iteration. An empty selection at iteration 1 throws EmptySelection.
LoopResult run_loop(const FeatureSet& train, const FeatureSet& query, const FeatureSet& gallery,
                    const LoopConfig& cfg, const IterationObserver& observer = {});

void validate(const LoopConfig& cfg);

/// Seed used for the PK sampler and k-means at a given iteration.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration) noexcept;

}  // namespace plr
