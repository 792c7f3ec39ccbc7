#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "plr/clustering.hpp"
#include "plr/feature_store.hpp"

namespace plr {

struct SelectionRules {
  int min_size = 4;     // K of the PK sampler
  int min_cameras = 2;
};

enum class DropReason { Kept, TooSmall, SingleCamera, Noise };
std::string_view to_string(DropReason r) noexcept;

struct ClusterRecord {
  int cluster = 0;
  std::size_t size = 0;
  std::size_t cameras = 0;
  DropReason decision = DropReason::Kept;
  std::optional<int> pseudo_id;
};

struct SelectionReport {
  std::size_t n_input_samples = 0;
  std::size_t n_clustered = 0;
  std::size_t n_selected_clusters = 0;
  std::size_t n_selected_samples = 0;
  double portion_selected = 0.0;  // percent of input samples retained
  std::vector<ClusterRecord> clusters;  // ascending cluster id
  std::vector<DropReason> sample_reasons;  // per input sample; Kept for retained ones
};

struct PseudoLabelDataset {
  std::vector<SampleRef> samples;  // ascending source index
  std::vector<int> pseudo_ids;     // parallel to samples
  SelectionReport report;

  int n_identities() const noexcept { return static_cast<int>(report.n_selected_clusters); }
};

/// Keeps non-noise clusters with at least min_size samples seen by at least
/// min_cameras cameras; survivors are renumbered 0.. by ascending original
/// cluster id. A cluster failing both rules is reported as too_small.
/// Throws EmptySelection (carrying no dataset) when nothing survives.
PseudoLabelDataset select_clusters(const FeatureSet& fs, const ClusterAssignment& ca, const SelectionRules& rules);

/// Same selection without the EmptySelection throw; callers inspect the report.
PseudoLabelDataset select_clusters_unchecked(const FeatureSet& fs, const ClusterAssignment& ca,
                                             const SelectionRules& rules);

/// Mean over selected pseudo ids of the majority ground-truth person share.
/// Returns 0 for an empty dataset; requires persons on `fs`.
double mean_cluster_purity(const FeatureSet& fs, const PseudoLabelDataset& ds);

}  // namespace plr
