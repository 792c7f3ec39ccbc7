#include "plr/selection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "plr/error.hpp"

namespace plr {

std::string_view to_string(DropReason r) noexcept {
  switch (r) {
    case DropReason::Kept: return "kept";
    case DropReason::TooSmall: return "too_small";
    case DropReason::SingleCamera: return "single_camera";
    case DropReason::Noise: return "noise";
  }
  return "unknown";
}

PseudoLabelDataset select_clusters_unchecked(const FeatureSet& fs, const ClusterAssignment& ca,
                                             const SelectionRules& rules) {
  if (ca.labels.size() != fs.size()) {
    throw Error(ErrorKind::DimensionMismatch, "assignment has " + std::to_string(ca.labels.size()) +
                                                  " labels for " + std::to_string(fs.size()) + " samples");
  }
  if (rules.min_size < 1 || rules.min_cameras < 1) {
    throw Error(ErrorKind::InvalidArgument, "min_size and min_cameras must be >= 1");
  }

  struct Members {
    std::vector<std::size_t> rows;
    std::set<int> cameras;
  };
  std::map<int, Members> clusters;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const int l = ca.labels[i];
    if (l == kNoise) continue;
    if (l < 0) throw Error(ErrorKind::InvalidArgument, "negative cluster label " + std::to_string(l));
    auto& m = clusters[l];
    m.rows.push_back(i);
    m.cameras.insert(fs.camera(i));
  }

  PseudoLabelDataset ds;
  auto& rep = ds.report;
  rep.n_input_samples = fs.size();
  rep.sample_reasons.assign(fs.size(), DropReason::Noise);
  std::vector<int> pseudo(fs.size(), -1);
  int next = 0;
  for (const auto& [label, m] : clusters) {
    ClusterRecord rec{label, m.rows.size(), m.cameras.size(), DropReason::Kept, std::nullopt};
    rep.n_clustered += m.rows.size();
    if (m.rows.size() < static_cast<std::size_t>(rules.min_size)) {
      rec.decision = DropReason::TooSmall;
    } else if (m.cameras.size() < static_cast<std::size_t>(rules.min_cameras)) {
      rec.decision = DropReason::SingleCamera;
    } else {
      rec.pseudo_id = next++;
      rep.n_selected_samples += m.rows.size();
      for (std::size_t i : m.rows) pseudo[i] = *rec.pseudo_id;
    }
    for (std::size_t i : m.rows) rep.sample_reasons[i] = rec.decision;
    rep.clusters.push_back(rec);
  }
  rep.n_selected_clusters = static_cast<std::size_t>(next);
  rep.portion_selected = 100.0 * static_cast<double>(rep.n_selected_samples) / static_cast<double>(fs.size());

  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (pseudo[i] < 0) continue;
    ds.samples.push_back(fs.sample(i));
    ds.pseudo_ids.push_back(pseudo[i]);
  }
  return ds;
}

PseudoLabelDataset select_clusters(const FeatureSet& fs, const ClusterAssignment& ca, const SelectionRules& rules) {
  auto ds = select_clusters_unchecked(fs, ca, rules);
  if (ds.report.n_selected_clusters == 0) {
    throw Error(ErrorKind::EmptySelection,
                "no cluster has >= " + std::to_string(rules.min_size) + " samples across >= " +
                    std::to_string(rules.min_cameras) + " cameras");
  }
  return ds;
}

double mean_cluster_purity(const FeatureSet& fs, const PseudoLabelDataset& ds) {
  if (!fs.has_persons()) throw Error(ErrorKind::InvalidArgument, "purity needs ground-truth persons");
  if (ds.n_identities() == 0) return 0.0;
  std::vector<std::map<int, std::size_t>> votes(static_cast<std::size_t>(ds.n_identities()));
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    ++votes[static_cast<std::size_t>(ds.pseudo_ids[s])][fs.person(ds.samples[s].index)];
  }
  double sum = 0.0;
  for (const auto& v : votes) {
    std::size_t total = 0;
    std::size_t top = 0;
    for (const auto& [person, c] : v) {
      total += c;
      top = std::max(top, c);
    }
    sum += static_cast<double>(top) / static_cast<double>(total);
  }
  return sum / static_cast<double>(votes.size());
}

}  // namespace plr
