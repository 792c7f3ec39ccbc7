#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "plr/feature_store.hpp"
#include "plr/sampler.hpp"
#include "plr/selection.hpp"

namespace plr {

/// Moves every selected row toward its pseudo-id centroid on the unit sphere:
/// f' = normalize((1 - alpha) * f^ + alpha * c^), where f^ is the
/// L2-normalized row and c^ the mean of its pseudo id's normalized rows.
/// Unselected rows are copied unchanged; alpha = 0 returns fs itself.
FeatureSet mock_train(const FeatureSet& fs, const PseudoLabelDataset& ds, double alpha);

/// Stand-in for fine-tuning. With propagate off only the training rows move
/// (mock_train). With propagate on, a linear map W is fitted by ridge
/// regression from the selected normalized rows to their mock_train targets,
/// shrunk toward the identity with weight `ridge`, and every row of train,
/// query and gallery becomes normalize(normalize(f) W).
struct MockTrainer {
  double alpha = 0.5;
  bool propagate = true;
  double ridge = 10.0;
};

/// File-protocol trainer. `{manifest}` in the command is replaced by the
/// manifest path; without the placeholder the path is appended as the last
/// argument.
struct ExternalTrainer {
  std::string command;
};

using TrainerConfig = std::variant<MockTrainer, ExternalTrainer>;

struct ModelState {
  FeatureSet train;
  FeatureSet query;
  FeatureSet gallery;
};

ModelState mock_step(const ModelState& state, const PseudoLabelDataset& ds, const MockTrainer& cfg);

/// Writes `iter_<i>/` under workdir (features.plrf, query.plrf, gallery.plrf,
/// pseudo.csv, batches.csv, manifest.txt), runs the command and reads
/// features_out.plrf back, plus query_out.plrf / gallery_out.plrf when the
/// trainer wrote them. Throws TrainerFailure on a non-zero exit, a missing or
/// malformed output, or ids that differ from the input.
ModelState external_step(const ModelState& state, const PseudoLabelDataset& ds, const std::vector<Batch>& batches,
                         int iteration, std::uint64_t seed, const ExternalTrainer& cfg,
                         const std::filesystem::path& workdir);

}  // namespace plr
