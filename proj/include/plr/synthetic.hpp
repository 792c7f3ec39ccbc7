#pragma once

#include <cstdint>

#include "plr/feature_store.hpp"

namespace plr {

/// Parameters of the synthetic domain-shift generator. Distances are absolute:
/// noise_sigma is the expected norm of a sample's noise vector, and identity
/// centers are spread so two centers lie about class_separation apart.
struct SyntheticSpec {
  int n_identities = 200;
  int samples_per_identity = 12;
  int n_cameras = 4;
  int dim = 64;
  double class_separation = 6.0;
  double camera_shift = 4.0;  // norm of each camera's offset vector
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
  int center_rank = 8;  // identity centers live in a subspace of this rank
};

struct SyntheticData {
  FeatureSet train;
  FeatureSet query;
  FeatureSet gallery;
};

/// Training identities and test identities are disjoint (persons 0..n-1 and
/// n..2n-1). Every identity is seen by 2..min(n_cameras, samples) cameras,
/// filled round-robin. Camera offsets lie in a plane orthogonal to the
/// center subspace. For every test identity the first sample of each camera
/// holding at least two of its samples becomes a query; the rest form the
/// gallery.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace plr
