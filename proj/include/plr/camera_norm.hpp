#pragma once

#include <cstddef>
#include <vector>

#include "plr/feature_store.hpp"

namespace plr {

/// Floor applied to every per-camera standard deviation component.
inline constexpr double kStdFloor = 1e-6;

struct CameraStats {
  int camera = 0;
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> std;  // population std, floored at kStdFloor
};

/// One entry per distinct camera, ordered by camera index.
std::vector<CameraStats> camera_statistics(const FeatureSet& fs);

/// Per-camera standardization: each row becomes (f - mean_c) / std_c using the
/// statistics of its own camera. Metadata is carried over unchanged.
FeatureSet camera_normalize(const FeatureSet& fs);
FeatureSet camera_normalize(const FeatureSet& fs, const std::vector<CameraStats>& stats);

}  // namespace plr
