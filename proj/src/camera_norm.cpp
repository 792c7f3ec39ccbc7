#include "plr/camera_norm.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "plr/error.hpp"

namespace plr {
namespace {

// Pairwise (cascade) summation over terms[lo, hi) for one component.
template <typename Term>
double pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) {
  constexpr std::size_t kLeaf = 8;
  if (hi - lo <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

std::array<std::vector<std::size_t>, kMaxCameras> rows_by_camera(const FeatureSet& fs) {
  std::array<std::vector<std::size_t>, kMaxCameras> groups;
  for (std::size_t i = 0; i < fs.size(); ++i) groups[fs.camera(i)].push_back(i);
  return groups;
}

}  // namespace

std::vector<CameraStats> camera_statistics(const FeatureSet& fs) {
  const auto groups = rows_by_camera(fs);
  const std::size_t d = fs.dim();
  const float* x = fs.values().data();

  std::vector<CameraStats> stats;
  for (int cam = 0; cam < kMaxCameras; ++cam) {
    const auto& rows = groups[cam];
    if (!rows.empty()) stats.push_back({cam, rows.size(), std::vector<double>(d), std::vector<double>(d)});
  }

#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < stats.size(); ++s) {
    auto& st = stats[s];
    const auto& rows = groups[st.camera];
    const double count = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < d; ++k) {
      const double mu = pairwise_sum(0, rows.size(), [&](std::size_t i) {
                          return static_cast<double>(x[rows[i] * d + k]);
                        }) / count;
      const double var = pairwise_sum(0, rows.size(), [&](std::size_t i) {
                           const double dev = x[rows[i] * d + k] - mu;
                           return dev * dev;
                         }) / count;
      st.mean[k] = mu;
      st.std[k] = std::max(std::sqrt(var), kStdFloor);
    }
  }
  return stats;
}

FeatureSet camera_normalize(const FeatureSet& fs) { return camera_normalize(fs, camera_statistics(fs)); }

FeatureSet camera_normalize(const FeatureSet& fs, const std::vector<CameraStats>& stats) {
  std::array<const CameraStats*, kMaxCameras> lookup{};
  for (const auto& st : stats) {
    if (st.mean.size() != fs.dim() || st.std.size() != fs.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "camera statistics width differs from feature dimension");
    }
    lookup[st.camera] = &st;
  }
  const std::size_t d = fs.dim();
  std::vector<float> out(fs.values().size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const CameraStats* st = lookup[fs.camera(i)];
    if (st == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "no statistics for camera " + std::to_string(fs.camera(i)));
    }
    const auto r = fs.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      out[i * d + k] = static_cast<float>((r[k] - st->mean[k]) / st->std[k]);
    }
  }
  return fs.with_values(std::move(out));
}

}  // namespace plr
