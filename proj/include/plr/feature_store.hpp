#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plr {

/// Person id used for junk / unknown samples.
inline constexpr int kUnknownPerson = -1;
inline constexpr int kMaxCameras = 256;
inline constexpr std::uint8_t kFeatureFormatVersion = 1;

struct SampleRef {
  std::size_t index = 0;
  std::string id;
  int camera = 0;

  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

/// N embeddings of width D plus per-sample metadata. Immutable once built;
/// the constructor enforces every invariant and throws plr::Error otherwise.
class FeatureSet {
 public:
  FeatureSet(std::vector<std::string> ids, std::vector<int> cameras,
             std::optional<std::vector<int>> persons, std::size_t dim, std::vector<float> values);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<int>& cameras() const noexcept { return cameras_; }
  const std::optional<std::vector<int>>& persons() const noexcept { return persons_; }
  bool has_persons() const noexcept { return persons_.has_value(); }

  const std::string& id(std::size_t i) const { return ids_[i]; }
  int camera(std::size_t i) const { return cameras_[i]; }
  /// Ground-truth person of row i, or kUnknownPerson when the set carries none.
  int person(std::size_t i) const { return persons_ ? (*persons_)[i] : kUnknownPerson; }
  SampleRef sample(std::size_t i) const { return {i, ids_[i], cameras_[i]}; }

  /// Distinct camera indices, ascending.
  std::vector<int> camera_set() const;

  /// Same metadata, new matrix of identical shape.
  FeatureSet with_values(std::vector<float> values) const;
  /// Rows at `indices`, in the given order.
  FeatureSet subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<int> cameras_;
  std::optional<std::vector<int>> persons_;
  std::size_t dim_;
  std::vector<float> values_;
};

// Canonical PLRF v1 encoding. Integers and floats are little-endian; the
// metadata block is one `id\tcamera[\tperson]\n` line per row.
std::string encode_features(const FeatureSet& fs);
FeatureSet decode_features(std::string_view bytes);

FeatureSet load_features(const std::filesystem::path& path);
void save_features(const FeatureSet& fs, const std::filesystem::path& path);

struct NormalizedRows {
  FeatureSet features;
  std::vector<std::size_t> zero_rows;  // left as all-zero
};

NormalizedRows l2_normalize_rows(const FeatureSet& fs);

}  // namespace plr
