#pragma once

#include <cstdint>
#include <vector>

#include "plr/feature_store.hpp"
#include "plr/selection.hpp"

namespace plr {

struct PkConfig {
  int p = 16;  // identities per batch
  int k = 4;   // samples per identity
  std::uint64_t seed = 0;

  int batch_size() const noexcept { return p * k; }
};

struct BatchEntry {
  SampleRef sample;
  int pseudo_id = 0;

  friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

/// p * k entries; each identity's k entries are consecutive.
struct Batch {
  std::vector<BatchEntry> entries;

  friend bool operator==(const Batch&, const Batch&) = default;
};

/// One pass over the identities: they are shuffled by the seed and consumed p
/// at a time, dropping the final incomplete round. Each chosen identity
/// contributes k distinct samples drawn without replacement.
std::vector<Batch> pk_epoch(const PseudoLabelDataset& ds, const PkConfig& cfg);

}  // namespace plr
