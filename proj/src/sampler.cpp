#include "plr/sampler.hpp"

#include <algorithm>
#include <random>

#include "plr/error.hpp"

namespace plr {

std::vector<Batch> pk_epoch(const PseudoLabelDataset& ds, const PkConfig& cfg) {
  if (cfg.p < 2 || cfg.k < 2) throw Error(ErrorKind::InvalidArgument, "PK sampling needs p >= 2 and k >= 2");
  if (ds.samples.size() != ds.pseudo_ids.size()) {
    throw Error(ErrorKind::DimensionMismatch, "pseudo ids do not match samples");
  }
  int n_ids = 0;
  for (int pid : ds.pseudo_ids) {
    if (pid < 0) throw Error(ErrorKind::InvalidArgument, "negative pseudo id " + std::to_string(pid));
    n_ids = std::max(n_ids, pid + 1);
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_ids));
  for (std::size_t s = 0; s < ds.samples.size(); ++s) members[static_cast<std::size_t>(ds.pseudo_ids[s])].push_back(s);

  if (n_ids < cfg.p) {
    throw Error(ErrorKind::TooFewIdentities,
                std::to_string(n_ids) + " identities for p=" + std::to_string(cfg.p));
  }
  for (int pid = 0; pid < n_ids; ++pid) {
    const auto have = members[static_cast<std::size_t>(pid)].size();
    if (have < static_cast<std::size_t>(cfg.k)) {
      throw Error(ErrorKind::IdentityTooSmall, "pseudo id " + std::to_string(pid) + " has " +
                                                   std::to_string(have) + " samples, k=" + std::to_string(cfg.k));
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(n_ids));
  for (int i = 0; i < n_ids; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> epoch;
  const std::size_t rounds = static_cast<std::size_t>(n_ids / cfg.p);
  epoch.reserve(rounds);
  for (std::size_t b = 0; b < rounds; ++b) {
    Batch batch;
    batch.entries.reserve(static_cast<std::size_t>(cfg.batch_size()));
    for (int slot = 0; slot < cfg.p; ++slot) {
      const int pid = order[b * static_cast<std::size_t>(cfg.p) + static_cast<std::size_t>(slot)];
      auto pool = members[static_cast<std::size_t>(pid)];
      for (int t = 0; t < cfg.k; ++t) {
        const auto pick = std::uniform_int_distribution<std::size_t>(static_cast<std::size_t>(t), pool.size() - 1)(rng);
        std::swap(pool[static_cast<std::size_t>(t)], pool[pick]);
        batch.entries.push_back({ds.samples[pool[static_cast<std::size_t>(t)]], pid});
      }
    }
    epoch.push_back(std::move(batch));
  }
  return epoch;
}

}  // namespace plr
