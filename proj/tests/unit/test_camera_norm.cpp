#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "plr/camera_norm.hpp"
#include "plr/error.hpp"

using namespace plr;

namespace {

// Per-camera mean and population std of every component, recomputed naively.
struct Moments {
  std::vector<double> mean, std;
};
std::map<int, Moments> moments(const FeatureSet& fs) {
  std::map<int, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < fs.size(); ++i) rows[fs.camera(i)].push_back(i);
  std::map<int, Moments> out;
  for (const auto& [cam, idx] : rows) {
    Moments m{std::vector<double>(fs.dim(), 0.0), std::vector<double>(fs.dim(), 0.0)};
    for (std::size_t i : idx)
      for (std::size_t k = 0; k < fs.dim(); ++k) m.mean[k] += fs.row(i)[k];
    for (auto& v : m.mean) v /= double(idx.size());
    for (std::size_t i : idx)
      for (std::size_t k = 0; k < fs.dim(); ++k) m.std[k] += std::pow(fs.row(i)[k] - m.mean[k], 2);
    for (auto& v : m.std) v = std::sqrt(v / double(idx.size()));
    out[cam] = m;
  }
  return out;
}

FeatureSet shifted_cameras(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<std::vector<float>> rows;
  std::vector<int> cams, persons;
  const int d = 8;
  std::vector<float> offset(d);
  for (auto& o : offset) o = 6.0f * g(rng);
  for (int p = 0; p < 20; ++p) {
    std::vector<float> center(d);
    for (auto& c : center) c = 2.0f * g(rng);
    for (int cam = 0; cam < 2; ++cam) {
      for (int s = 0; s < 3; ++s) {
        std::vector<float> r(d);
        for (int k = 0; k < d; ++k) {
          r[k] = center[k] + 0.3f * g(rng);
          if (cam == 1) r[k] += offset[k];
        }
        rows.push_back(r);
        cams.push_back(cam);
        persons.push_back(p);
      }
    }
  }
  return fixture::from_rows(rows, cams, persons);
}

}  // namespace

TEST_CASE("statistics of a hand-computable camera") {
  const auto fs = fixture::from_rows({{1, 1}, {3, 3}, {5, -2}}, {0, 0, 1});
  const auto stats = camera_statistics(fs);
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].camera == 0);
  CHECK(stats[0].count == 2);
  CHECK(stats[0].mean == std::vector<double>{2, 2});
  CHECK(stats[0].std == std::vector<double>{1, 1});
  // A single-row camera has its mean at the row and a floored std.
  CHECK(stats[1].mean == std::vector<double>{5, -2});
  CHECK(stats[1].std == std::vector<double>{kStdFloor, kStdFloor});
}

TEST_CASE("one entry per camera at Market1501 and DukeMTMC training sizes") {
  auto count = [](std::size_t n, int cams) {
    std::vector<std::vector<float>> rows(n, std::vector<float>{1.0f, 2.0f});
    std::vector<int> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<int>(i % cams);
    return camera_statistics(fixture::from_rows(rows, c)).size();
  };
  CHECK(count(12936, 6) == 6);
  CHECK(count(16522, 8) == 8);
}

TEST_CASE("normalization examples") {
  const auto constant = fixture::from_rows({{2, -1, 4}, {2, -1, 4}, {2, -1, 4}}, {3, 3, 3});
  const auto z = camera_normalize(constant);
  for (float v : z.values()) CHECK(v == 0.0f);

  const auto two = fixture::from_rows({{1}, {3}}, {0, 0});
  const auto out = camera_normalize(two);
  CHECK(out.row(0)[0] == -1.0f);
  CHECK(out.row(1)[0] == 1.0f);
  CHECK(out.ids() == two.ids());
  CHECK(out.cameras() == two.cameras());
}

TEST_CASE("post-conditions on random multi-camera sets") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto fs = fixture::random_features(300, 16, 5, 10, seed);
    // Scale and shift per camera so the input is far from standardized.
    std::vector<float> v(fs.values().begin(), fs.values().end());
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t k = 0; k < fs.dim(); ++k) v[i * fs.dim() + k] = v[i * fs.dim() + k] * (1.0f + fs.camera(i)) + 10.0f * fs.camera(i);
    fs = fs.with_values(v);
    const auto raw = moments(fs);
    const auto out = camera_normalize(fs);
    const auto norm = moments(out);
    for (const auto& [cam, m] : norm) {
      for (std::size_t k = 0; k < fs.dim(); ++k) {
        CHECK(std::abs(m.mean[k]) <= 1e-5);
        if (raw.at(cam).std[k] > kStdFloor) CHECK(std::abs(m.std[k] - 1.0) <= 1e-4);
      }
    }
    // Normalizing again keeps the same post-conditions.
    for (const auto& [cam, m] : moments(camera_normalize(out))) {
      for (std::size_t k = 0; k < fs.dim(); ++k) {
        CHECK(std::abs(m.mean[k]) <= 1e-5);
        CHECK(std::abs(m.std[k] - 1.0) <= 1e-4);
      }
    }
  }
}

TEST_CASE("row order commutes with normalization") {
  const auto fs = fixture::random_features(60, 6, 3, 5, 42);
  std::vector<std::size_t> perm(fs.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  const auto a = camera_normalize(fs).subset(perm);
  const auto b = camera_normalize(fs.subset(perm));
  for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= 1e-6);
}

TEST_CASE("a constant added to one camera leaves its output unchanged") {
  const auto fs = fixture::random_features(80, 5, 2, 0, 9);
  std::vector<float> v(fs.values().begin(), fs.values().end());
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs.camera(i) == 1)
      for (std::size_t k = 0; k < fs.dim(); ++k) v[i * fs.dim() + k] += 0.75f * float(k + 1);
  const auto a = camera_normalize(fs), b = camera_normalize(fs.with_values(v));
  for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= 1e-5);
}

TEST_CASE("shifted camera distributions coincide and cross-camera purity rises") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto fs = shifted_cameras(seed);
    const auto out = camera_normalize(fs);
    const auto m = moments(out);
    for (std::size_t k = 0; k < fs.dim(); ++k) CHECK(std::abs(m.at(0).mean[k] - m.at(1).mean[k]) <= 1e-5);
    CHECK(oracle::cross_camera_nn_purity(out) > oracle::cross_camera_nn_purity(fs));
  }
}

TEST_CASE("external statistics must cover every camera") {
  const auto fs = fixture::from_rows({{1}, {2}}, {0, 1});
  const auto stats = camera_statistics(fixture::from_rows({{1}, {2}}, {0, 0}));
  CHECK_THROWS_AS(camera_normalize(fs, stats), Error);
}
