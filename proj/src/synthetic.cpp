#include "plr/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "plr/error.hpp"

namespace plr {
namespace {

struct Pool {
  std::vector<std::string> ids;
  std::vector<int> cameras;
  std::vector<int> persons;
  std::vector<float> values;
};

std::string sample_id(const char* prefix, int person, int camera, int j) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_p%05d_c%d_s%03d", prefix, person, camera, j);
  return buf;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& s) {
  if (s.n_identities < 1 || s.samples_per_identity < 1 || s.n_cameras < 1 || s.dim < 2 || s.center_rank < 1) {
    throw Error(ErrorKind::InvalidArgument, "synthetic counts must be >= 1 and dim >= 2");
  }
  if (s.n_cameras > kMaxCameras) throw Error(ErrorKind::InvalidArgument, "at most 256 cameras");
  if (!(s.class_separation >= 0.0 && s.camera_shift >= 0.0 && s.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "separation, shift and sigma must be non-negative");
  }
  if (s.n_cameras < 2) throw Error(ErrorKind::InfeasibleSpec, "every identity needs >= 2 cameras, only 1 exists");
  if (s.samples_per_identity < 2) {
    throw Error(ErrorKind::InfeasibleSpec, "every identity needs >= 2 samples to span 2 cameras");
  }

  const int d = s.dim;
  const int nuisance = std::min(2, d - 1);
  const int rank = std::min(s.center_rank, d - nuisance);
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd raw(d, rank + nuisance);
  for (int c = 0; c < raw.cols(); ++c)
    for (int r = 0; r < d; ++r) raw(r, c) = gauss(rng);
  const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                                Eigen::MatrixXd::Identity(d, rank + nuisance);
  const auto centers_basis = basis.leftCols(rank);
  const auto offsets_basis = basis.rightCols(nuisance);

  std::vector<Eigen::VectorXd> offsets;
  for (int c = 0; c < s.n_cameras; ++c) {
    Eigen::VectorXd v(nuisance);
    for (int k = 0; k < nuisance; ++k) v(k) = gauss(rng);
    const double norm = v.norm();
    offsets.push_back(norm > 0.0 ? Eigen::VectorXd(offsets_basis * v * (s.camera_shift / norm))
                                 : Eigen::VectorXd::Zero(d));
  }

  const double center_scale = s.class_separation / std::sqrt(2.0 * rank);
  const double noise_scale = s.noise_sigma / std::sqrt(static_cast<double>(d));
  const int max_cams = std::min(s.n_cameras, s.samples_per_identity);

  auto draw = [&](const char* prefix, int first_person) {
    Pool pool;
    std::vector<int> perm(s.n_cameras);
    for (int i = 0; i < s.n_identities; ++i) {
      const int person = first_person + i;
      Eigen::VectorXd coef(rank);
      for (int k = 0; k < rank; ++k) coef(k) = gauss(rng) * center_scale;
      const Eigen::VectorXd center = centers_basis * coef;
      const int m = std::uniform_int_distribution<int>(2, max_cams)(rng);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int j = 0; j < s.samples_per_identity; ++j) {
        const int cam = perm[j % m];
        pool.ids.push_back(sample_id(prefix, person, cam, j));
        pool.cameras.push_back(cam);
        pool.persons.push_back(person);
        for (int k = 0; k < d; ++k) {
          pool.values.push_back(static_cast<float>(center(k) + offsets[cam](k) + gauss(rng) * noise_scale));
        }
      }
    }
    return pool;
  };

  Pool train = draw("train", 0);
  Pool test = draw("test", s.n_identities);

  std::vector<std::size_t> query_rows;
  std::vector<std::size_t> gallery_rows;
  const auto spi = static_cast<std::size_t>(s.samples_per_identity);
  for (std::size_t first = 0; first < test.ids.size(); first += spi) {
    std::vector<std::size_t> chosen;
    for (int cam = 0; cam < s.n_cameras; ++cam) {
      std::vector<std::size_t> rows;
      for (std::size_t r = first; r < first + spi; ++r)
        if (test.cameras[r] == cam) rows.push_back(r);
      if (rows.size() >= 2) chosen.push_back(rows.front());
    }
    if (chosen.empty()) chosen.push_back(first);
    for (std::size_t r = first; r < first + spi; ++r) {
      (std::find(chosen.begin(), chosen.end(), r) != chosen.end() ? query_rows : gallery_rows).push_back(r);
    }
  }

  FeatureSet test_set(std::move(test.ids), std::move(test.cameras), std::move(test.persons),
                      static_cast<std::size_t>(d), std::move(test.values));
  return {FeatureSet(std::move(train.ids), std::move(train.cameras), std::move(train.persons),
                     static_cast<std::size_t>(d), std::move(train.values)),
          test_set.subset(query_rows), test_set.subset(gallery_rows)};
}

}  // namespace plr
