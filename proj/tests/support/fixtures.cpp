#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fixture {

std::string sample_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%04zu", i);
  return buf;
}

plr::FeatureSet random_features(std::size_t n, std::size_t d, int n_cameras, int n_persons, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::uniform_int_distribution<int> cam(0, n_cameras - 1);
  std::uniform_int_distribution<int> per(0, std::max(0, n_persons - 1));
  std::vector<std::string> ids;
  std::vector<int> cams, persons;
  std::vector<float> values;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(sample_id(i));
    cams.push_back(cam(rng));
    persons.push_back(per(rng));
    for (std::size_t k = 0; k < d; ++k) values.push_back(g(rng));
  }
  std::optional<std::vector<int>> p;
  if (n_persons > 0) p = persons;
  return plr::FeatureSet(ids, cams, p, d, values);
}

plr::FeatureSet blobs_with_outliers(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<std::vector<float>> rows;
  std::vector<int> cams, persons;
  // Blob centers sit on the unit circle so the L2-normalized geometry keeps
  // them apart; spread is in angle.
  for (int b = 0; b < 5; ++b) {
    const double center = 2.0 * M_PI * b / 5.0 + angle(rng) * 0.1;
    for (int i = 0; i < 38; ++i) {
      const double a = center + g(rng) * 0.05;
      rows.push_back({static_cast<float>(std::cos(a)), static_cast<float>(std::sin(a))});
      cams.push_back(i % 2);
      persons.push_back(b);
    }
  }
  for (int i = 0; i < 10; ++i) {
    const double a = angle(rng);
    rows.push_back({static_cast<float>(std::cos(a)), static_cast<float>(std::sin(a))});
    cams.push_back(0);
    persons.push_back(-1);
  }
  return from_rows(rows, cams, persons);
}

plr::FeatureSet from_rows(const std::vector<std::vector<float>>& rows, const std::vector<int>& cameras,
                          const std::vector<int>& persons) {
  std::vector<std::string> ids;
  std::vector<float> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(sample_id(i));
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  std::optional<std::vector<int>> p;
  if (!persons.empty()) p = persons;
  return plr::FeatureSet(ids, cameras, p, rows.empty() ? 1 : rows[0].size(), values);
}

QueryGallery tiny_eval() {
  auto at = [](double d) {
    const double a = 2.0 * std::asin(d / 2.0);
    return std::vector<float>{static_cast<float>(std::cos(a)), static_cast<float>(std::sin(a))};
  };
  return {from_rows({at(0.0)}, {0}, {1}), from_rows({at(0.1), at(0.5)}, {1, 1}, {1, 2})};
}

RerankHand rerank_hand() {
  // Union order: q0 q1 q2 g0 .. g7.
  const std::vector<double> degrees{0, 120, 240, 10, 21, 33, 130, 141, 153, 250, 261};
  const std::vector<std::vector<int>> groups{{0, 3, 4, 5}, {1, 6, 7, 8}, {2, 9, 10}};
  const std::size_t n = degrees.size();
  std::vector<std::vector<float>> rows;
  for (double deg : degrees) {
    const double a = deg * M_PI / 180.0;
    rows.push_back({static_cast<float>(std::cos(a)), static_cast<float>(std::sin(a))});
  }
  auto d2 = [&](std::size_t i, std::size_t j) {
    const double dx = double(rows[i][0]) - rows[j][0], dy = double(rows[i][1]) - rows[j][1];
    return dx * dx + dy * dy;
  };
  std::vector<int> group_of(n);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int m : groups[g]) group_of[static_cast<std::size_t>(m)] = static_cast<int>(g);

  // Gaussian weights over each point's own group.
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double rowmax = 0;
    for (std::size_t j = 0; j < n; ++j) rowmax = std::max(rowmax, d2(i, j));
    double total = 0;
    for (int m : groups[static_cast<std::size_t>(group_of[i])]) total += std::exp(-d2(i, std::size_t(m)) / rowmax);
    for (int m : groups[static_cast<std::size_t>(group_of[i])])
      v[i][std::size_t(m)] = std::exp(-d2(i, std::size_t(m)) / rowmax) / total;
  }
  // Average with the nearest other point.
  std::vector<std::vector<double>> vq(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t nn = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && d2(i, j) < d2(i, nn)) nn = j;
    for (std::size_t j = 0; j < n; ++j) vq[i][j] = (v[i][j] + v[nn][j]) / 2;
  }
  std::vector<std::vector<double>> jac(3, std::vector<double>(8));
  for (std::size_t q = 0; q < 3; ++q) {
    for (std::size_t g = 0; g < 8; ++g) {
      double m = 0;
      for (std::size_t k = 0; k < n; ++k) m += std::min(vq[q][k], vq[3 + g][k]);
      jac[q][g] = 1 - m / (2 - m);
    }
  }
  std::vector<std::vector<float>> qrows(rows.begin(), rows.begin() + 3), grows(rows.begin() + 3, rows.end());
  return {from_rows(qrows, {0, 0, 0}), from_rows(grows, std::vector<int>(8, 1)), jac};
}

}  // namespace fixture
