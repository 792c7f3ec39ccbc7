#include "dense_kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace plr::detail {
namespace {

// Keeps one double distance block around 64 MiB.
constexpr std::size_t kBlockBytes = std::size_t{64} << 20;

}  // namespace

UnitRows unit_rows(const FeatureSet& fs) {
  UnitRows u;
  u.n = fs.size();
  u.d = fs.dim();
  u.values.resize(u.n * u.d);
  u.sq_norms.resize(u.n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < u.n; ++i) {
    const auto r = fs.row(i);
    double sq = 0.0;
    for (float v : r) sq += static_cast<double>(v) * v;
    double* out = u.values.data() + i * u.d;
    if (sq == 0.0) {
      std::fill(out, out + u.d, 0.0);
      u.sq_norms[i] = 0.0;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    double unit_sq = 0.0;
    for (std::size_t k = 0; k < u.d; ++k) {
      out[k] = r[k] * inv;
      unit_sq += out[k] * out[k];
    }
    u.sq_norms[i] = unit_sq;
  }
  return u;
}

void gram(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t d, double* out) {
  using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto ni = static_cast<Eigen::Index>(na);
  const auto nj = static_cast<Eigen::Index>(nb);
  const auto nd = static_cast<Eigen::Index>(d);
  Eigen::Map<Rows> c(out, ni, nj);
  c.noalias() = Eigen::Map<const Rows>(a, ni, nd) * Eigen::Map<const Rows>(b, nj, nd).transpose();
}

double direct_distance(const double* a, double sq_a, const double* b, double sq_b, std::size_t d, Metric metric) {
  if (metric == Metric::Cosine) {
    if (sq_a == 0.0 || sq_b == 0.0) return 1.0;
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += a[k] * b[k];
    return std::max(0.0, 1.0 - dot);
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

void for_each_distance_block(const UnitRows& a, const UnitRows& b, Metric metric,
                             const std::function<void(std::size_t, std::size_t, const double*)>& fn) {
  if (a.n == 0 || b.n == 0) return;
  const std::size_t block = std::max<std::size_t>(1, kBlockBytes / (sizeof(double) * b.n));
  std::vector<double> buf(std::min(block, a.n) * b.n);
  for (std::size_t lo = 0; lo < a.n; lo += block) {
    const std::size_t hi = std::min(a.n, lo + block);
    gram(a.row(lo), hi - lo, b.values.data(), b.n, a.d, buf.data());
#pragma omp parallel for schedule(static)
    for (std::size_t i = lo; i < hi; ++i) {
      double* r = buf.data() + (i - lo) * b.n;
      const double sq_a = a.sq_norms[i];
      for (std::size_t j = 0; j < b.n; ++j) r[j] = distance_from_gram(r[j], sq_a, b.sq_norms[j], metric);
    }
    fn(lo, hi, buf.data());
  }
}

}  // namespace plr::detail
