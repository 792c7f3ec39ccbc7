#include "plr/trainer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "plr/error.hpp"
#include "plr/tables.hpp"

namespace plr {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix unit_matrix(const FeatureSet& fs) {
  RowMatrix m(fs.size(), fs.dim());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto r = fs.row(i);
    for (std::size_t k = 0; k < fs.dim(); ++k) m(i, k) = r[k];
    const double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
  return m;
}

std::vector<float> to_unit_floats(const RowMatrix& m) {
  std::vector<float> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    const double inv = n > 0.0 ? 1.0 / n : 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) out[i * m.cols() + k] = static_cast<float>(m(i, k) * inv);
  }
  return out;
}

// Normalized rows and centroid targets for the selected samples.
struct PullTargets {
  std::vector<std::size_t> rows;
  RowMatrix x;
  RowMatrix y;
};

PullTargets pull_targets(const FeatureSet& fs, const PseudoLabelDataset& ds, double alpha) {
  if (ds.samples.size() != ds.pseudo_ids.size()) throw Error(ErrorKind::DimensionMismatch, "malformed dataset");
  const RowMatrix unit = unit_matrix(fs);
  int n_ids = 0;
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    if (ds.samples[s].index >= fs.size() || fs.id(ds.samples[s].index) != ds.samples[s].id) {
      throw Error(ErrorKind::InvalidArgument, "pseudo-label dataset does not derive from these features");
    }
    n_ids = std::max(n_ids, ds.pseudo_ids[s] + 1);
  }
  RowMatrix centroids = RowMatrix::Zero(n_ids, fs.dim());
  std::vector<double> counts(static_cast<std::size_t>(n_ids), 0.0);
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    centroids.row(ds.pseudo_ids[s]) += unit.row(ds.samples[s].index);
    counts[static_cast<std::size_t>(ds.pseudo_ids[s])] += 1.0;
  }
  for (int c = 0; c < n_ids; ++c)
    if (counts[c] > 0.0) centroids.row(c) /= counts[c];

  PullTargets t;
  t.x.resize(ds.samples.size(), fs.dim());
  t.y.resize(ds.samples.size(), fs.dim());
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    const std::size_t i = ds.samples[s].index;
    t.rows.push_back(i);
    t.x.row(s) = unit.row(i);
    t.y.row(s) = (1.0 - alpha) * unit.row(i) + alpha * centroids.row(ds.pseudo_ids[s]);
    const double n = t.y.row(s).norm();
    if (n > 0.0) t.y.row(s) /= n;
  }
  return t;
}

FeatureSet apply_map(const FeatureSet& fs, const Eigen::MatrixXd& w) {
  const RowMatrix mapped = unit_matrix(fs) * w;
  return fs.with_values(to_unit_floats(mapped));
}

void check_same_samples(const FeatureSet& before, const FeatureSet& after, const std::string& what) {
  if (after.ids() != before.ids() || after.cameras() != before.cameras()) {
    throw Error(ErrorKind::TrainerFailure, what + " does not list the input samples in the input order");
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

}  // namespace

FeatureSet mock_train(const FeatureSet& fs, const PseudoLabelDataset& ds, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  if (alpha == 0.0) return fs;
  const auto t = pull_targets(fs, ds, alpha);
  std::vector<float> values(fs.values().begin(), fs.values().end());
  const std::size_t d = fs.dim();
  for (std::size_t s = 0; s < t.rows.size(); ++s) {
    for (std::size_t k = 0; k < d; ++k) values[t.rows[s] * d + k] = static_cast<float>(t.y(s, k));
  }
  return fs.with_values(std::move(values));
}

ModelState mock_step(const ModelState& state, const PseudoLabelDataset& ds, const MockTrainer& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mock alpha must lie in (0, 1]");
  if (!cfg.propagate) return {mock_train(state.train, ds, cfg.alpha), state.query, state.gallery};
  if (!(cfg.ridge > 0.0)) throw Error(ErrorKind::InvalidArgument, "mock ridge must be > 0");
  if (state.query.dim() != state.train.dim() || state.gallery.dim() != state.train.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "train, query and gallery widths differ");
  }
  const auto t = pull_targets(state.train, ds, cfg.alpha);
  const auto d = static_cast<Eigen::Index>(state.train.dim());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd gram = t.x.transpose() * t.x + cfg.ridge * eye;
  const Eigen::MatrixXd rhs = t.x.transpose() * t.y + cfg.ridge * eye;
  const Eigen::MatrixXd w = gram.ldlt().solve(rhs);
  return {apply_map(state.train, w), apply_map(state.query, w), apply_map(state.gallery, w)};
}

ModelState external_step(const ModelState& state, const PseudoLabelDataset& ds, const std::vector<Batch>& batches,
                         int iteration, std::uint64_t seed, const ExternalTrainer& cfg,
                         const std::filesystem::path& workdir) {
  namespace fs = std::filesystem;
  if (cfg.command.empty()) throw Error(ErrorKind::InvalidArgument, "external trainer command is empty");
  const fs::path dir = workdir / ("iter_" + std::to_string(iteration));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  const fs::path features = fs::absolute(dir / "features.plrf");
  const fs::path query = fs::absolute(dir / "query.plrf");
  const fs::path gallery = fs::absolute(dir / "gallery.plrf");
  const fs::path pseudo = fs::absolute(dir / "pseudo.csv");
  const fs::path batches_csv = fs::absolute(dir / "batches.csv");
  const fs::path features_out = fs::absolute(dir / "features_out.plrf");
  const fs::path query_out = fs::absolute(dir / "query_out.plrf");
  const fs::path gallery_out = fs::absolute(dir / "gallery_out.plrf");
  const fs::path manifest = fs::absolute(dir / "manifest.txt");
  for (const auto& stale : {features_out, query_out, gallery_out}) fs::remove(stale, ec);

  save_features(state.train, features);
  save_features(state.query, query);
  save_features(state.gallery, gallery);
  std::ostringstream text;
  write_pseudo_csv(text, ds);
  write_text_file(pseudo, text.str());
  text.str("");
  write_batches_csv(text, batches);
  write_text_file(batches_csv, text.str());
  text.str("");
  text << "iteration=" << iteration << "\nseed=" << seed << "\nfeatures=" << features.string()
       << "\nquery=" << query.string() << "\ngallery=" << gallery.string() << "\npseudo=" << pseudo.string()
       << "\nbatches=" << batches_csv.string() << "\nfeatures_out=" << features_out.string()
       << "\nquery_out=" << query_out.string() << "\ngallery_out=" << gallery_out.string() << '\n';
  write_text_file(manifest, text.str());

  std::string command = cfg.command;
  const std::string placeholder = "{manifest}";
  const auto at = command.find(placeholder);
  if (at == std::string::npos) command += " " + shell_quote(manifest.string());
  else command.replace(at, placeholder.size(), shell_quote(manifest.string()));
  const int status = std::system(command.c_str());
  if (status != 0) {
    throw Error(ErrorKind::TrainerFailure,
                "iteration " + std::to_string(iteration) + ": trainer exited with status " + std::to_string(status));
  }

  auto load = [&](const fs::path& p, const FeatureSet& before, const char* what) {
    try {
      FeatureSet out = load_features(p);
      check_same_samples(before, out, what);
      return out;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TrainerFailure) throw;
      throw Error(ErrorKind::TrainerFailure, std::string(what) + ": " + e.what());
    }
  };
  ModelState next{load(features_out, state.train, "features_out.plrf"), state.query, state.gallery};
  if (fs::exists(query_out)) next.query = load(query_out, state.query, "query_out.plrf");
  if (fs::exists(gallery_out)) next.gallery = load(gallery_out, state.gallery, "gallery_out.plrf");
  if (next.query.dim() != next.gallery.dim()) {
    throw Error(ErrorKind::TrainerFailure, "query and gallery widths differ after training");
  }
  return next;
}

}  // namespace plr
