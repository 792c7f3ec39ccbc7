#include "plr/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "plr/camera_norm.hpp"
#include "plr/error.hpp"
#include "plr/parallel.hpp"
#include "plr/rerank.hpp"
#include "plr/tables.hpp"

namespace plr {
namespace {

namespace fs = std::filesystem;

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, "key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw Error(ErrorKind::InvalidArgument, "key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    out.push_back(parse_number<double>(key, b == std::string::npos ? "" : item.substr(b, e - b + 1)));
  }
  return out;
}

// Pops keys from a config map so that leftovers can be reported.
class Keys {
 public:
  explicit Keys(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }
  template <typename T>
  void number(const std::string& key, T& out) {
    if (auto v = take(key)) out = parse_number<T>(key, *v);
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = take(key)) out = parse_bool(key, *v);
  }
  void finish(const std::string& what) const {
    if (!kv_.empty()) throw Error(ErrorKind::InvalidArgument, what + ": unknown key '" + kv_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
};

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text_file(path, ss.str());
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_key_values(in, path.string());
}

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  out << "iteration,eps,n_clusters_raw,n_clusters_selected,n_selected_samples,portion_selected,purity,"
         "rank1,rank5,rank10,map,n_valid_queries\n";
  auto rank = [](const EvalResult& e, std::size_t r) { return r <= e.cmc.size() ? format_real(e.rank(r)) : ""; };
  for (const auto& r : records) {
    out << r.iteration << ',' << format_real(r.eps) << ',' << r.n_clusters_raw << ',' << r.n_clusters_selected << ','
        << r.n_selected_samples << ',' << format_real(r.portion_selected) << ','
        << (r.purity ? format_real(*r.purity) : "") << ',' << rank(r.eval, 1) << ',' << rank(r.eval, 5) << ','
        << rank(r.eval, 10) << ',' << format_real(r.eval.map) << ',' << r.eval.n_valid_queries << '\n';
  }
}

// ---- subcommands ----------------------------------------------------------

struct NormalizeArgs {
  std::string in, out, stats_out;
};

void run_normalize(const NormalizeArgs& a) {
  const auto fs_in = load_features(a.in);
  const auto stats = camera_statistics(fs_in);
  save_features(camera_normalize(fs_in, stats), a.out);
  if (!a.stats_out.empty()) write_file(a.stats_out, [&](std::ostream& o) { write_stats_csv(o, stats); });
}

struct ClusterArgs {
  std::string in, out, algo = "dbscan", metric = "euclidean", k = "auto";
  double eps = DbscanParams{}.eps;
  int min_samples = DbscanParams{}.min_samples;
  std::uint64_t seed = 0;
};

void run_cluster(const ClusterArgs& a) {
  const auto fs_in = load_features(a.in);
  ClusterAssignment ca;
  if (parse_algorithm(a.algo) == ClusterAlgorithm::Dbscan) {
    ca = dbscan(fs_in, {a.eps, a.min_samples, parse_metric(a.metric)});
  } else {
    const int k = a.k == "auto" ? k_heuristic(static_cast<long long>(fs_in.size())) : parse_number<int>("--k", a.k);
    ca = kmeans(fs_in, k, a.seed);
  }
  write_file(a.out, [&](std::ostream& o) { write_labels_csv(o, fs_in, ca); });
  std::cout << "clusters " << ca.n_clusters << '\n';
}

struct SweepArgs {
  std::string in, out, metric = "euclidean";
  std::vector<double> grid;
  int min_samples = DbscanParams{}.min_samples;
  SelectionRules rules;
};

void run_sweep(const SweepArgs& a) {
  const auto fs_in = load_features(a.in);
  write_file(a.out, [&](std::ostream& o) {
    o << "eps,n_clusters,n_noise,noise_portion,n_selected_clusters,portion_selected\n";
    for (double eps : a.grid) {
      const auto ca = dbscan(fs_in, {eps, a.min_samples, parse_metric(a.metric)});
      const auto ds = select_clusters_unchecked(fs_in, ca, a.rules);
      const auto noise = fs_in.size() - ds.report.n_clustered;
      o << format_real(eps) << ',' << ca.n_clusters << ',' << noise << ','
        << format_real(100.0 * static_cast<double>(noise) / static_cast<double>(fs_in.size())) << ','
        << ds.report.n_selected_clusters << ',' << format_real(ds.report.portion_selected) << '\n';
    }
  });
}

struct SelectArgs {
  std::string in, labels, out, report;
  SelectionRules rules;
};

void run_select(const SelectArgs& a) {
  const auto fs_in = load_features(a.in);
  std::istringstream labels(read_text_file(a.labels));
  const auto ca = read_labels_csv(labels, fs_in);
  const auto ds = select_clusters_unchecked(fs_in, ca, a.rules);
  if (!a.report.empty()) write_file(a.report, [&](std::ostream& o) { write_report_csv(o, ds.report); });
  if (ds.report.n_selected_clusters == 0) {
    throw Error(ErrorKind::EmptySelection, "no cluster survived selection");
  }
  write_file(a.out, [&](std::ostream& o) { write_pseudo_csv(o, ds); });
  char portion[32];
  std::snprintf(portion, sizeof portion, "%.2f", ds.report.portion_selected);
  std::cout << "selected " << ds.report.n_selected_clusters << " clusters, " << ds.report.n_selected_samples << '/'
            << ds.report.n_input_samples << " samples (" << portion << "%)\n";
}

struct SampleArgs {
  std::string pseudo, out;
  PkConfig pk;
};

void run_sample(const SampleArgs& a) {
  std::istringstream in(read_text_file(a.pseudo));
  const auto batches = pk_epoch(read_pseudo_csv(in), a.pk);
  write_file(a.out, [&](std::ostream& o) { write_batches_csv(o, batches); });
}

struct EvalArgs {
  std::string query, gallery, out, metric = "euclidean";
  bool rerank = false;
  bool camera_norm = false;
  RerankParams rr;
  std::size_t max_rank = 10;
};

void run_eval(const EvalArgs& a) {
  auto q = load_features(a.query);
  auto g = load_features(a.gallery);
  if (a.camera_norm) {
    std::vector<std::string> ids = q.ids();
    ids.insert(ids.end(), g.ids().begin(), g.ids().end());
    std::vector<int> cams = q.cameras();
    cams.insert(cams.end(), g.cameras().begin(), g.cameras().end());
    std::vector<float> vals(q.values().begin(), q.values().end());
    vals.insert(vals.end(), g.values().begin(), g.values().end());
    if (q.dim() != g.dim()) throw Error(ErrorKind::DimensionMismatch, "query and gallery widths differ");
    const auto stats = camera_statistics(FeatureSet(ids, cams, std::nullopt, q.dim(), vals));
    q = camera_normalize(q, stats);
    g = camera_normalize(g, stats);
  }
  const auto dist = a.rerank ? k_reciprocal_rerank(q, g, a.rr) : pairwise_distances(q, g, parse_metric(a.metric));
  const auto result = evaluate(dist, q, g, a.max_rank);
  if (a.out.empty()) {
    write_eval_csv(std::cout, result);
  } else {
    write_file(a.out, [&](std::ostream& o) { write_eval_csv(o, result); });
  }
}

struct LoopArgs {
  std::string config, workdir;
};

void run_loop_command(const LoopArgs& a) {
  const fs::path config_path(a.config);
  LoopFile lf = parse_loop_file(read_key_values(config_path), config_path.parent_path());
  const fs::path workdir(a.workdir);
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + workdir.string() + ": " + ec.message());
  lf.config.workdir = workdir;
  if (lf.config.rules.min_size != lf.config.pk.k) {
    std::cerr << "warning: min_size " << lf.config.rules.min_size << " differs from k " << lf.config.pk.k << '\n';
  }
  const auto train = load_features(lf.train);
  const auto query = load_features(lf.query);
  const auto gallery = load_features(lf.gallery);

  std::vector<IterationRecord> done;
  auto flush = [&] {
    write_file(workdir / "history.csv", [&](std::ostream& o) { write_history_csv(o, done); });
    write_file(workdir / "timing.csv", [&](std::ostream& o) {
      o << "iteration,wall_time_s\n";
      for (const auto& r : done) o << r.iteration << ',' << format_real(r.wall_time) << '\n';
    });
  };
  const auto result = run_loop(train, query, gallery, lf.config, [&](const IterationRecord& r) {
    done.push_back(r);
    flush();
    std::cerr << "iteration " << r.iteration << ": clusters " << r.n_clusters_raw << ", selected "
              << r.n_clusters_selected << ", mAP " << format_real(r.eval.map) << '\n';
  });
  flush();
  const auto& best = result.records[result.best];
  write_file(workdir / "summary.csv", [&](std::ostream& o) {
    o << "key,value\n"
      << "iterations," << result.records.size() << '\n'
      << "best_iteration," << best.iteration << '\n'
      << "best_map," << format_real(best.eval.map) << '\n'
      << "best_rank1," << format_real(best.eval.rank(1)) << '\n'
      << "stop_reason," << to_string(result.stop) << '\n';
  });
  std::cout << "best iteration " << best.iteration << " mAP " << format_real(best.eval.map) << " (stopped: "
            << to_string(result.stop) << ")\n";
}

struct SynthArgs {
  std::string spec, prefix;
};

void run_synth(const SynthArgs& a) {
  const auto data = generate_synthetic(parse_synthetic_spec(read_key_values(a.spec)));
  save_features(data.train, a.prefix + "train.plrf");
  save_features(data.query, a.prefix + "query.plrf");
  save_features(data.gallery, a.prefix + "gallery.plrf");
}

}  // namespace

LoopFile parse_loop_file(const std::map<std::string, std::string>& kv, const fs::path& base_dir) {
  Keys keys(kv);
  LoopFile lf;
  auto& c = lf.config;
  auto path = [&](const std::string& key) {
    auto v = keys.take(key);
    if (!v || v->empty()) throw Error(ErrorKind::InvalidArgument, "loop config: missing key '" + key + "'");
    const fs::path p(*v);
    return p.is_absolute() ? p : base_dir / p;
  };
  lf.train = path("train");
  lf.query = path("query");
  lf.gallery = path("gallery");
  if (auto v = keys.take("algorithm")) c.algorithm = parse_algorithm(*v);
  keys.number("eps", c.dbscan.eps);
  if (auto v = keys.take("eps_schedule")) c.eps_schedule = parse_real_list("eps_schedule", *v);
  keys.number("min_samples", c.dbscan.min_samples);
  if (auto v = keys.take("metric")) c.dbscan.metric = parse_metric(*v);
  keys.number("p", c.pk.p);
  keys.number("k", c.pk.k);
  c.rules.min_size = c.pk.k;
  keys.number("min_size", c.rules.min_size);
  keys.number("min_cameras", c.rules.min_cameras);
  keys.boolean("use_camera_norm", c.use_camera_norm);
  keys.number("max_iterations", c.max_iterations);
  keys.number("patience", c.patience);
  keys.number("min_improvement", c.min_improvement);
  keys.number("seed", c.seed);
  keys.number("max_rank", c.max_rank);
  const std::string trainer = keys.take("trainer").value_or("mock");
  if (trainer == "mock") {
    MockTrainer m;
    keys.number("alpha", m.alpha);
    keys.boolean("propagate", m.propagate);
    keys.number("ridge", m.ridge);
    c.trainer = m;
  } else if (trainer == "external") {
    c.trainer = ExternalTrainer{keys.take("command").value_or("")};
  } else {
    throw Error(ErrorKind::InvalidArgument, "loop config: trainer must be mock or external");
  }
  keys.finish("loop config");
  LoopConfig probe = c;
  probe.workdir = ".";  // supplied on the command line
  validate(probe);
  return lf;
}

SyntheticSpec parse_synthetic_spec(const std::map<std::string, std::string>& kv) {
  Keys keys(kv);
  SyntheticSpec s;
  keys.number("n_identities", s.n_identities);
  keys.number("samples_per_identity", s.samples_per_identity);
  keys.number("n_cameras", s.n_cameras);
  keys.number("dim", s.dim);
  keys.number("class_separation", s.class_separation);
  keys.number("camera_shift", s.camera_shift);
  keys.number("noise_sigma", s.noise_sigma);
  keys.number("seed", s.seed);
  keys.number("center_rank", s.center_rank);
  keys.finish("synthetic spec");
  return s;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Pseudo-label refinement for unsupervised person re-identification", "plr"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: all cores)")->check(CLI::NonNegativeNumber);
  app.set_version_flag("--version", std::string("plr ") + kVersion + " (feature format v" +
                                        std::to_string(kFeatureFormatVersion) + ")");

  NormalizeArgs na;
  auto* normalize = app.add_subcommand("normalize", "Per-camera feature standardization");
  normalize->add_option("--in", na.in, "Input features")->required();
  normalize->add_option("--out", na.out, "Output features")->required();
  normalize->add_option("--stats-out", na.stats_out, "Per-camera statistics CSV");

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "DBSCAN or k-means clustering");
  cluster->add_option("--in", ca.in, "Input features")->required();
  cluster->add_option("--out", ca.out, "Labels CSV")->required();
  cluster->add_option("--algo", ca.algo, "dbscan or kmeans")->check(CLI::IsMember({"dbscan", "kmeans"}));
  auto* eps = cluster->add_option("--eps", ca.eps, "DBSCAN radius")->check(CLI::PositiveNumber);
  auto* mins = cluster->add_option("--min-samples", ca.min_samples, "DBSCAN core threshold")->check(CLI::PositiveNumber);
  auto* metric = cluster->add_option("--metric", ca.metric, "euclidean or cosine")
                     ->check(CLI::IsMember({"euclidean", "cosine"}));
  auto* k = cluster->add_option("--k", ca.k, "k-means cluster count or 'auto' (floor(N/15))");
  auto* seed = cluster->add_option("--seed", ca.seed, "k-means seed");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep-eps", "Cluster counts and noise portion over an eps grid");
  sweep->add_option("--in", sa.in, "Input features")->required();
  sweep->add_option("--out", sa.out, "Sweep CSV")->required();
  sweep->add_option("--grid", sa.grid, "Comma-separated eps values")->required()->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep->add_option("--min-samples", sa.min_samples, "DBSCAN core threshold")->check(CLI::PositiveNumber);
  sweep->add_option("--metric", sa.metric, "euclidean or cosine")->check(CLI::IsMember({"euclidean", "cosine"}));
  sweep->add_option("--min-size", sa.rules.min_size, "Selection minimum cluster size")->check(CLI::PositiveNumber);
  sweep->add_option("--min-cameras", sa.rules.min_cameras, "Selection minimum camera count")
      ->check(CLI::PositiveNumber);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Reliable cluster selection");
  select->add_option("--in", sel.in, "Input features")->required();
  select->add_option("--labels", sel.labels, "Labels CSV")->required();
  select->add_option("--out", sel.out, "Pseudo-label CSV")->required();
  select->add_option("--report", sel.report, "Per-cluster report CSV");
  select->add_option("--min-size", sel.rules.min_size, "Minimum cluster size")->check(CLI::PositiveNumber);
  select->add_option("--min-cameras", sel.rules.min_cameras, "Minimum camera count")->check(CLI::PositiveNumber);

  SampleArgs sm;
  auto* sample = app.add_subcommand("sample", "PK batch emission for one epoch");
  sample->add_option("--pseudo", sm.pseudo, "Pseudo-label CSV")->required();
  sample->add_option("--out", sm.out, "Batches CSV")->required();
  sample->add_option("--p", sm.pk.p, "Identities per batch");
  sample->add_option("--k", sm.pk.k, "Samples per identity");
  sample->add_option("--seed", sm.pk.seed, "Shuffle seed");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "CMC and mAP of query against gallery");
  eval->add_option("--query", ea.query, "Query features")->required();
  eval->add_option("--gallery", ea.gallery, "Gallery features")->required();
  eval->add_option("--out", ea.out, "Result CSV (default: stdout)");
  auto* emetric = eval->add_option("--metric", ea.metric, "euclidean or cosine")
                      ->check(CLI::IsMember({"euclidean", "cosine"}));
  auto* rerank = eval->add_flag("--rerank", ea.rerank, "Apply k-reciprocal re-ranking");
  eval->add_option("--k1", ea.rr.k1, "Re-ranking neighborhood size")->needs(rerank);
  eval->add_option("--k2", ea.rr.k2, "Re-ranking expansion size")->needs(rerank);
  eval->add_option("--lambda", ea.rr.lambda, "Weight of the original distance")->needs(rerank);
  eval->add_flag("--camera-norm", ea.camera_norm, "Standardize query and gallery per camera first");
  eval->add_option("--max-rank", ea.max_rank, "Longest CMC rank")->check(CLI::PositiveNumber);
  emetric->excludes(rerank);

  LoopArgs la;
  auto* loop = app.add_subcommand("loop", "Iterated cluster, select, train, evaluate");
  loop->add_option("--config", la.config, "key = value configuration file")->required();
  loop->add_option("--workdir", la.workdir, "Output directory")->required();

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Synthetic train/query/gallery generator");
  synth->add_option("--spec", ya.spec, "key = value generator spec")->required();
  synth->add_option("--out-prefix", ya.prefix, "Path prefix for the three feature files")->required();

  try {
    app.parse(argc, argv);
    if (cluster->parsed()) {
      const bool is_kmeans = ca.algo == "kmeans";
      if (is_kmeans && (eps->count() || mins->count() || metric->count())) {
        throw CLI::ValidationError("--eps/--min-samples/--metric apply to --algo dbscan only");
      }
      if (!is_kmeans && (k->count() || seed->count())) {
        throw CLI::ValidationError("--k/--seed apply to --algo kmeans only");
      }
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (normalize->parsed()) run_normalize(na);
    else if (cluster->parsed()) run_cluster(ca);
    else if (sweep->parsed()) run_sweep(sa);
    else if (select->parsed()) run_select(sel);
    else if (sample->parsed()) run_sample(sm);
    else if (eval->parsed()) run_eval(ea);
    else if (loop->parsed()) run_loop_command(la);
    else if (synth->parsed()) run_synth(ya);
  } catch (const Error& e) {
    std::cerr << "plr: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "plr: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace plr
