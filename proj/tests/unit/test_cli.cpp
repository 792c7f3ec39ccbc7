#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "plr/cli.hpp"
#include "plr/error.hpp"
#include "plr/tables.hpp"

using namespace plr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "plr_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

Run plr_run(const std::string& args) {
  const auto out = dir() / "stdout.txt", err = dir() / "stderr.txt";
  const std::string cmd = std::string(PLR_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text_file(out), read_text_file(err)};
}

std::string path(const std::string& name) { return (dir() / name).string(); }

}  // namespace

TEST_CASE("help and version") {
  const auto h = plr_run("--help");
  CHECK(h.code == 0);
  CHECK(h.out.find("cluster") != std::string::npos);
  const auto v = plr_run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("feature format v1") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  save_features(fixture::random_features(20, 4, 2, 3, 1), path("f.plrf"));
  CHECK(plr_run("cluster --in " + path("f.plrf") + " --out " + path("l.csv") + " --bogus 1").code == 2);
  CHECK(plr_run("nosuchcommand").code == 2);
  const auto r = plr_run("cluster --in " + path("f.plrf") + " --out " + path("l.csv") + " --algo kmeans --eps 0.3");
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(plr_run("eval --query " + path("f.plrf") + " --gallery " + path("f.plrf") + " --metric cosine --rerank").code == 2);
  CHECK(plr_run("eval --query " + path("f.plrf") + " --gallery " + path("f.plrf") + " --k1 5").code == 2);
}

TEST_CASE("k-means with the heuristic on 14 samples fails with HeuristicZero") {
  save_features(fixture::random_features(14, 4, 2, 0, 1), path("small.plrf"));
  const auto r = plr_run("cluster --in " + path("small.plrf") + " --algo kmeans --k auto --out " + path("k.csv"));
  CHECK(r.code == 1);
  CHECK(r.err.find("HeuristicZero") != std::string::npos);
}

TEST_CASE("eval on the tiny fixture matches the library") {
  const auto [q, g] = fixture::tiny_eval();
  save_features(q, path("q.plrf"));
  save_features(g, path("g.plrf"));
  const auto r = plr_run("eval --query " + path("q.plrf") + " --gallery " + path("g.plrf"));
  REQUIRE(r.code == 0);
  std::ostringstream expect;
  write_eval_csv(expect, evaluate(pairwise_distances(q, g, Metric::Euclidean), q, g, 10));
  CHECK(r.out == expect.str());
  CHECK(r.out == "metric,value\nrank-1,1.0000\nrank-5,1.0000\nrank-10,1.0000\nmAP,1.0000\n");

  const auto none = plr_run("eval --query " + path("q.plrf") + " --gallery " + path("q.plrf"));
  CHECK(none.code == 1);
  CHECK(none.err.find("NoValidQuery") != std::string::npos);
}

TEST_CASE("cluster and select write the library tables") {
  const auto f = fixture::blobs_with_outliers(4);
  save_features(f, path("blobs.plrf"));
  REQUIRE(plr_run("cluster --in " + path("blobs.plrf") + " --eps 0.05 --out " + path("labels.csv")).code == 0);
  const auto ca = dbscan(f, {0.05, 4, Metric::Euclidean});
  std::ostringstream labels;
  write_labels_csv(labels, f, ca);
  CHECK(read_text_file(path("labels.csv")) == labels.str());

  const auto s = plr_run("select --in " + path("blobs.plrf") + " --labels " + path("labels.csv") + " --out " +
                         path("pseudo.csv") + " --report " + path("report.csv"));
  REQUIRE(s.code == 0);
  const auto ds = select_clusters(f, ca, {});
  std::ostringstream pseudo, report;
  write_pseudo_csv(pseudo, ds);
  write_report_csv(report, ds.report);
  CHECK(read_text_file(path("pseudo.csv")) == pseudo.str());
  CHECK(read_text_file(path("report.csv")) == report.str());

  REQUIRE(plr_run("sample --pseudo " + path("pseudo.csv") + " --p 2 --k 4 --seed 9 --out " + path("b.csv")).code == 0);
  std::ostringstream batches;
  write_batches_csv(batches, pk_epoch(ds, {2, 4, 9}));
  CHECK(read_text_file(path("b.csv")) == batches.str());
}

TEST_CASE("synth and loop") {
  write_text_file(path("spec.txt"), "n_identities = 30\nsamples_per_identity = 8\ndim = 16\nseed = 2\n");
  REQUIRE(plr_run("synth --spec " + path("spec.txt") + " --out-prefix " + path("syn_")).code == 0);
  write_text_file(path("loop.txt"),
                  "train = syn_train.plrf\nquery = syn_query.plrf\ngallery = syn_gallery.plrf\nmax_iterations = 2\n");
  REQUIRE(plr_run("loop --config " + path("loop.txt") + " --workdir " + path("w1")).code == 0);
  REQUIRE(plr_run("loop --config " + path("loop.txt") + " --workdir " + path("w2")).code == 0);
  const auto h1 = read_text_file(dir() / "w1" / "history.csv");
  CHECK(h1 == read_text_file(dir() / "w2" / "history.csv"));
  CHECK(h1.rfind("iteration,eps,", 0) == 0);

  write_text_file(path("bad.txt"), "train = syn_train.plrf\nquery = syn_query.plrf\ngallery = syn_gallery.plrf\nfoo = 1\n");
  const auto bad = plr_run("loop --config " + path("bad.txt") + " --workdir " + path("w3"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("foo") != std::string::npos);
}
