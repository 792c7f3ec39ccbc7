#include "plr/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "plr/error.hpp"

namespace plr {
namespace {

int parse_int(const std::string& text, const std::string& where) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, where + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::vector<std::string>& header,
                                               const std::string& what) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw Error(ErrorKind::InvalidArgument, what + ": header must be '" + expected + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::InvalidArgument, what + " line " + std::to_string(lineno) + ": expected " +
                                                  std::to_string(header.size()) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

void write_labels_csv(std::ostream& out, const FeatureSet& fs, const ClusterAssignment& ca) {
  out << "id,camera,cluster\n";
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out << csv_field(fs.id(i)) << ',' << fs.camera(i) << ',' << ca.labels.at(i) << '\n';
  }
}

ClusterAssignment read_labels_csv(std::istream& in, const FeatureSet& fs) {
  const auto rows = read_csv(in, {"id", "camera", "cluster"}, "labels CSV");
  std::unordered_map<std::string, int> by_id;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int label = parse_int(rows[r][2], "labels CSV row " + std::to_string(r + 1));
    if (label < kNoise) throw Error(ErrorKind::InvalidArgument, "labels CSV: cluster below -1");
    if (!by_id.emplace(rows[r][0], label).second) {
      throw Error(ErrorKind::InvalidArgument, "labels CSV: duplicate id '" + rows[r][0] + "'");
    }
  }
  ClusterAssignment ca;
  ca.params.algorithm = "file";
  ca.labels.resize(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto it = by_id.find(fs.id(i));
    if (it == by_id.end()) throw Error(ErrorKind::DimensionMismatch, "labels CSV lacks id '" + fs.id(i) + "'");
    ca.labels[i] = it->second;
  }
  if (by_id.size() != fs.size()) throw Error(ErrorKind::DimensionMismatch, "labels CSV holds ids not in features");
  std::vector<int> distinct;
  for (int l : ca.labels)
    if (l != kNoise) distinct.push_back(l);
  std::sort(distinct.begin(), distinct.end());
  ca.n_clusters = static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  return ca;
}

void write_pseudo_csv(std::ostream& out, const PseudoLabelDataset& ds) {
  out << "id,camera,pseudo_id\n";
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    out << csv_field(ds.samples[s].id) << ',' << ds.samples[s].camera << ',' << ds.pseudo_ids[s] << '\n';
  }
}

PseudoLabelDataset read_pseudo_csv(std::istream& in) {
  const auto rows = read_csv(in, {"id", "camera", "pseudo_id"}, "pseudo CSV");
  PseudoLabelDataset ds;
  int n_ids = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "pseudo CSV row " + std::to_string(r + 1);
    const int pid = parse_int(rows[r][2], where);
    if (pid < 0) throw Error(ErrorKind::InvalidArgument, where + ": negative pseudo id");
    ds.samples.push_back({r, rows[r][0], parse_int(rows[r][1], where)});
    ds.pseudo_ids.push_back(pid);
    n_ids = std::max(n_ids, pid + 1);
  }
  ds.report.n_input_samples = rows.size();
  ds.report.n_clustered = rows.size();
  ds.report.n_selected_samples = rows.size();
  ds.report.n_selected_clusters = static_cast<std::size_t>(n_ids);
  ds.report.portion_selected = rows.empty() ? 0.0 : 100.0;
  return ds;
}

void write_report_csv(std::ostream& out, const SelectionReport& report) {
  out << "cluster,size,cameras,decision,pseudo_id\n";
  for (const auto& c : report.clusters) {
    out << c.cluster << ',' << c.size << ',' << c.cameras << ',' << to_string(c.decision) << ',';
    if (c.pseudo_id) out << *c.pseudo_id;
    out << '\n';
  }
}

void write_batches_csv(std::ostream& out, const std::vector<Batch>& batches) {
  out << "batch,slot,id,pseudo_id\n";
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& entries = batches[b].entries;
    for (std::size_t s = 0; s < entries.size(); ++s) {
      out << b << ',' << s << ',' << csv_field(entries[s].sample.id) << ',' << entries[s].pseudo_id << '\n';
    }
  }
}

void write_stats_csv(std::ostream& out, const std::vector<CameraStats>& stats) {
  out << "camera,count,mean_norm,std_min,std_max\n";
  for (const auto& s : stats) {
    double sq = 0.0;
    for (double m : s.mean) sq += m * m;
    const auto [lo, hi] = std::minmax_element(s.std.begin(), s.std.end());
    out << s.camera << ',' << s.count << ',' << format_real(std::sqrt(sq)) << ',' << format_real(*lo) << ','
        << format_real(*hi) << '\n';
  }
}

void write_eval_csv(std::ostream& out, const EvalResult& r) {
  out << "metric,value\n";
  for (std::size_t rank : {1, 5, 10}) {
    if (rank <= r.cmc.size()) out << "rank-" << rank << ',' << fixed4(r.rank(rank)) << '\n';
  }
  out << "mAP," << fixed4(r.map) << '\n';
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& what) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, what + " line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw Error(ErrorKind::InvalidArgument, what + " line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorKind::InvalidArgument, what + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace plr
