#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "plr/camera_norm.hpp"
#include "plr/clustering.hpp"
#include "plr/metrics.hpp"
#include "plr/sampler.hpp"
#include "plr/selection.hpp"

namespace plr {

// CSV helpers. Fields holding a comma, quote or newline are quoted with
// doubled inner quotes; everything else is written verbatim.
std::string csv_field(const std::string& text);
std::vector<std::string> split_csv_line(const std::string& line);
/// Rows after the header, which must equal `header` exactly.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::vector<std::string>& header,
                                               const std::string& what);

void write_labels_csv(std::ostream& out, const FeatureSet& fs, const ClusterAssignment& ca);
/// Labels are matched to `fs` by sample id; every row of `fs` needs one.
/// Cluster ids are kept as written.
ClusterAssignment read_labels_csv(std::istream& in, const FeatureSet& fs);

void write_pseudo_csv(std::ostream& out, const PseudoLabelDataset& ds);
/// Samples are indexed by their line position. The report only carries the
/// counts derivable from the file.
PseudoLabelDataset read_pseudo_csv(std::istream& in);

void write_report_csv(std::ostream& out, const SelectionReport& report);
void write_batches_csv(std::ostream& out, const std::vector<Batch>& batches);
void write_stats_csv(std::ostream& out, const std::vector<CameraStats>& stats);
void write_eval_csv(std::ostream& out, const EvalResult& r);

/// `key = value` lines; blank lines and lines starting with '#' are ignored,
/// a value wrapped in double quotes is unwrapped. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_real(double v);

}  // namespace plr
