#include "plr/feature_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "plr/error.hpp"

namespace plr {
namespace {

constexpr std::string_view kMagic = "PLRF";
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4 + 1;

std::string record(std::size_t i) { return "record " + std::to_string(i); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

// Accepts only the canonical decimal spelling so that decode/encode is a
// byte-exact round trip.
bool parse_canonical_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return false;
  return std::to_string(out) == text;
}

}  // namespace

FeatureSet::FeatureSet(std::vector<std::string> ids, std::vector<int> cameras,
                       std::optional<std::vector<int>> persons, std::size_t dim,
                       std::vector<float> values)
    : ids_(std::move(ids)),
      cameras_(std::move(cameras)),
      persons_(std::move(persons)),
      dim_(dim),
      values_(std::move(values)) {
  const std::size_t n = ids_.size();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "feature set must contain at least one row");
  if (dim_ == 0) throw Error(ErrorKind::DimensionMismatch, "feature dimension must be >= 1");
  if (cameras_.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "camera count " + std::to_string(cameras_.size()) + " != row count " + std::to_string(n));
  }
  if (persons_ && persons_->size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "person count " + std::to_string(persons_->size()) + " != row count " + std::to_string(n));
  }
  if (values_.size() != n * dim_) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix holds " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(n) + "x" + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = ids_[i];
    if (id.empty() || id.find_first_of("\t\n") != std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, record(i) + ": id must be non-empty without tab/newline");
    }
    if (cameras_[i] < 0 || cameras_[i] >= kMaxCameras) {
      throw Error(ErrorKind::InvalidArgument,
                  record(i) + ": camera " + std::to_string(cameras_[i]) + " outside [0, 255]");
    }
    if (persons_ && (*persons_)[i] < kUnknownPerson) {
      throw Error(ErrorKind::InvalidArgument,
                  record(i) + ": person " + std::to_string((*persons_)[i]) + " below -1");
    }
    for (float v : row(i)) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, record(i) + " holds a non-finite value");
    }
  }
}

std::vector<int> FeatureSet::camera_set() const {
  std::set<int> distinct(cameras_.begin(), cameras_.end());
  return {distinct.begin(), distinct.end()};
}

FeatureSet FeatureSet::with_values(std::vector<float> values) const {
  return FeatureSet(ids_, cameras_, persons_, dim_, std::move(values));
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  std::vector<std::string> ids;
  std::vector<int> cams;
  std::optional<std::vector<int>> persons;
  if (persons_) persons.emplace();
  std::vector<float> values;
  ids.reserve(indices.size());
  cams.reserve(indices.size());
  values.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= size()) throw Error(ErrorKind::InvalidArgument, "subset index " + std::to_string(i) + " out of range");
    ids.push_back(ids_[i]);
    cams.push_back(cameras_[i]);
    if (persons) persons->push_back((*persons_)[i]);
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
  }
  return FeatureSet(std::move(ids), std::move(cams), std::move(persons), dim_, std::move(values));
}

std::string encode_features(const FeatureSet& fs) {
  std::string out;
  out.reserve(kHeaderSize + fs.values().size() * 4 + fs.size() * 16);
  out.append(kMagic);
  out.push_back(static_cast<char>(kFeatureFormatVersion));
  put_u32(out, static_cast<std::uint32_t>(fs.size()));
  put_u32(out, static_cast<std::uint32_t>(fs.dim()));
  out.push_back(fs.has_persons() ? 1 : 0);
  for (float v : fs.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out.append(fs.id(i));
    out.push_back('\t');
    out.append(std::to_string(fs.camera(i)));
    if (fs.has_persons()) {
      out.push_back('\t');
      out.append(std::to_string(fs.person(i)));
    }
    out.push_back('\n');
  }
  return out;
}

FeatureSet decode_features(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || bytes.substr(0, 4) != kMagic) {
    throw Error(ErrorKind::MalformedHeader, "missing PLRF magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kFeatureFormatVersion) {
    throw Error(ErrorKind::MalformedHeader,
                "unsupported format version " + std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  const std::uint64_t n = get_u32(bytes, 5);
  const std::uint64_t d = get_u32(bytes, 9);
  const auto flag = static_cast<unsigned char>(bytes[13]);
  if (flag > 1) throw Error(ErrorKind::MalformedHeader, "has_persons flag must be 0 or 1");
  const bool has_persons = flag == 1;
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "header declares N=0");
  if (d == 0) throw Error(ErrorKind::DimensionMismatch, "header declares D=0");

  const std::uint64_t payload = n * d * 4;
  if (bytes.size() - kHeaderSize < payload) {
    const std::uint64_t complete_rows = (bytes.size() - kHeaderSize) / (d * 4);
    throw Error(ErrorKind::DimensionMismatch, record(complete_rows) + ": matrix payload truncated");
  }
  std::vector<float> values(n * d);
  std::size_t offset = kHeaderSize;
  for (std::uint64_t k = 0; k < n * d; ++k, offset += 4) {
    values[k] = std::bit_cast<float>(get_u32(bytes, offset));
    if (!std::isfinite(values[k])) {
      throw Error(ErrorKind::NonFiniteValue, record(k / d) + " holds a non-finite value");
    }
  }

  std::vector<std::string> ids;
  std::vector<int> cameras;
  std::optional<std::vector<int>> persons;
  if (has_persons) persons.emplace();
  ids.reserve(n);
  cameras.reserve(n);
  std::string_view meta = bytes.substr(offset);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto eol = meta.find('\n');
    if (eol == std::string_view::npos) {
      throw Error(ErrorKind::DimensionMismatch, record(i) + ": metadata line missing");
    }
    std::string_view line = meta.substr(0, eol);
    meta.remove_prefix(eol + 1);

    const auto t1 = line.find('\t');
    if (t1 == std::string_view::npos || t1 == 0) {
      throw Error(ErrorKind::MalformedMetadata, record(i) + ": expected id<TAB>camera");
    }
    std::string_view rest = line.substr(t1 + 1);
    std::string_view cam_text = rest;
    std::string_view person_text;
    const auto t2 = rest.find('\t');
    if (t2 != std::string_view::npos) {
      cam_text = rest.substr(0, t2);
      person_text = rest.substr(t2 + 1);
    }
    if (has_persons != (t2 != std::string_view::npos)) {
      throw Error(ErrorKind::MalformedMetadata, record(i) + ": person column presence disagrees with header");
    }
    int camera = 0;
    if (!parse_canonical_int(cam_text, camera)) {
      throw Error(ErrorKind::MalformedMetadata, record(i) + ": bad camera '" + std::string(cam_text) + "'");
    }
    if (has_persons) {
      int person = 0;
      if (!parse_canonical_int(person_text, person)) {
        throw Error(ErrorKind::MalformedMetadata, record(i) + ": bad person '" + std::string(person_text) + "'");
      }
      persons->push_back(person);
    }
    ids.emplace_back(line.substr(0, t1));
    cameras.push_back(camera);
  }
  if (!meta.empty()) throw Error(ErrorKind::DimensionMismatch, record(n) + ": trailing bytes after metadata");

  try {
    return FeatureSet(std::move(ids), std::move(cameras), std::move(persons), d, std::move(values));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::MalformedMetadata, e.what());
    throw;
  }
}

FeatureSet load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed for " + path.string());
  return decode_features(bytes);
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
  const std::string bytes = encode_features(fs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

NormalizedRows l2_normalize_rows(const FeatureSet& fs) {
  std::vector<float> values(fs.values().begin(), fs.values().end());
  std::vector<std::size_t> zero_rows;
  const std::size_t d = fs.dim();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double sq = 0.0;
    for (float v : fs.row(i)) sq += static_cast<double>(v) * v;
    if (sq == 0.0) {
      zero_rows.push_back(i);
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    float* r = values.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) r[k] = static_cast<float>(r[k] * inv);
  }
  return {fs.with_values(std::move(values)), std::move(zero_rows)};
}

}  // namespace plr
