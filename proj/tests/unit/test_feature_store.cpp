#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "fixtures.hpp"
#include "plr/error.hpp"
#include "plr/feature_store.hpp"

using namespace plr;

namespace {

std::string header(std::uint32_t n, std::uint32_t d, std::uint8_t flag, std::uint8_t version = 1) {
  std::string h = "PLRF";
  h.push_back(static_cast<char>(version));
  for (auto v : {n, d})
    for (int s = 0; s < 32; s += 8) h.push_back(static_cast<char>((v >> s) & 0xFF));
  h.push_back(static_cast<char>(flag));
  return h;
}

std::string floats(std::initializer_list<float> vs) {
  std::string out;
  for (float v : vs) out.append(reinterpret_cast<const char*>(&v), 4);
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no plr::Error thrown");
  return ErrorKind::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("plr_fs_" + name);
}

}  // namespace

TEST_CASE("header declaring zero rows is rejected") {
  CHECK(kind_of([] { decode_features(header(0, 3, 0)); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { decode_features(header(1, 0, 0) + "a\t0\n"); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("two by three file decodes to a 2x3 matrix") {
  const std::string bytes = header(2, 3, 1) + floats({1, 2, 3, 4, 5, 6}) + "a\t0\t7\nb\t1\t-1\n";
  const auto fs = decode_features(bytes);
  CHECK(fs.size() == 2);
  CHECK(fs.dim() == 3);
  CHECK(fs.row(1)[2] == 6.0f);
  CHECK(fs.id(1) == "b");
  CHECK(fs.camera(1) == 1);
  CHECK(fs.person(0) == 7);
  CHECK(fs.person(1) == kUnknownPerson);
  CHECK(encode_features(fs) == bytes);
}

TEST_CASE("random 1000x128 files round-trip byte for byte") {
  const auto fs = fixture::random_features(1000, 128, 6, 50, 11);
  const std::string bytes = encode_features(fs);
  CHECK(encode_features(decode_features(bytes)) == bytes);
  CHECK(decode_features(bytes) == fs);

  const auto path = temp_path("roundtrip.plrf");
  save_features(fs, path);
  CHECK(load_features(path) == fs);
  save_features(load_features(path), path.string() + ".2");
  std::ifstream a(path, std::ios::binary), b(path.string() + ".2", std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".2");
}

TEST_CASE("single zero value survives a save and reload exactly") {
  const FeatureSet fs({"only"}, {0}, std::nullopt, 1, {0.0f});
  const auto path = temp_path("single.plrf");
  save_features(fs, path);
  CHECK(load_features(path) == fs);
  CHECK(encode_features(fs) == encode_features(fs));
  std::filesystem::remove(path);
}

TEST_CASE("payload size at DukeMTMC training scale") {
  const std::size_t n = 16522, d = 2048;
  std::vector<std::string> ids;
  std::vector<int> cams;
  std::size_t meta = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(fixture::sample_id(i));
    cams.push_back(static_cast<int>(i % 8));
    meta += ids.back().size() + 1 + 1 + 1;
  }
  const FeatureSet fs(ids, cams, std::nullopt, d, std::vector<float>(n * d, 0.25f));
  CHECK(encode_features(fs).size() == 14 + n * d * 4 + meta);
}

TEST_CASE("malformed inputs name their error kind") {
  const std::string good = header(1, 2, 0) + floats({1, 2}) + "a\t3\n";
  CHECK_NOTHROW(decode_features(good));
  CHECK(kind_of([&] { decode_features("PLRX" + good.substr(4)); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([&] { decode_features(header(1, 2, 0, 2) + good.substr(14)); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([&] { decode_features(header(1, 2, 5) + good.substr(14)); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([&] { decode_features("PLR"); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([&] { decode_features(header(2, 2, 0) + floats({1, 2, 3})); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { decode_features(good + "b\t1\n"); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { decode_features(header(1, 2, 0) + floats({1, 2})); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { decode_features(header(1, 2, 0) + floats({1, 2}) + "a\t03\n"); }) ==
        ErrorKind::MalformedMetadata);
  CHECK(kind_of([&] { decode_features(header(1, 2, 0) + floats({1, 2}) + "a\t300\n"); }) ==
        ErrorKind::MalformedMetadata);
  CHECK(kind_of([&] { decode_features(header(1, 2, 1) + floats({1, 2}) + "a\t3\n"); }) ==
        ErrorKind::MalformedMetadata);

  const float nan = std::numeric_limits<float>::quiet_NaN();
  try {
    decode_features(header(2, 1, 0) + floats({1, nan}) + "a\t0\nb\t0\n");
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteValue);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
}

TEST_CASE("constructor enforces the invariants") {
  CHECK(kind_of([] { FeatureSet({"a", "b"}, {0}, std::nullopt, 1, {1, 2}); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { FeatureSet({"a"}, {0}, std::nullopt, 2, {1}); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { FeatureSet({"a"}, {256}, std::nullopt, 1, {1}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { FeatureSet({"a\tb"}, {0}, std::nullopt, 1, {1}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { FeatureSet({"a"}, {0}, std::vector<int>{-2}, 1, {1}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { FeatureSet({"a"}, {0}, std::nullopt, 1, {INFINITY}); }) == ErrorKind::NonFiniteValue);
}

TEST_CASE("file errors surface as IoFailure") {
  CHECK(kind_of([] { load_features("/nonexistent/dir/x.plrf"); }) == ErrorKind::IoFailure);
  const FeatureSet fs({"a"}, {0}, std::nullopt, 1, {1});
  CHECK(kind_of([&] { save_features(fs, "/nonexistent/dir/x.plrf"); }) == ErrorKind::IoFailure);
}

TEST_CASE("row normalization") {
  const auto fs = fixture::from_rows({{3, 4}, {0, 0}}, {0, 1});
  const auto n = l2_normalize_rows(fs);
  CHECK(n.features.row(0)[0] == doctest::Approx(0.6f));
  CHECK(n.features.row(0)[1] == doctest::Approx(0.8f));
  CHECK(n.features.row(1)[0] == 0.0f);
  CHECK(n.features.row(1)[1] == 0.0f);
  REQUIRE(n.zero_rows.size() == 1);
  CHECK(n.zero_rows[0] == 1);
  CHECK(n.features.ids() == fs.ids());

  const auto r = fixture::random_features(100, 32, 3, 0, 5);
  const auto once = l2_normalize_rows(r).features;
  const auto twice = l2_normalize_rows(once).features;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double sq = 0;
    for (float v : once.row(i)) sq += double(v) * v;
    CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-6);
    for (std::size_t k = 0; k < r.dim(); ++k) CHECK(std::abs(once.row(i)[k] - twice.row(i)[k]) <= 1e-6);
  }
}

TEST_CASE("subset keeps metadata aligned") {
  const auto fs = fixture::random_features(10, 3, 2, 4, 1);
  const std::vector<std::size_t> pick{7, 2};
  const auto s = fs.subset(pick);
  CHECK(s.id(0) == fs.id(7));
  CHECK(s.person(1) == fs.person(2));
  CHECK(s.row(0)[2] == fs.row(7)[2]);
  CHECK(fs.sample(3) == SampleRef{3, fs.id(3), fs.camera(3)});
}
