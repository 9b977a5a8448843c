#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hashnets/dataset.hpp"
#include "hashnets/error.hpp"

using namespace hashnets;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("hashnets_test_" + name); }

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 8),
          static_cast<unsigned char>(v)};
}

std::vector<unsigned char> idx_images(std::uint32_t magic, std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                      std::size_t pixels) {
  std::vector<unsigned char> out;
  for (auto v : {magic, count, rows, cols}) {
    auto b = be32(v);
    out.insert(out.end(), b.begin(), b.end());
  }
  for (std::size_t i = 0; i < pixels; ++i) out.push_back(static_cast<unsigned char>(i % 256));
  return out;
}

std::vector<unsigned char> idx_labels(std::uint32_t count, std::vector<unsigned char> labels) {
  std::vector<unsigned char> out;
  for (auto v : {0x00000801u, count}) {
    auto b = be32(v);
    out.insert(out.end(), b.begin(), b.end());
  }
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Dataset four_images() {
  Dataset d;
  d.x = DenseMatrix(6, 4);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t r = 0; r < 6; ++r) d.x(r, c) = static_cast<double>((c * 6 + r) * 10 % 256) / 255.0;
  d.labels = {3, 1, 4, 1};
  d.classes = 10;
  return d;
}

}  // namespace

TEST_CASE("IDX round trip, plain and gzip") {
  const Dataset d = four_images();
  for (const std::string ext : {"", ".gz"}) {
    const auto img = temp_path("img" + ext), lab = temp_path("lab" + ext);
    write_idx(d, {2, 3}, img.string(), lab.string());
    const Dataset r = load_idx(img.string(), lab.string());
    CHECK(r.x == d.x);
    CHECK(r.labels == d.labels);
    CHECK(r.features() == 6);
    fs::remove(img);
    fs::remove(lab);
  }
}

TEST_CASE("IDX pixels are scaled to the unit interval") {
  const auto img = temp_path("raw_img"), lab = temp_path("raw_lab");
  write_bytes(img, idx_images(0x803, 2, 2, 2, 8));
  write_bytes(lab, idx_labels(2, {7, 0}));
  const Dataset r = load_idx(img.string(), lab.string());
  CHECK(r.size() == 2);
  CHECK(r.x(3, 1) == 7.0 / 255.0);
  CHECK(r.labels == std::vector<std::uint32_t>{7, 0});
  fs::remove(img);
  fs::remove(lab);
}

TEST_CASE("IDX format errors name the field") {
  const auto img = temp_path("bad_img"), lab = temp_path("bad_lab");
  write_bytes(lab, idx_labels(2, {1, 2}));

  write_bytes(img, idx_images(0x804, 2, 2, 2, 8));
  CHECK_THROWS_WITH_AS(load_idx(img.string(), lab.string()), doctest::Contains("magic"), FormatError);

  write_bytes(img, idx_images(0x803, 2, 2, 2, 5));
  CHECK_THROWS_WITH_AS(load_idx(img.string(), lab.string()), doctest::Contains("pixels"), FormatError);

  write_bytes(img, idx_images(0x803, 3, 2, 2, 12));
  CHECK_THROWS_WITH_AS(load_idx(img.string(), lab.string()), doctest::Contains("count"), FormatError);

  CHECK_THROWS_AS(load_idx(temp_path("missing").string(), lab.string()), Error);
  fs::remove(img);
  fs::remove(lab);
}

TEST_CASE("CSV loading by hand") {
  const auto p = temp_path("hand.csv");
  {
    std::ofstream out(p);
    out << "0.5,1,2\n\n0,0.25,0\n";
  }
  const Dataset d = load_csv(p.string(), 2);
  CHECK(d.size() == 2);
  CHECK(d.x == DenseMatrix{{0.5, 0}, {1, 0.25}});
  CHECK(d.labels == std::vector<std::uint32_t>{2, 0});
  fs::remove(p);
}

TEST_CASE("CSV errors") {
  const auto p = temp_path("bad.csv");
  {
    std::ofstream out(p);
    out << "1,2,0\n1,0\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(p.string(), 2), doctest::Contains("line 2"), FormatError);
  {
    std::ofstream out(p);
    out << "1,x,0\n";
  }
  CHECK_THROWS_AS(load_csv(p.string(), 2), FormatError);
  {
    std::ofstream out(p);
    out << "1,2,-1\n";
  }
  CHECK_THROWS_AS(load_csv(p.string(), 2), FormatError);
  {
    std::ofstream out(p);
  }
  CHECK(load_csv(p.string(), 2).size() == 0);
  fs::remove(p);
}

TEST_CASE("CSV round trip is exact") {
  Dataset d = four_images();
  d.x(0, 0) = 0.1 + 0.2;
  const auto p = temp_path("rt.csv");
  write_csv(d, p.string());
  const Dataset r = load_csv(p.string(), 6);
  CHECK(r.x == d.x);
  CHECK(r.labels == d.labels);
  fs::remove(p);
}

TEST_CASE("split and take") {
  const Dataset d = four_images();
  const auto [a, b] = split(d, 3);
  CHECK(a.size() == 3);
  CHECK(b.size() == 1);
  CHECK(b.labels[0] == 1);
  CHECK(b.x.col(0)[5] == d.x.col(3)[5]);
  CHECK(take(d, 10).size() == 4);
  CHECK(take(d, 2).labels == std::vector<std::uint32_t>{3, 1});
}

#ifdef HASHNETS_DATA_DIR
TEST_CASE("bundled digit subset loads") {
  const std::string dir = HASHNETS_DATA_DIR;
  const Dataset test = load_idx(dir + "/test-images-idx3-ubyte.gz", dir + "/test-labels-idx1-ubyte.gz");
  CHECK(test.size() == 2000);
  CHECK(test.features() == 784);
  for (double v : test.x.span()) {
    CHECK_UNARY(v >= 0.0);
    CHECK_UNARY(v <= 1.0);
  }
  for (auto l : test.labels) CHECK(l < 10);
}
#endif
