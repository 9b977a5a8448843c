#include "hashnets/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "hashnets/error.hpp"

namespace hashnets {

namespace {

// gzread handles both compressed and plain files.
std::vector<unsigned char> read_all(const std::string& path, const std::string& field) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw Error(field + ": cannot open '" + path + "'");
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(f, gzclose);
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  for (;;) {
    const int got = gzread(f, buf, sizeof buf);
    if (got < 0) throw FormatError(field + ": read error in '" + path + "'");
    if (got == 0) break;
    out.insert(out.end(), buf, buf + got);
  }
  return out;
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t offset, const std::string& field) {
  if (b.size() < offset + 4) throw FormatError(field + ": truncated header");
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) | (std::uint32_t{b[offset + 2]} << 8) |
         std::uint32_t{b[offset + 3]};
}

void put_be32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

void write_all(const std::string& path, const std::vector<unsigned char>& bytes) {
  const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw Error("cannot open '" + path + "' for writing");
    const int put = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    if (gzclose(f) != Z_OK || put != static_cast<int>(bytes.size())) throw Error("write to '" + path + "' failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

std::size_t class_count(const std::vector<std::uint32_t>& labels) {
  std::uint32_t top = 0;
  for (auto l : labels) top = std::max(top, l);
  return labels.empty() ? 0 : top + 1;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_all(images_path, "images");
  const auto lab = read_all(labels_path, "labels");

  const std::uint32_t img_magic = be32(img, 0, "images magic");
  if (img_magic != 0x803) {
    std::ostringstream msg;
    msg << "images magic: expected 0x00000803, got 0x" << std::hex << img_magic;
    throw FormatError(msg.str());
  }
  const std::uint32_t lab_magic = be32(lab, 0, "labels magic");
  if (lab_magic != 0x801) {
    std::ostringstream msg;
    msg << "labels magic: expected 0x00000801, got 0x" << std::hex << lab_magic;
    throw FormatError(msg.str());
  }
  const std::size_t count = be32(img, 4, "images count");
  const std::size_t rows = be32(img, 8, "images rows");
  const std::size_t cols = be32(img, 12, "images cols");
  const std::size_t label_count = be32(lab, 4, "labels count");
  if (count != label_count)
    throw FormatError("labels count: " + std::to_string(label_count) + " does not match images count " +
                      std::to_string(count));
  const std::size_t features = rows * cols;
  if (img.size() != 16 + count * features)
    throw FormatError("images pixels: expected " + std::to_string(count * features) + " bytes, found " +
                      std::to_string(img.size() < 16 ? 0 : img.size() - 16));
  if (lab.size() != 8 + count)
    throw FormatError("labels data: expected " + std::to_string(count) + " bytes, found " +
                      std::to_string(lab.size() < 8 ? 0 : lab.size() - 8));

  Dataset d;
  d.x = DenseMatrix(features, count);
  for (std::size_t c = 0; c < count; ++c) {
    auto col = d.x.col(c);
    const unsigned char* px = img.data() + 16 + c * features;
    for (std::size_t f = 0; f < features; ++f) col[f] = px[f] / 255.0;
  }
  d.labels.assign(lab.begin() + 8, lab.end());
  d.classes = class_count(d.labels);
  return d;
}

void write_idx(const Dataset& data, const std::vector<std::uint32_t>& image_dims, const std::string& images_path,
               const std::string& labels_path) {
  std::size_t prod = 1;
  for (auto d : image_dims) prod *= d;
  require(image_dims.size() == 2 && prod == data.features(), "image dims must be {rows, cols} matching the feature count");
  std::vector<unsigned char> img;
  put_be32(img, 0x803);
  put_be32(img, static_cast<std::uint32_t>(data.size()));
  for (auto d : image_dims) put_be32(img, d);
  img.reserve(16 + data.size() * prod);
  for (std::size_t c = 0; c < data.size(); ++c)
    for (double v : data.x.col(c)) img.push_back(static_cast<unsigned char>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
  std::vector<unsigned char> lab;
  put_be32(lab, 0x801);
  put_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (auto l : data.labels) {
    require(l < 256, "IDX labels are single bytes");
    lab.push_back(static_cast<unsigned char>(l));
  }
  write_all(images_path, img);
  write_all(labels_path, lab);
}

Dataset load_csv(const std::string& path, std::size_t features) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<double> values;
  std::vector<std::uint32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != features + 1)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(features + 1) +
                        " fields, found " + std::to_string(fields.size()));
    for (std::size_t f = 0; f <= features; ++f) {
      auto field = fields[f];
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      if (f < features) {
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v))
          throw FormatError("line " + std::to_string(line_no) + ", column " + std::to_string(f + 1) + ": bad number");
        values.push_back(v);
      } else {
        std::uint32_t l = 0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), l);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size())
          throw FormatError("line " + std::to_string(line_no) + ", label: bad integer");
        labels.push_back(l);
      }
    }
  }
  Dataset d;
  d.x = DenseMatrix(features, labels.size());
  std::copy(values.begin(), values.end(), d.x.span().begin());
  d.labels = std::move(labels);
  d.classes = class_count(d.labels);
  return d;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  char buf[64];
  for (std::size_t c = 0; c < data.size(); ++c) {
    for (double v : data.x.col(c)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, res.ptr - buf);
      out.put(',');
    }
    out << data.labels[c] << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

namespace {

Dataset slice(const Dataset& data, std::size_t begin, std::size_t end) {
  Dataset d;
  d.x = DenseMatrix(data.features(), end - begin);
  for (std::size_t c = begin; c < end; ++c) std::copy(data.x.col(c).begin(), data.x.col(c).end(), d.x.col(c - begin).begin());
  d.labels.assign(data.labels.begin() + static_cast<std::ptrdiff_t>(begin), data.labels.begin() + static_cast<std::ptrdiff_t>(end));
  d.classes = data.classes;
  return d;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t count) {
  require(count <= data.size(), "split point beyond the dataset");
  return {slice(data, 0, count), slice(data, count, data.size())};
}

Dataset take(const Dataset& data, std::size_t count) { return slice(data, 0, std::min(count, data.size())); }

}  // namespace hashnets
