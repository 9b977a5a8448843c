#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hashnets/linalg.hpp"

namespace hashnets {

/// Column c of `x` is sample c; features in [0, 1].
struct Dataset {
  DenseMatrix x;
  std::vector<std::uint32_t> labels;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t features() const { return x.rows(); }
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Either may be gzip-compressed. Pixels are scaled by 1/255. Throws
/// FormatError naming the offending field.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes pixels round(255 x) and labels as IDX; gzip when the path ends in ".gz".
/// `image_dims` must multiply to the feature count (e.g. {28, 28}).
void write_idx(const Dataset& data, const std::vector<std::uint32_t>& image_dims, const std::string& images_path,
               const std::string& labels_path);

/// One sample per line: `features` values then an integer label.
/// Empty lines are skipped; ragged rows throw FormatError.
Dataset load_csv(const std::string& path, std::size_t features);
void write_csv(const Dataset& data, const std::string& path);

/// First `count` samples and the rest.
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t count);
/// First `count` samples (all if count >= size).
Dataset take(const Dataset& data, std::size_t count);

}  // namespace hashnets
