#pragma once

#include <string>
#include <vector>

#include "hashnets/linalg.hpp"

namespace hashnets {

struct SpectralReport {
  double sigma_min = 0.0;  // sigma at index min(rows, cols)
  double sigma_max = 0.0;
  double condition = 0.0;  // +inf when sigma_min == 0
  double stable_rank = 0.0;
  bool full_rank = false;
  DenseVector singular_values;
};

/// full_rank means sigma_min > rank_tol * sigma_max.
SpectralReport spectral_report(const DenseMatrix& w, double rank_tol = 1e-6);

struct SpectraRow {
  std::size_t seed = 0;
  std::string matrix;
  SpectralReport report;
};

/// One row per (seed, matrix); rows come back in input order. Matrices of
/// the same name must share a shape across seeds.
struct NamedMatrix {
  std::size_t seed = 0;
  std::string name;
  DenseMatrix w;
};
std::vector<SpectraRow> spectra_batch(const std::vector<NamedMatrix>& matrices, double rank_tol = 1e-6);

}  // namespace hashnets
