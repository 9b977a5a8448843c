#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hashnets/activation.hpp"
#include "hashnets/classifier.hpp"
#include "hashnets/csv.hpp"
#include "hashnets/sketch.hpp"

namespace hashnets {

/// A verification suite's CSV plus its overall verdict.
struct SuiteResult {
  CsvTable table;
  bool pass = false;
  std::string summary;
};

/// Seed i of a suite uses seed value `first_seed + i`.
struct SeedRange {
  std::uint64_t first_seed = 0;
  std::size_t count = 20;
};

// ---- bucket-check: seed,min_load,max_load,pass ----------------------------

struct BucketCheckOptions {
  std::uint64_t domain = 50176;
  std::uint64_t buckets = 784;
  std::size_t degree = 16;  // 0 = ceil(log2 N)
  SeedRange seeds;
  /// Minimum fraction of seeds that must land inside [0.9, 1.1] N/B.
  double required_fraction = 0.95;
};
SuiteResult run_bucket_check(const BucketCheckOptions& o);

// ---- sketch-check: seed,rows,norm_distortion,inner_distortion,pass --------

struct SketchCheckOptions {
  SketchKind kind = SketchKind::CountSketch;
  std::size_t d = 5;
  std::size_t n = 8192;
  double eps = 0.25;
  double delta = 0.1;
  std::size_t rows = 0;       // 0 = suggest_sketch_rows(kind, d, eps, delta, row_constant)
  double row_constant = 1.0;
  std::size_t sparsity = 4;   // t for sparse-embedding
  std::size_t vectors = 10000;
  SeedRange seeds;
  double required_fraction = 0.9;
};
SuiteResult run_sketch_check(const SketchCheckOptions& o);

// ---- gap-curve: seed,s,max_gap,mean_gap ------------------------------------

struct GapCurveOptions {
  std::size_t input_dim = 256;
  std::size_t hidden_width = 256;
  std::size_t depth = 2;
  std::size_t subspace_dim = 8;
  std::vector<std::size_t> sizes{16, 32, 64, 128, 256};
  SketchKind kind = SketchKind::SparseEmbedding;
  std::size_t sparsity = 4;
  bool output_sketch = true;
  double norm_bound = 1.0;
  double radius = 1.0;
  Activation activation = Activation::relu();
  std::size_t samples = 2000;
  SeedRange seeds{0, 10};
};
/// Rows for every (seed, s) plus s = 0 rows for identity sketches. Passes
/// when the median max_gap is non-increasing in s and every identity gap is 0.
SuiteResult run_gap_curve(const GapCurveOptions& o);

// ---- hessian-check ----------------------------------------------------------
// seed,buckets,samples,reduction_error,lambda_min,lambda_max,pass

struct HessianCheckOptions {
  std::size_t n = 8, k = 3, buckets = 6, samples = 500;
  std::size_t vectors = 100;
  Activation activation = Activation::relu();
  SeedRange seeds;
  double tolerance = 1e-10;
};
SuiteResult run_hessian_check(const HessianCheckOptions& o);

// ---- recover: seed,step,sq_error,relative_error,ratio ----------------------

struct RecoverOptions {
  std::size_t n = 8, k = 3, buckets = 12, samples = 20000;
  double fraction = 0.01;
  std::size_t steps = 500;
  double step_size = 0.0;  // 0 = 1/M0
  Activation activation = Activation::relu();
  bool sign_output_weights = false;
  SeedRange seeds{0, 10};
  double target = 1e-6;
  double monotone_fraction = 0.95;
};
struct RecoverSeed {
  std::uint64_t seed = 0;
  double final_relative_error = 0.0;
  double non_increasing_fraction = 0.0;
  double m0 = 0.0, big_m0 = 0.0, step_size = 0.0;
  bool diverged = false;
  bool pass = false;
};
struct RecoverResult {
  SuiteResult suite;
  std::vector<RecoverSeed> seeds;
};
RecoverResult run_recover(const RecoverOptions& o);

// ---- compress-train: variant,params,epoch,train_loss,train_error,test_error

struct CompressTrainOptions {
  std::string train_images, train_labels, test_images, test_labels;
  /// 0 = use every sample; otherwise the first `train_limit` / `test_limit`.
  std::size_t train_limit = 0, test_limit = 0;
  std::size_t hidden = 500;
  double ratio = 64.0;
  bool hash_output = true;
  std::vector<Variant> variants{Variant::Hashed, Variant::Small, Variant::Thin};
  TrainConfig config;
};
struct CompressTrainResult {
  SuiteResult suite;
  std::vector<TrainedClassifier> runs;  // same order as options.variants
};
/// Passes when the hashed net's final test error is below every other variant's.
CompressTrainResult run_compress_train(const CompressTrainOptions& o);

// ---- spectra: seed,matrix,rows,cols,sigma_min,sigma_max,condition,stable_rank,full_rank

struct SpectraOptions {
  enum class Source { Teacher, Gaussian } source = Source::Teacher;
  std::size_t n = 8, k = 3, buckets = 12;  // teacher shape; Gaussian uses k x n
  double rank_tol = 1e-6;
  SeedRange seeds{0, 50};
};
/// Passes when every matrix is full rank.
SuiteResult run_spectra(const SpectraOptions& o);

/// Rows for already computed matrices (e.g. trained layers).
CsvTable spectra_table();
void add_spectra_row(CsvTable& table, std::uint64_t seed, const std::string& name, const DenseMatrix& w,
                     double rank_tol = 1e-6);

}  // namespace hashnets
