#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hashnets/dataset.hpp"
#include "hashnets/hashednet.hpp"
#include "hashnets/linalg.hpp"
#include "hashnets/rng.hpp"

namespace hashnets {

enum class Variant { Full, Hashed, Small, Thin };
std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct ArchitectureSpec {
  Variant variant = Variant::Full;
  std::size_t n_in = 0;
  std::vector<std::size_t> hidden;
  std::size_t n_out = 0;
  double ratio = 1.0;
  /// One entry per weight layer; 0 means dense.
  std::vector<std::size_t> buckets;

  std::size_t weight_layers() const { return hidden.size() + 1; }
  std::size_t layer_input(std::size_t l) const { return l == 0 ? n_in : hidden[l - 1]; }
  std::size_t layer_output(std::size_t l) const { return l == hidden.size() ? n_out : hidden[l]; }
  /// Trainable weights (biases excluded): B for hashed layers, in*out otherwise.
  std::size_t effective_parameters() const;
};

/// Size-matched architectures for a one-hidden-layer net n_in -> k -> n_out
/// compressed by `ratio`:
///   full   : hidden {k}
///   hashed : hidden {k}, buckets ceil(n_in k / r) and ceil(k n_out / r)
///            (output layer dense when hash_output is false)
///   small  : hidden {ceil(k / r)}
///   thin   : hidden {ceil(n_in k / ((n_in + k) r)), k}
/// Throws InvalidConfig when ratio < 1 or a size comes out 0.
ArchitectureSpec size_match(Variant variant, std::size_t n_in, std::size_t k, double ratio, std::size_t n_out,
                            bool hash_output = true);

struct ClassifierLayer {
  std::size_t in = 0, out = 0;
  /// Present for hashed layers; Ŵ(i, j) = params[index(i, j)] with i < out, j < in.
  std::optional<HashIndex> index;
  /// Hashed: bucket values. Dense: out x in column-major.
  DenseVector params;
  DenseVector bias;

  DenseMatrix weights() const;  // out x in
};

/// ReLU MLP with softmax output.
struct Classifier {
  std::vector<ClassifierLayer> layers;

  /// Glorot-uniform init in +-sqrt(6 / (in + out)) (bucket values for hashed
  /// layers), zero biases. Dense weights are drawn in row-major (i n + j)
  /// order, so with `injective_hash` a hashed net starts identical to the
  /// dense one.
  static Classifier init(const ArchitectureSpec& arch, Rng& rng, bool injective_hash = false);
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch = 50;
  double learning_rate = 0.05;
  /// lr / sqrt(epoch) with epochs counted from 1.
  bool lr_decay = true;
  double momentum = 0.9;
  double keep = 0.9;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean minibatch loss (with dropout)
  double train_error = 0.0;
  double test_error = 0.0;
};

struct ExperimentReport {
  ArchitectureSpec arch;
  TrainConfig config;
  std::vector<EpochStats> epochs;
  std::vector<double> batch_losses;
  double final_test_error = 0.0;
  double wall_seconds = 0.0;
};

struct Evaluation {
  double loss = 0.0;   // mean cross-entropy
  double error = 0.0;  // misclassified fraction
};
Evaluation evaluate(const Classifier& net, const Dataset& data);

/// Gradient of the mean cross-entropy over all of `data`, no dropout.
struct ClassifierGradient {
  std::vector<DenseVector> params;
  std::vector<DenseVector> bias;
  double loss = 0.0;
};
ClassifierGradient full_batch_gradient(const Classifier& net, const Dataset& data);

/// Minibatch SGD with classical momentum and inverted dropout on hidden
/// activations. `test` may be empty. Throws NumericalError on a non-finite loss.
ExperimentReport train_network(Classifier& net, const Dataset& train, const Dataset& test, const TrainConfig& config);

struct TrainedClassifier {
  Classifier net;
  ExperimentReport report;
};
TrainedClassifier train_classifier(const Dataset& train, const Dataset& test, const ArchitectureSpec& arch,
                                   const TrainConfig& config);

}  // namespace hashnets
