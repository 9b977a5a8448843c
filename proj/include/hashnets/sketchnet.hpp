#pragma once

#include <optional>
#include <vector>

#include "hashnets/activation.hpp"
#include "hashnets/linalg.hpp"
#include "hashnets/sketch.hpp"

namespace hashnets {

/// Layer activation: phi(a) = psi(a) / sqrt(width) when `normalized`,
/// where psi is L-Lipschitz and width is the layer's output width.
struct LayerActivation {
  Activation base = Activation::relu();
  bool normalized = true;

  double scale(std::size_t width) const;
  double lipschitz() const { return base.lipschitz(); }
};

/// Feed-forward net x -> <v, f^(q)(x)> with f^(j) = phi_j(W_j^T f^(j-1)).
/// W_j is stored n_j x n_{j+1}, so its columns are the hidden-unit weight
/// vectors; every column and v must have norm at most `norm_bound`.
class FeedForwardNet {
 public:
  FeedForwardNet(std::vector<DenseMatrix> weights, DenseVector output, LayerActivation activation, double norm_bound,
                 double input_radius);

  /// Gaussian directions scaled to norm exactly `norm_bound` per column and for v.
  static FeedForwardNet random(const std::vector<std::size_t>& widths, LayerActivation activation, double norm_bound,
                               double input_radius, Rng& rng);

  std::size_t depth() const { return weights_.size(); }
  /// n_1, ..., n_{q+1}
  std::vector<std::size_t> widths() const;
  const std::vector<DenseMatrix>& weights() const { return weights_; }
  const DenseVector& output_weights() const { return output_; }
  const LayerActivation& activation() const { return activation_; }
  double norm_bound() const { return norm_bound_; }
  double input_radius() const { return input_radius_; }

  /// prod_j (L scale_j ||W_j||_2) * ||v||_2: a Lipschitz constant of x -> output.
  double lipschitz_bound() const;

 private:
  std::vector<DenseMatrix> weights_;
  DenseVector output_;
  LayerActivation activation_;
  double norm_bound_;
  double input_radius_;
};

/// S_1 .. S_q on the layer inputs plus an optional S_{q+1} on the output layer.
struct SketchStack {
  std::vector<SketchMatrix> layers;
  std::optional<SketchMatrix> output;
  std::vector<double> target_eps;

  static SketchStack identity(const FeedForwardNet& net, bool with_output = true);
  /// One sketch kind and row count s for every layer (including the output).
  static SketchStack uniform(const FeedForwardNet& net, SketchKind kind, std::size_t s, std::size_t t, bool with_output,
                             Rng& rng);
};

struct ForwardResult {
  double output = 0.0;
  std::vector<DenseVector> hidden;  // f^(1) .. f^(q)
};

ForwardResult forward_exact(const FeedForwardNet& net, std::span<const double> x);
ForwardResult forward_sketched(const FeedForwardNet& net, const SketchStack& stack, std::span<const double> x);

/// x = U z.
DenseVector subspace_point(const SubspaceBasis& basis, std::span<const double> z);
/// Random x in colspan(U) with uniform direction and ||x|| uniform on [0, radius].
DenseVector sample_subspace_point(const SubspaceBasis& basis, double radius, Rng& rng);

struct GapStats {
  double max = 0.0;
  double mean = 0.0;
};

/// Monte Carlo estimate of sup |exact - sketched| over colspan(U) within radius.
GapStats output_gap(const FeedForwardNet& net, const SketchStack& stack, const SubspaceBasis& basis, double radius,
                    std::size_t samples, Rng& rng);

/// Analytic bound on the output gap given per-sketch distortions:
/// q = 2: 2 (sum eps) L^2 B^3 A; otherwise 4 (sum eps) L^q B^(q+1) A^q.
/// The two constants disagree at q = 2 and are kept as stated.
double gap_bound(std::size_t q, double lipschitz, double norm_bound, double radius, std::span<const double> eps);

/// Equal split eps / count of a total gap budget.
std::vector<double> split_distortion_targets(double eps_total, std::size_t count);

}  // namespace hashnets
