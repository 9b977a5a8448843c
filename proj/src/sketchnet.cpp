#include "hashnets/sketchnet.hpp"

#include <cmath>

#include "hashnets/error.hpp"
#include "hashnets/parallel.hpp"

namespace hashnets {

double LayerActivation::scale(std::size_t width) const {
  return normalized ? 1.0 / std::sqrt(static_cast<double>(width)) : 1.0;
}

FeedForwardNet::FeedForwardNet(std::vector<DenseMatrix> weights, DenseVector output, LayerActivation activation,
                               double norm_bound, double input_radius)
    : weights_(std::move(weights)),
      output_(std::move(output)),
      activation_(activation),
      norm_bound_(norm_bound),
      input_radius_(input_radius) {
  require(!weights_.empty(), "net needs at least one hidden layer");
  require(norm_bound_ > 0.0 && input_radius_ > 0.0, "norm bound and input radius must be positive");
  const double limit = norm_bound_ * (1.0 + 1e-12);
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    const auto& w = weights_[j];
    require(all_finite(w.span()), "net weights must be finite");
    if (j > 0) require(w.rows() == weights_[j - 1].cols(), "layer " + std::to_string(j + 1) + " input width mismatch");
    for (std::size_t c = 0; c < w.cols(); ++c)
      require(norm2(w.col(c)) <= limit, "column " + std::to_string(c) + " of W_" + std::to_string(j + 1) + " exceeds the norm bound");
  }
  require(output_.size() == weights_.back().cols(), "output weights length mismatch");
  require(norm2(output_.span()) <= limit, "output weights exceed the norm bound");
}

FeedForwardNet FeedForwardNet::random(const std::vector<std::size_t>& widths, LayerActivation activation,
                                      double norm_bound, double input_radius, Rng& rng) {
  require(widths.size() >= 2, "need at least input and one hidden width");
  std::vector<DenseMatrix> weights;
  for (std::size_t j = 0; j + 1 < widths.size(); ++j) {
    DenseMatrix w = gaussian_matrix(widths[j], widths[j + 1], rng);
    for (std::size_t c = 0; c < w.cols(); ++c) {
      auto col = w.col(c);
      const double nrm = norm2(col);
      for (auto& v : col) v *= norm_bound / nrm;
    }
    weights.push_back(std::move(w));
  }
  DenseVector v = gaussian_vector(widths.back(), rng);
  const double nrm = norm2(v.span());
  for (auto& x : v) x *= norm_bound / nrm;
  return FeedForwardNet(std::move(weights), std::move(v), activation, norm_bound, input_radius);
}

std::vector<std::size_t> FeedForwardNet::widths() const {
  std::vector<std::size_t> out{weights_.front().rows()};
  for (const auto& w : weights_) out.push_back(w.cols());
  return out;
}

double FeedForwardNet::lipschitz_bound() const {
  double bound = norm2(output_.span());
  for (const auto& w : weights_) bound *= activation_.lipschitz() * activation_.scale(w.cols()) * singular_values(w)[0];
  return bound;
}

SketchStack SketchStack::identity(const FeedForwardNet& net, bool with_output) {
  SketchStack stack;
  const auto widths = net.widths();
  for (std::size_t j = 0; j < net.depth(); ++j) stack.layers.push_back(SketchMatrix::identity(widths[j]));
  if (with_output) stack.output = SketchMatrix::identity(widths.back());
  stack.target_eps.assign(net.depth() + (with_output ? 1 : 0), 0.0);
  return stack;
}

SketchStack SketchStack::uniform(const FeedForwardNet& net, SketchKind kind, std::size_t s, std::size_t t,
                                 bool with_output, Rng& rng) {
  auto make = [&](std::size_t n) {
    switch (kind) {
      case SketchKind::CountSketch: return SketchMatrix::count_sketch(s, n, rng);
      case SketchKind::SparseEmbedding: return SketchMatrix::sparse_embedding(s, n, std::min(t, s), rng);
      case SketchKind::Identity: return SketchMatrix::identity(n);
      default: throw InvalidInput("uniform stack cannot build custom sketches");
    }
  };
  SketchStack stack;
  const auto widths = net.widths();
  for (std::size_t j = 0; j < net.depth(); ++j) stack.layers.push_back(make(widths[j]));
  if (with_output) stack.output = make(widths.back());
  return stack;
}

namespace {

DenseVector layer_forward(const FeedForwardNet& net, std::size_t j, std::span<const double> input) {
  const DenseMatrix& w = net.weights()[j];
  DenseVector pre = matvec_t(w, input);
  const auto& act = net.activation();
  const double scale = act.scale(w.cols());
  for (auto& a : pre) a = act.base.value(a) * scale;
  return pre;
}

}  // namespace

ForwardResult forward_exact(const FeedForwardNet& net, std::span<const double> x) {
  require(x.size() == net.weights().front().rows(), "forward: input length mismatch");
  ForwardResult out;
  std::span<const double> cur = x;
  for (std::size_t j = 0; j < net.depth(); ++j) {
    out.hidden.push_back(layer_forward(net, j, cur));
    cur = out.hidden.back().span();
  }
  out.output = dot(net.output_weights().span(), cur);
  return out;
}

ForwardResult forward_sketched(const FeedForwardNet& net, const SketchStack& stack, std::span<const double> x) {
  require(x.size() == net.weights().front().rows(), "forward: input length mismatch");
  require(stack.layers.size() == net.depth(), "sketch stack depth does not match the net");
  const auto widths = net.widths();
  for (std::size_t j = 0; j < net.depth(); ++j)
    require(stack.layers[j].cols() == widths[j], "sketch S_" + std::to_string(j + 1) + " width mismatch");
  if (stack.output) require(stack.output->cols() == widths.back(), "output sketch width mismatch");

  ForwardResult out;
  DenseVector cur(std::vector<double>(x.begin(), x.end()));
  for (std::size_t j = 0; j < net.depth(); ++j) {
    const DenseVector projected = stack.layers[j].gram_apply(cur.span());
    out.hidden.push_back(layer_forward(net, j, projected.span()));
    cur = out.hidden.back();
  }
  if (stack.output) {
    const DenseVector sv = stack.output->apply(net.output_weights().span());
    const DenseVector sf = stack.output->apply(cur.span());
    out.output = dot(sv.span(), sf.span());
  } else {
    out.output = dot(net.output_weights().span(), cur.span());
  }
  return out;
}

DenseVector subspace_point(const SubspaceBasis& basis, std::span<const double> z) {
  require(z.size() == basis.dim(), "subspace coordinates length mismatch");
  return matvec(basis.matrix(), z);
}

DenseVector sample_subspace_point(const SubspaceBasis& basis, double radius, Rng& rng) {
  require(radius > 0.0, "radius must be positive");
  DenseVector z = gaussian_vector(basis.dim(), rng);
  const double nrm = norm2(z.span());
  const double r = radius * rng.uniform();
  for (auto& v : z) v *= r / nrm;
  return subspace_point(basis, z.span());
}

GapStats output_gap(const FeedForwardNet& net, const SketchStack& stack, const SubspaceBasis& basis, double radius,
                    std::size_t samples, Rng& rng) {
  require(basis.ambient_dim() == net.weights().front().rows(), "basis rows must equal the input width");
  require(samples >= 1, "need at least one sample");
  const Rng base(rng.next_u64());
  struct Acc {
    double max = 0.0;
    double sum = 0.0;
  };
  const Acc total = chunked_reduce(
      samples, 64,
      [&](std::size_t begin, std::size_t end) {
        Acc a;
        for (std::size_t i = begin; i < end; ++i) {
          Rng local = base.derive(i);
          const DenseVector x = sample_subspace_point(basis, radius, local);
          const double gap = std::abs(forward_exact(net, x.span()).output - forward_sketched(net, stack, x.span()).output);
          a.max = std::max(a.max, gap);
          a.sum += gap;
        }
        return a;
      },
      [](Acc a, Acc b) { return Acc{std::max(a.max, b.max), a.sum + b.sum}; });
  return {total.max, total.sum / static_cast<double>(samples)};
}

double gap_bound(std::size_t q, double lipschitz, double norm_bound, double radius, std::span<const double> eps) {
  require(q >= 1, "depth must be >= 1");
  require(eps.size() == q + 1 || eps.size() == q, "need q or q+1 distortion values");
  double sum = 0.0;
  for (double e : eps) sum += e;
  const double qd = static_cast<double>(q);
  if (q == 2) return 2.0 * sum * lipschitz * lipschitz * std::pow(norm_bound, 3) * radius;
  return 4.0 * sum * std::pow(lipschitz, qd) * std::pow(norm_bound, qd + 1.0) * std::pow(radius, qd);
}

std::vector<double> split_distortion_targets(double eps_total, std::size_t count) {
  require(count >= 1, "need at least one sketch");
  require(eps_total > 0.0, "total distortion must be positive");
  return std::vector<double>(count, eps_total / static_cast<double>(count));
}

}  // namespace hashnets
