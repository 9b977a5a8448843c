#include "hashnets/classifier.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <numeric>

#include "hashnets/error.hpp"

namespace hashnets {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Hashed: return "hashed";
    case Variant::Small: return "small";
    case Variant::Thin: return "thin";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "hashed") return Variant::Hashed;
  if (name == "small") return Variant::Small;
  if (name == "thin") return Variant::Thin;
  throw InvalidConfig("unknown variant '" + name + "'");
}

std::size_t ArchitectureSpec::effective_parameters() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weight_layers(); ++l) {
    const std::size_t b = l < buckets.size() ? buckets[l] : 0;
    total += b > 0 ? b : layer_input(l) * layer_output(l);
  }
  return total;
}

namespace {

std::size_t ceil_div(double num, double den) { return static_cast<std::size_t>(std::ceil(num / den - 1e-12)); }

}  // namespace

ArchitectureSpec size_match(Variant variant, std::size_t n_in, std::size_t k, double ratio, std::size_t n_out,
                            bool hash_output) {
  require<InvalidConfig>(ratio >= 1.0, "compression ratio must be >= 1");
  require<InvalidConfig>(n_in >= 1 && k >= 1 && n_out >= 1, "layer sizes must be >= 1");
  ArchitectureSpec a;
  a.variant = variant;
  a.n_in = n_in;
  a.n_out = n_out;
  a.ratio = ratio;
  const double n = static_cast<double>(n_in), kk = static_cast<double>(k), o = static_cast<double>(n_out);
  switch (variant) {
    case Variant::Full: a.hidden = {k}; break;
    case Variant::Hashed:
      a.hidden = {k};
      a.buckets = {ceil_div(n * kk, ratio), hash_output ? ceil_div(kk * o, ratio) : 0};
      break;
    case Variant::Small: a.hidden = {ceil_div(kk, ratio)}; break;
    case Variant::Thin: a.hidden = {ceil_div(n * kk, (n + kk) * ratio), k}; break;
  }
  for (auto h : a.hidden) require<InvalidConfig>(h >= 1, "size_match produced an empty hidden layer");
  return a;
}

DenseMatrix ClassifierLayer::weights() const {
  if (index) return expand_virtual(*index, params.span());
  DenseMatrix w(out, in);
  std::copy(params.begin(), params.end(), w.span().begin());
  return w;
}

Classifier Classifier::init(const ArchitectureSpec& arch, Rng& rng, bool injective_hash) {
  require<InvalidConfig>(arch.n_in >= 1 && arch.n_out >= 1, "architecture needs n_in, n_out >= 1");
  Classifier net;
  for (std::size_t l = 0; l < arch.weight_layers(); ++l) {
    ClassifierLayer layer;
    layer.in = arch.layer_input(l);
    layer.out = arch.layer_output(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    const std::size_t b = l < arch.buckets.size() ? arch.buckets[l] : 0;
    Rng layer_rng = rng.derive(l);
    if (b > 0) {
      if (injective_hash) {
        require<InvalidConfig>(b == layer.in * layer.out, "injective hash needs B = in * out");
        layer.index = HashIndex::injective(layer.in, layer.out);
      } else {
        Rng hash_rng = layer_rng.derive(1);
        layer.index = HashIndex::random(layer.in, layer.out, b, hash_rng);
      }
      layer.params = DenseVector(b);
      for (auto& v : layer.params) v = bound * (2.0 * layer_rng.uniform() - 1.0);
    } else {
      layer.params = DenseVector(layer.in * layer.out);
      for (std::size_t i = 0; i < layer.out; ++i)
        for (std::size_t j = 0; j < layer.in; ++j) layer.params[j * layer.out + i] = bound * (2.0 * layer_rng.uniform() - 1.0);
    }
    layer.bias = DenseVector(layer.out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat expand(const ClassifierLayer& layer) {
  Mat w(layer.out, layer.in);
  if (layer.index) {
    const auto& idx = *layer.index;
    for (std::size_t j = 0; j < layer.in; ++j)
      for (std::size_t i = 0; i < layer.out; ++i) w(i, j) = layer.params[idx(i, j)];
  } else {
    w = Eigen::Map<const Mat>(layer.params.data(), layer.out, layer.in);
  }
  return w;
}

struct Pass {
  double loss = 0.0;  // summed over the batch
  std::size_t wrong = 0;
  std::vector<Mat> gw;
  std::vector<Vec> gb;
};

// Forward (and optionally backward) pass over the columns of x. Gradients
// are of the batch-mean loss.
Pass run_batch(const std::vector<Mat>& w, const std::vector<Vec>& b, const Mat& x, const std::uint32_t* labels,
               double keep, Rng* dropout, bool backward) {
  const std::size_t layers = w.size();
  const auto bs = x.cols();
  std::vector<Mat> act(layers);  // inputs of each layer
  std::vector<Mat> deriv(layers);
  act[0] = x;
  Mat z;
  for (std::size_t l = 0; l < layers; ++l) {
    z = w[l] * act[l];
    z.colwise() += b[l];
    if (l + 1 == layers) break;
    Mat d = (z.array() > 0.0).cast<double>();
    if (dropout && keep < 1.0) {
      for (Eigen::Index c = 0; c < d.cols(); ++c)
        for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, c) *= dropout->uniform() < keep ? 1.0 / keep : 0.0;
    }
    act[l + 1] = z.cwiseProduct(d);  // relu(z) with the dropout scale folded in
    deriv[l + 1] = std::move(d);
  }

  Pass out;
  Mat& p = z;
  for (Eigen::Index c = 0; c < bs; ++c) {
    auto col = p.col(c);
    Eigen::Index arg = 0;
    const double top = col.maxCoeff(&arg);
    const double label_logit = col(labels[c]);
    col = (col.array() - top).exp();
    const double total = col.sum();
    out.loss += std::log(total) + top - label_logit;
    out.wrong += static_cast<std::uint32_t>(arg) != labels[c] ? 1 : 0;
    col /= total;
  }
  if (!backward) return out;

  for (Eigen::Index c = 0; c < bs; ++c) p(labels[c], c) -= 1.0;
  Mat delta = p / static_cast<double>(bs);
  out.gw.resize(layers);
  out.gb.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    out.gw[l].noalias() = delta * act[l].transpose();
    out.gb[l] = delta.rowwise().sum();
    if (l > 0) {
      Mat back = w[l].transpose() * delta;
      delta = back.cwiseProduct(deriv[l]);
    }
  }
  return out;
}

Mat gather(const Dataset& data, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
           std::vector<std::uint32_t>& labels) {
  Mat x(data.features(), static_cast<Eigen::Index>(end - begin));
  labels.resize(end - begin);
  for (std::size_t c = begin; c < end; ++c) {
    const auto col = data.x.col(order[c]);
    std::copy(col.begin(), col.end(), x.col(static_cast<Eigen::Index>(c - begin)).data());
    labels[c - begin] = data.labels[order[c]];
  }
  return x;
}

void check_data(const Classifier& net, const Dataset& data) {
  require<InvalidConfig>(!net.layers.empty(), "classifier has no layers");
  if (data.size() == 0) return;
  require<InvalidConfig>(data.features() == net.layers.front().in, "dataset feature count does not match the input layer");
  for (auto l : data.labels) require<InvalidConfig>(l < net.layers.back().out, "label exceeds the class count");
}

std::vector<Mat> expand_all(const Classifier& net) {
  std::vector<Mat> w;
  for (const auto& l : net.layers) w.push_back(expand(l));
  return w;
}

std::vector<Vec> biases(const Classifier& net) {
  std::vector<Vec> b;
  for (const auto& l : net.layers) b.push_back(Eigen::Map<const Vec>(l.bias.data(), static_cast<Eigen::Index>(l.out)));
  return b;
}

// Folds a dense out x in gradient into the layer's parameter layout.
DenseVector to_param_gradient(const ClassifierLayer& layer, const Mat& gw) {
  if (!layer.index) return DenseVector(std::vector<double>(gw.data(), gw.data() + gw.size()));
  DenseVector g(layer.params.size());
  const auto& idx = *layer.index;
  for (std::size_t j = 0; j < layer.in; ++j)
    for (std::size_t i = 0; i < layer.out; ++i) g[idx(i, j)] += gw(i, j);
  return g;
}

}  // namespace

Evaluation evaluate(const Classifier& net, const Dataset& data) {
  check_data(net, data);
  if (data.size() == 0) return {};
  const auto w = expand_all(net);
  const auto b = biases(net);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint32_t> labels;
  double loss = 0.0;
  std::size_t wrong = 0;
  constexpr std::size_t kEvalBatch = 1000;
  for (std::size_t begin = 0; begin < data.size(); begin += kEvalBatch) {
    const std::size_t end = std::min(data.size(), begin + kEvalBatch);
    const Mat x = gather(data, order, begin, end, labels);
    const Pass p = run_batch(w, b, x, labels.data(), 1.0, nullptr, false);
    loss += p.loss;
    wrong += p.wrong;
  }
  const double m = static_cast<double>(data.size());
  return {loss / m, static_cast<double>(wrong) / m};
}

ClassifierGradient full_batch_gradient(const Classifier& net, const Dataset& data) {
  check_data(net, data);
  require<InvalidConfig>(data.size() >= 1, "gradient needs at least one sample");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint32_t> labels;
  const Mat x = gather(data, order, 0, data.size(), labels);
  const Pass p = run_batch(expand_all(net), biases(net), x, labels.data(), 1.0, nullptr, true);
  ClassifierGradient g;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    g.params.push_back(to_param_gradient(net.layers[l], p.gw[l]));
    g.bias.push_back(DenseVector(std::vector<double>(p.gb[l].data(), p.gb[l].data() + p.gb[l].size())));
  }
  g.loss = p.loss / static_cast<double>(data.size());
  return g;
}

ExperimentReport train_network(Classifier& net, const Dataset& train, const Dataset& test, const TrainConfig& config) {
  require<InvalidConfig>(config.keep > 0.0 && config.keep <= 1.0, "keep probability must lie in (0, 1]");
  require<InvalidConfig>(config.batch >= 1, "batch size must be >= 1");
  require<InvalidConfig>(config.learning_rate >= 0.0 && config.momentum >= 0.0, "learning rate and momentum must be >= 0");
  require<InvalidConfig>(train.size() >= 1, "training set is empty");
  check_data(net, train);
  check_data(net, test);

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  const Rng base(config.seed, 1);

  std::vector<DenseVector> vel_w, vel_b;
  for (const auto& l : net.layers) {
    vel_w.emplace_back(l.params.size());
    vel_b.emplace_back(l.bias.size());
  }
  std::vector<std::size_t> order(train.size());
  std::vector<std::uint32_t> labels;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle) {
      Rng shuffle_rng = base.derive(2 * epoch);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    Rng dropout_rng = base.derive(2 * epoch + 1);
    const double lr = config.lr_decay ? config.learning_rate / std::sqrt(static_cast<double>(epoch)) : config.learning_rate;
    double loss_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t begin = 0; begin < train.size(); begin += config.batch) {
      const std::size_t end = std::min(train.size(), begin + config.batch);
      const Mat x = gather(train, order, begin, end, labels);
      const Pass p = run_batch(expand_all(net), biases(net), x, labels.data(), config.keep, &dropout_rng, true);
      const double batch_loss = p.loss / static_cast<double>(end - begin);
      if (!std::isfinite(batch_loss))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches));
      report.batch_losses.push_back(batch_loss);
      loss_sum += batch_loss;
      ++batches;

      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        const DenseVector g = to_param_gradient(layer, p.gw[l]);
        for (std::size_t q = 0; q < g.size(); ++q) {
          vel_w[l][q] = config.momentum * vel_w[l][q] - lr * g[q];
          layer.params[q] += vel_w[l][q];
        }
        for (std::size_t q = 0; q < layer.bias.size(); ++q) {
          vel_b[l][q] = config.momentum * vel_b[l][q] - lr * p.gb[l](static_cast<Eigen::Index>(q));
          layer.bias[q] += vel_b[l][q];
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    stats.train_error = evaluate(net, train).error;
    stats.test_error = test.size() ? evaluate(net, test).error : 0.0;
    report.epochs.push_back(stats);
  }
  report.final_test_error = report.epochs.empty() ? (test.size() ? evaluate(net, test).error : 0.0)
                                                  : report.epochs.back().test_error;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainedClassifier train_classifier(const Dataset& train, const Dataset& test, const ArchitectureSpec& arch,
                                   const TrainConfig& config) {
  Rng init_rng(config.seed, 0);
  TrainedClassifier out{Classifier::init(arch, init_rng), {}};
  out.report = train_network(out.net, train, test, config);
  out.report.arch = arch;
  return out;
}

}  // namespace hashnets
