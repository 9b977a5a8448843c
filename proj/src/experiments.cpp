#include "hashnets/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "hashnets/error.hpp"
#include "hashnets/hashednet.hpp"
#include "hashnets/hashing.hpp"
#include "hashnets/parallel.hpp"
#include "hashnets/sketchnet.hpp"
#include "hashnets/spectra.hpp"

namespace hashnets {

namespace {

// Stream ids keep the suites' random draws apart for equal seed values.
enum Stream : std::uint64_t { kBuckets = 1, kSketch, kGap, kHessian, kRecover, kSpectra };

std::size_t required_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
}

std::string fraction_summary(std::size_t passed, std::size_t total) {
  return std::to_string(passed) + "/" + std::to_string(total) + " seeds pass";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

void check_seeds(const SeedRange& s) { require<InvalidConfig>(s.count >= 1, "need at least one seed"); }

}  // namespace

SuiteResult run_bucket_check(const BucketCheckOptions& o) {
  check_seeds(o.seeds);
  const std::size_t degree = o.degree == 0 ? default_hash_degree(o.domain) : o.degree;
  struct Row {
    std::uint64_t min_load = 0, max_load = 0;
    bool pass = false;
  };
  const auto rows = parallel_map(o.seeds.count, [&](std::size_t i) {
    Rng rng(o.seeds.first_seed + i, kBuckets);
    const KWiseHash h(degree, o.domain, o.buckets, rng);
    const BucketLoads loads = bucket_loads(h);
    return Row{loads.min_load(), loads.max_load(), concentration_check(loads).pass};
  });
  SuiteResult r{CsvTable({"seed", "min_load", "max_load", "pass"}), false, {}};
  std::size_t passed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.table.add_row({format_number(o.seeds.first_seed + i), format_number(rows[i].min_load),
                     format_number(rows[i].max_load), format_bool(rows[i].pass)});
    passed += rows[i].pass ? 1 : 0;
  }
  r.pass = passed >= required_count(o.required_fraction, rows.size());
  r.summary = fraction_summary(passed, rows.size());
  return r;
}

SuiteResult run_sketch_check(const SketchCheckOptions& o) {
  check_seeds(o.seeds);
  require<InvalidConfig>(o.kind == SketchKind::CountSketch || o.kind == SketchKind::SparseEmbedding,
                         "sketch-check supports count-sketch and sparse-embedding");
  require<InvalidConfig>(o.d >= 1 && o.d <= o.n, "need 1 <= d <= n");
  const std::size_t s = o.rows ? o.rows : suggest_sketch_rows(o.kind, o.d, o.eps, o.delta, o.row_constant);
  const std::size_t pairs = (o.vectors + 1) / 2;
  const auto dist = parallel_map(o.seeds.count, [&](std::size_t i) {
    Rng rng(o.seeds.first_seed + i, kSketch);
    const SubspaceBasis basis = SubspaceBasis::random(o.n, o.d, rng);
    const SketchMatrix sk = o.kind == SketchKind::CountSketch ? SketchMatrix::count_sketch(s, o.n, rng)
                                                               : SketchMatrix::sparse_embedding(s, o.n, std::min(o.sparsity, s), rng);
    return distortion(sk, basis, pairs, rng);
  });
  SuiteResult r{CsvTable({"seed", "rows", "norm_distortion", "inner_distortion", "pass"}), false, {}};
  std::size_t passed = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const bool ok = dist[i].norm <= o.eps;
    passed += ok ? 1 : 0;
    r.table.add_row({format_number(o.seeds.first_seed + i), format_number(s), format_number(dist[i].norm),
                     format_number(dist[i].inner), format_bool(ok)});
  }
  r.pass = passed >= required_count(o.required_fraction, dist.size());
  r.summary = fraction_summary(passed, dist.size()) + " at s=" + std::to_string(s);
  return r;
}

SuiteResult run_gap_curve(const GapCurveOptions& o) {
  check_seeds(o.seeds);
  require<InvalidConfig>(o.depth >= 1, "depth must be >= 1");
  require<InvalidConfig>(!o.sizes.empty(), "need at least one sketch size");
  std::vector<std::size_t> widths{o.input_dim};
  for (std::size_t j = 0; j < o.depth; ++j) widths.push_back(o.hidden_width);
  const std::size_t ns = o.sizes.size();

  // per seed: identity gap followed by one GapStats per size
  const auto gaps = parallel_map(o.seeds.count, [&](std::size_t i) {
    const std::uint64_t seed = o.seeds.first_seed + i;
    Rng rng(seed, kGap);
    const FeedForwardNet net =
        FeedForwardNet::random(widths, LayerActivation{o.activation, true}, o.norm_bound, o.radius, rng);
    const SubspaceBasis basis = SubspaceBasis::random(o.input_dim, o.subspace_dim, rng);
    const std::uint64_t point_seed = rng.next_u64();
    std::vector<GapStats> out;
    {
      Rng points(point_seed);
      out.push_back(output_gap(net, SketchStack::identity(net, o.output_sketch), basis, o.radius, o.samples, points));
    }
    for (std::size_t si = 0; si < ns; ++si) {
      Rng sketch_rng = rng.derive(si);
      const SketchStack stack = SketchStack::uniform(net, o.kind, o.sizes[si], o.sparsity, o.output_sketch, sketch_rng);
      // the same input points for every s
      Rng points(point_seed);
      out.push_back(output_gap(net, stack, basis, o.radius, o.samples, points));
    }
    return out;
  });

  SuiteResult r{CsvTable({"seed", "s", "max_gap", "mean_gap"}), true, {}};
  bool identity_zero = true;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const auto seed = format_number(o.seeds.first_seed + i);
    r.table.add_row({seed, "0", format_number(gaps[i][0].max), format_number(gaps[i][0].mean)});
    identity_zero = identity_zero && gaps[i][0].max == 0.0;
    for (std::size_t si = 0; si < ns; ++si)
      r.table.add_row({seed, format_number(o.sizes[si]), format_number(gaps[i][si + 1].max),
                       format_number(gaps[i][si + 1].mean)});
  }
  std::vector<double> medians;
  for (std::size_t si = 0; si < ns; ++si) {
    std::vector<double> col;
    for (const auto& g : gaps) col.push_back(g[si + 1].max);
    medians.push_back(median(col));
  }
  bool monotone = true;
  for (std::size_t si = 1; si < ns; ++si) monotone = monotone && medians[si] <= medians[si - 1];
  r.pass = identity_zero && monotone;
  r.summary = "median max gap by s:";
  for (std::size_t si = 0; si < ns; ++si) r.summary += " " + std::to_string(o.sizes[si]) + "=" + format_number(medians[si]);
  r.summary += monotone ? " (non-increasing)" : " (NOT monotone)";
  r.summary += identity_zero ? ", identity gap 0" : ", identity gap nonzero";
  return r;
}

SuiteResult run_hessian_check(const HessianCheckOptions& o) {
  check_seeds(o.seeds);
  struct Row {
    double error = 0.0, lambda_min = 0.0, lambda_max = 0.0;
  };
  const auto rows = parallel_map(o.seeds.count, [&](std::size_t i) {
    Rng rng(o.seeds.first_seed + i, kHessian);
    TeacherOptions to;
    to.n = o.n;
    to.k = o.k;
    to.buckets = o.buckets;
    to.activation = o.activation;
    const TeacherSpec teacher = make_teacher(to, rng);
    const SampleSet samples = sample_dataset(teacher, o.samples, rng);
    Row row;
    row.error = hessian_reduction_check(teacher, samples, o.vectors, rng);
    const DenseVector eig = sym_eig(risk_hessian(teacher.w_star.span(), samples, teacher.problem));
    row.lambda_max = eig[0];
    row.lambda_min = eig[eig.size() - 1];
    return row;
  });
  SuiteResult r{CsvTable({"seed", "buckets", "samples", "reduction_error", "lambda_min", "lambda_max", "pass"}), false, {}};
  std::size_t passed = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool ok = rows[i].error <= o.tolerance && rows[i].lambda_min > 0.0;
    passed += ok ? 1 : 0;
    worst = std::max(worst, rows[i].error);
    r.table.add_row({format_number(o.seeds.first_seed + i), format_number(o.buckets), format_number(o.samples),
                     format_number(rows[i].error), format_number(rows[i].lambda_min), format_number(rows[i].lambda_max),
                     format_bool(ok)});
  }
  r.pass = passed == rows.size();
  r.summary = fraction_summary(passed, rows.size()) + ", worst reduction error " + format_number(worst);
  return r;
}

RecoverResult run_recover(const RecoverOptions& o) {
  check_seeds(o.seeds);
  struct Run {
    RecoveryTrace trace;
    double w_norm_sq = 0.0;
  };
  const auto runs = parallel_map(o.seeds.count, [&](std::size_t i) {
    Rng rng(o.seeds.first_seed + i, kRecover);
    TeacherOptions to;
    to.n = o.n;
    to.k = o.k;
    to.buckets = o.buckets;
    to.activation = o.activation;
    if (o.sign_output_weights) to.output_weights = TeacherOptions::OutputWeights::Signs;
    const TeacherSpec teacher = make_teacher(to, rng);
    const SampleSet samples = sample_dataset(teacher, o.samples, rng);
    const DenseVector w0 = perturbed_init(teacher.w_star.span(), o.fraction, rng);
    return Run{gd_recover(teacher, samples, w0.span(), o.steps, o.step_size), squared_norm(teacher.w_star.span())};
  });

  RecoverResult out{{CsvTable({"seed", "step", "sq_error", "relative_error", "ratio"}), false, {}}, {}};
  std::size_t passed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& tr = runs[i].trace;
    const std::uint64_t seed = o.seeds.first_seed + i;
    const auto seed_str = format_number(seed);
    for (std::size_t t = 0; t < tr.sq_error.size(); ++t)
      out.suite.table.add_row({seed_str, format_number(t), format_number(tr.sq_error[t]),
                               format_number(std::sqrt(tr.sq_error[t] / runs[i].w_norm_sq)),
                               t == 0 ? std::string() : format_number(tr.ratios[t - 1])});
    RecoverSeed s;
    s.seed = seed;
    s.final_relative_error = std::sqrt(tr.sq_error.back() / runs[i].w_norm_sq);
    s.non_increasing_fraction = tr.non_increasing_fraction();
    s.m0 = tr.m0;
    s.big_m0 = tr.big_m0;
    s.step_size = tr.step_size;
    s.diverged = tr.diverged;
    s.pass = !tr.diverged && s.final_relative_error <= o.target && s.non_increasing_fraction >= o.monotone_fraction;
    passed += s.pass ? 1 : 0;
    out.seeds.push_back(s);
  }
  out.suite.pass = passed == runs.size();
  out.suite.summary = fraction_summary(passed, runs.size()) + " reach relative error " + format_number(o.target) +
                      " within " + std::to_string(o.steps) + " steps";
  return out;
}

CompressTrainResult run_compress_train(const CompressTrainOptions& o) {
  require<InvalidConfig>(!o.variants.empty(), "need at least one variant");
  Dataset train = load_idx(o.train_images, o.train_labels);
  Dataset test = load_idx(o.test_images, o.test_labels);
  if (o.train_limit) train = take(train, o.train_limit);
  if (o.test_limit) test = take(test, o.test_limit);
  require<InvalidConfig>(train.size() >= 1, "training set is empty");
  const std::size_t classes = std::max(train.classes, test.classes);

  CompressTrainResult out{{CsvTable({"variant", "params", "epoch", "train_loss", "train_error", "test_error"}), false, {}}, {}};
  for (Variant v : o.variants) {
    const ArchitectureSpec arch = size_match(v, train.features(), o.hidden, o.ratio, classes, o.hash_output);
    out.runs.push_back(train_classifier(train, test, arch, o.config));
    const auto& rep = out.runs.back().report;
    for (const auto& e : rep.epochs)
      out.suite.table.add_row({to_string(v), format_number(arch.effective_parameters()), format_number(e.epoch),
                               format_number(e.train_loss), format_number(e.train_error), format_number(e.test_error)});
  }
  const auto hashed = std::find(o.variants.begin(), o.variants.end(), Variant::Hashed);
  bool pass = hashed != o.variants.end();
  std::string summary;
  for (std::size_t i = 0; i < o.variants.size(); ++i) {
    summary += (i ? ", " : "") + to_string(o.variants[i]) + " test error " + format_number(out.runs[i].report.final_test_error);
    if (pass && o.variants[i] != Variant::Hashed)
      pass = out.runs[hashed - o.variants.begin()].report.final_test_error < out.runs[i].report.final_test_error;
  }
  out.suite.pass = pass;
  out.suite.summary = summary;
  return out;
}

CsvTable spectra_table() {
  return CsvTable({"seed", "matrix", "rows", "cols", "sigma_min", "sigma_max", "condition", "stable_rank", "full_rank"});
}

namespace {

void add_report_row(CsvTable& table, std::uint64_t seed, const std::string& name, const DenseMatrix& w,
                    const SpectralReport& rep) {
  table.add_row({format_number(seed), name, format_number(w.rows()), format_number(w.cols()), format_number(rep.sigma_min),
                 format_number(rep.sigma_max), format_number(rep.condition), format_number(rep.stable_rank),
                 format_bool(rep.full_rank)});
}

}  // namespace

void add_spectra_row(CsvTable& table, std::uint64_t seed, const std::string& name, const DenseMatrix& w, double rank_tol) {
  add_report_row(table, seed, name, w, spectral_report(w, rank_tol));
}

SuiteResult run_spectra(const SpectraOptions& o) {
  check_seeds(o.seeds);
  const auto built = parallel_map(o.seeds.count, [&](std::size_t i) {
    Rng rng(o.seeds.first_seed + i, kSpectra);
    if (o.source == SpectraOptions::Source::Gaussian) return NamedMatrix{o.seeds.first_seed + i, "gaussian", gaussian_matrix(o.k, o.n, rng)};
    TeacherOptions to;
    to.n = o.n;
    to.k = o.k;
    to.buckets = o.buckets;
    const TeacherSpec t = make_teacher(to, rng);
    return NamedMatrix{o.seeds.first_seed + i, "teacher", expand_virtual(t.problem.index, t.w_star.span())};
  });
  const auto rows = spectra_batch(built, o.rank_tol);
  SuiteResult r{spectra_table(), true, {}};
  std::size_t full = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    add_report_row(r.table, rows[i].seed, rows[i].matrix, built[i].w, rows[i].report);
    full += rows[i].report.full_rank ? 1 : 0;
  }
  r.pass = full == rows.size();
  r.summary = std::to_string(full) + "/" + std::to_string(rows.size()) + " matrices full rank";
  return r;
}

}  // namespace hashnets
