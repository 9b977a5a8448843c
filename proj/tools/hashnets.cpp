// Command-line front end: one subcommand per verification suite.
// Exit codes: 0 pass, 2 property failure, 1 usage or IO error.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

#include "hashnets/error.hpp"
#include "hashnets/experiments.hpp"

#ifndef HASHNETS_DATA_DIR
#define HASHNETS_DATA_DIR "data"
#endif

using namespace hashnets;

namespace {

struct Common {
  std::string out = "-";
  std::uint64_t seed = 0;
  std::size_t seeds = 0;  // 0 keeps the subcommand's default
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "CSV destination ('-' for stdout)");
  cmd->add_option("--seed", c.seed, "first seed");
  cmd->add_option("--seeds", c.seeds, "number of seeds")->check(CLI::PositiveNumber);
}

SeedRange seed_range(const Common& c, std::size_t fallback) { return {c.seed, c.seeds ? c.seeds : fallback}; }

int finish(const SuiteResult& r, const Common& c, std::chrono::steady_clock::time_point start) {
  r.table.save(c.out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << (r.pass ? "PASS" : "FAIL") << ": " << r.summary << " [" << format_number(secs) << " s]\n";
  return r.pass ? 0 : 2;
}

const std::map<std::string, SketchKind> kSketchKinds{{"count-sketch", SketchKind::CountSketch},
                                                     {"sparse-embedding", SketchKind::SparseEmbedding}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketching and hashed-network verification suites"};
  app.require_subcommand(1);
  app.footer("Environment: HASHNETS_THREADS caps the worker count.\nExit codes: 0 pass, 2 property failure, 1 usage or IO error.");
  std::function<int()> run;

  // bucket-check
  BucketCheckOptions bucket;
  Common bucket_c;
  auto* b = app.add_subcommand("bucket-check", "Bucket-load concentration of a k-wise hash");
  b->footer("CSV: seed,min_load,max_load,pass. Passes when >= 95% of seeds keep every load in [0.9, 1.1] N/B.");
  b->add_option("--n", bucket.domain, "domain size N")->check(CLI::PositiveNumber);
  b->add_option("--b", bucket.buckets, "bucket count B")->check(CLI::PositiveNumber);
  b->add_option("--t", bucket.degree, "independence degree t (0 = ceil(log2 N))");
  add_common(b, bucket_c);
  b->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      bucket.seeds = seed_range(bucket_c, 20);
      return finish(run_bucket_check(bucket), bucket_c, start);
    };
  });

  // sketch-check
  SketchCheckOptions sketch;
  Common sketch_c;
  auto* s = app.add_subcommand("sketch-check", "Subspace-embedding distortion of a sketch");
  s->footer("CSV: seed,rows,norm_distortion,inner_distortion,pass. Passes when >= 90% of seeds have norm distortion <= eps.");
  s->add_option("--kind", sketch.kind, "count-sketch | sparse-embedding")->transform(CLI::CheckedTransformer(kSketchKinds));
  s->add_option("--d", sketch.d, "subspace dimension")->check(CLI::PositiveNumber);
  s->add_option("--n", sketch.n, "ambient dimension")->check(CLI::PositiveNumber);
  s->add_option("--eps", sketch.eps, "distortion target")->check(CLI::Range(0.0, 1.0));
  s->add_option("--delta", sketch.delta, "failure probability")->check(CLI::Range(0.0, 1.0));
  s->add_option("--rows", sketch.rows, "sketch rows (0 = suggested)");
  s->add_option("--row-constant", sketch.row_constant, "constant in the suggested row count")->check(CLI::PositiveNumber);
  s->add_option("--sparsity", sketch.sparsity, "nonzeros per column for sparse-embedding")->check(CLI::PositiveNumber);
  s->add_option("--vectors", sketch.vectors, "sampled subspace vectors per seed")->check(CLI::PositiveNumber);
  add_common(s, sketch_c);
  s->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      sketch.seeds = seed_range(sketch_c, 20);
      return finish(run_sketch_check(sketch), sketch_c, start);
    };
  });

  // gap-curve
  GapCurveOptions gap;
  Common gap_c;
  std::string gap_act = "relu";
  auto* g = app.add_subcommand("gap-curve", "Output gap of a sketched feed-forward net against sketch size");
  g->footer("CSV: seed,s,max_gap,mean_gap (s = 0 rows use identity sketches). Passes when the median max_gap is\n"
            "non-increasing in s and every identity gap is exactly 0.");
  g->add_option("--n", gap.input_dim, "input width n1")->check(CLI::PositiveNumber);
  g->add_option("--width", gap.hidden_width, "hidden width")->check(CLI::PositiveNumber);
  g->add_option("--q", gap.depth, "hidden layers")->check(CLI::PositiveNumber);
  g->add_option("--d", gap.subspace_dim, "input subspace dimension")->check(CLI::PositiveNumber);
  g->add_option("--sizes", gap.sizes, "sketch row counts")->delimiter(',');
  g->add_option("--kind", gap.kind, "count-sketch | sparse-embedding")->transform(CLI::CheckedTransformer(kSketchKinds));
  g->add_option("--sparsity", gap.sparsity, "nonzeros per column for sparse-embedding")->check(CLI::PositiveNumber);
  g->add_option("--samples", gap.samples, "input points per (seed, s)")->check(CLI::PositiveNumber);
  g->add_option("--radius", gap.radius, "input radius A")->check(CLI::PositiveNumber);
  g->add_option("--norm-bound", gap.norm_bound, "column norm bound")->check(CLI::PositiveNumber);
  g->add_option("--activation", gap_act, "relu | leaky-relu[:slope] | linear | tanh");
  g->add_flag("!--no-output-sketch", gap.output_sketch, "do not sketch the output layer");
  add_common(g, gap_c);
  g->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      gap.activation = parse_activation(gap_act);
      gap.seeds = seed_range(gap_c, 10);
      return finish(run_gap_curve(gap), gap_c, start);
    };
  });

  // hessian-check
  HessianCheckOptions hess;
  Common hess_c;
  std::string hess_act = "relu";
  auto* h = app.add_subcommand("hessian-check", "Lifting reduction and positivity of the hashed-net Hessian at w*");
  h->footer("CSV: seed,buckets,samples,reduction_error,lambda_min,lambda_max,pass. A seed passes when the\n"
            "reduction error is within --tol and lambda_min > 0; the suite passes when every seed does.");
  h->add_option("--n", hess.n, "input dimension")->check(CLI::PositiveNumber);
  h->add_option("--k", hess.k, "hidden units")->check(CLI::PositiveNumber);
  h->add_option("--b", hess.buckets, "buckets")->check(CLI::PositiveNumber);
  h->add_option("--m", hess.samples, "samples")->check(CLI::PositiveNumber);
  h->add_option("--vectors", hess.vectors, "random test vectors")->check(CLI::PositiveNumber);
  h->add_option("--tol", hess.tolerance, "relative tolerance of the reduction identity");
  h->add_option("--activation", hess_act, "relu | leaky-relu[:slope] | linear");
  add_common(h, hess_c);
  h->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      hess.activation = parse_activation(hess_act);
      hess.seeds = seed_range(hess_c, 20);
      return finish(run_hessian_check(hess), hess_c, start);
    };
  });

  // recover
  RecoverOptions rec;
  Common rec_c;
  std::string rec_act = "relu";
  auto* r = app.add_subcommand("recover", "Gradient-descent recovery of a planted hashed net");
  r->footer("CSV: seed,step,sq_error,relative_error,ratio. A seed passes when ||w_T - w*|| <= target ||w*|| and the\n"
            "error is non-increasing in >= 95% of steps; the suite passes when every seed does.");
  r->add_option("--n", rec.n, "input dimension")->check(CLI::PositiveNumber);
  r->add_option("--k", rec.k, "hidden units")->check(CLI::PositiveNumber);
  r->add_option("--b", rec.buckets, "buckets")->check(CLI::PositiveNumber);
  r->add_option("--m", rec.samples, "samples")->check(CLI::PositiveNumber);
  r->add_option("--fraction", rec.fraction, "initial perturbation ||w0 - w*|| / ||w*||")->check(CLI::NonNegativeNumber);
  r->add_option("--steps", rec.steps, "gradient steps")->check(CLI::PositiveNumber);
  r->add_option("--step-size", rec.step_size, "step size (0 = 1/M0)")->check(CLI::NonNegativeNumber);
  r->add_option("--target", rec.target, "relative error target")->check(CLI::PositiveNumber);
  r->add_option("--activation", rec_act, "relu | leaky-relu[:slope] | linear");
  r->add_flag("--sign-output", rec.sign_output_weights, "draw v* as random signs instead of ones");
  add_common(r, rec_c);
  r->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      rec.activation = parse_activation(rec_act);
      rec.seeds = seed_range(rec_c, 10);
      return finish(run_recover(rec).suite, rec_c, start);
    };
  });

  // compress-train
  CompressTrainOptions ct;
  Common ct_c;
  std::string data_dir = HASHNETS_DATA_DIR;
  std::vector<std::string> variant_names{"hashed", "small", "thin"};
  bool hash_first_only = false;
  auto* c = app.add_subcommand("compress-train", "Train size-matched hashed, small and thin classifiers");
  c->footer("CSV: variant,params,epoch,train_loss,train_error,test_error. Passes when the hashed net's final test\n"
            "error is below every other variant's. Wall time goes to stderr.");
  c->add_option("--data-dir", data_dir, "directory with {train,test}-{images-idx3,labels-idx1}-ubyte[.gz]");
  c->add_option("--train-images", ct.train_images, "override the training image file");
  c->add_option("--train-labels", ct.train_labels, "override the training label file");
  c->add_option("--test-images", ct.test_images, "override the test image file");
  c->add_option("--test-labels", ct.test_labels, "override the test label file");
  c->add_option("--train-limit", ct.train_limit, "use only the first N training samples (0 = all)");
  c->add_option("--test-limit", ct.test_limit, "use only the first N test samples (0 = all)");
  c->add_option("--k", ct.hidden, "hidden units of the uncompressed net")->check(CLI::PositiveNumber);
  c->add_option("--ratio", ct.ratio, "compression ratio")->check(CLI::Range(1.0, 1e12));
  c->add_option("--variants", variant_names, "variants to train (hashed, small, thin, full)")->delimiter(',');
  c->add_flag("--hash-first-only", hash_first_only, "keep the output layer of the hashed net dense");
  c->add_option("--epochs", ct.config.epochs, "epochs");
  c->add_option("--batch", ct.config.batch, "minibatch size")->check(CLI::PositiveNumber);
  c->add_option("--lr", ct.config.learning_rate, "learning rate")->check(CLI::NonNegativeNumber);
  c->add_flag("!--no-lr-decay", ct.config.lr_decay, "disable the lr / sqrt(epoch) schedule");
  c->add_option("--momentum", ct.config.momentum, "momentum coefficient")->check(CLI::NonNegativeNumber);
  c->add_option("--keep", ct.config.keep, "dropout keep probability")->check(CLI::Range(1e-9, 1.0));
  c->add_option("--out", ct_c.out, "CSV destination ('-' for stdout)");
  c->add_option("--seed", ct.config.seed, "training seed");
  c->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      auto pick = [&](std::string& path, const std::string& name) {
        if (!path.empty()) return;
        const std::string base = data_dir + "/" + name;
        path = std::ifstream(base + ".gz") ? base + ".gz" : base;
      };
      pick(ct.train_images, "train-images-idx3-ubyte");
      pick(ct.train_labels, "train-labels-idx1-ubyte");
      pick(ct.test_images, "test-images-idx3-ubyte");
      pick(ct.test_labels, "test-labels-idx1-ubyte");
      ct.hash_output = !hash_first_only;
      ct.variants.clear();
      for (const auto& v : variant_names) ct.variants.push_back(parse_variant(v));
      const auto res = run_compress_train(ct);
      for (const auto& run : res.runs)
        std::cerr << to_string(run.report.arch.variant) << ": " << format_number(run.report.wall_seconds) << " s\n";
      return finish(res.suite, ct_c, start);
    };
  });

  // spectra
  SpectraOptions sp;
  Common sp_c;
  std::string source = "teacher";
  auto* p = app.add_subcommand("spectra", "Singular-value diagnostics of teacher or random weight matrices");
  p->footer("CSV: seed,matrix,rows,cols,sigma_min,sigma_max,condition,stable_rank,full_rank. Passes when every\n"
            "matrix is full rank (sigma_min > tol * sigma_max).");
  p->add_option("--source", source, "teacher | gaussian")->check(CLI::IsMember({"teacher", "gaussian"}));
  p->add_option("--n", sp.n, "columns")->check(CLI::PositiveNumber);
  p->add_option("--k", sp.k, "rows")->check(CLI::PositiveNumber);
  p->add_option("--b", sp.buckets, "buckets (teacher source)")->check(CLI::PositiveNumber);
  p->add_option("--tol", sp.rank_tol, "full-rank tolerance relative to sigma_max")->check(CLI::NonNegativeNumber);
  add_common(p, sp_c);
  p->callback([&] {
    run = [&] {
      const auto start = std::chrono::steady_clock::now();
      sp.source = source == "gaussian" ? SpectraOptions::Source::Gaussian : SpectraOptions::Source::Teacher;
      sp.seeds = seed_range(sp_c, 50);
      return finish(run_spectra(sp), sp_c, start);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
