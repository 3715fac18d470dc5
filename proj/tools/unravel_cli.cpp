// Command-line front end: mixture generators, overlap analysis, clustering,
// classification replay, moment diagnostics, experiment suites, and the 2-d
// circle-projection demo.  Exit codes: 0 success, 2 configuration/input
// errors, 1 numeric failures during computation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unravel/clusterer.hpp"
#include "unravel/evaluation.hpp"
#include "unravel/fisher.hpp"
#include "unravel/io.hpp"
#include "unravel/isotropy.hpp"
#include "unravel/linalg.hpp"
#include "unravel/mixture.hpp"
#include "unravel/reweighting.hpp"
#include "unravel/rng.hpp"

namespace {

using namespace unravel;

void check_writable(const std::string& path) {
  if (path.empty()) return;
  const bool existed = std::filesystem::exists(path);
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw IoError("cannot open " + path + " for writing");
  probe.close();
  if (!existed) std::filesystem::remove(path);
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::string preset = "pancakes";
  std::string out;
  std::string samples_out;
  int k = 3;
  int n = 10;
  double d = 1.0;
  double sigma_thin = 0.05;
  double w1 = 0.5;
  double target_overlap = 0.01;
  long long samples = 0;
  std::uint64_t seed = 17;
  bool no_labels = false;
};

int run_generate(const GenerateOptions& opt) {
  if (!opt.samples_out.empty() && opt.samples < 1)
    throw std::invalid_argument("--samples must be positive when --samples-out is given");

  GaussianMixture mix;
  if (opt.preset == "pancakes") {
    mix = parallel_pancakes(opt.n, opt.d, opt.sigma_thin, opt.w1);
  } else if (opt.preset == "random") {
    mix = random_separable_mixture(opt.k, opt.n, opt.target_overlap, opt.seed);
  } else if (opt.preset == "balanced") {
    mix = balanced_symmetric_mixture(opt.k, opt.n, opt.target_overlap, opt.seed);
  } else {
    throw std::invalid_argument("unknown preset '" + opt.preset + "'");
  }

  if (!opt.out.empty()) {
    write_mixture(opt.out, mix);
    std::cout << "wrote mixture (k=" << mix.k << ", n=" << mix.n << ") to " << opt.out << "\n";
  }
  if (!opt.samples_out.empty()) {
    const LabeledSample drawn = sample(mix, static_cast<Eigen::Index>(opt.samples), opt.seed);
    write_points_csv(opt.samples_out, drawn.points, opt.no_labels ? nullptr : &drawn.labels);
    std::cout << "wrote " << opt.samples << " samples to " << opt.samples_out << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- analyze

int run_analyze(const std::string& mix_path, const std::string& out) {
  const GaussianMixture mix = read_mixture(mix_path);
  const OverlapReport report = fisher_subspace(isotropize(mix));
  std::cout << "components " << mix.k << ", dimension " << mix.n << "\n";
  std::cout << "overlap phi = " << format_double(report.phi) << "\n";
  std::cout << "isotropic sigma-bar spectrum (descending):";
  for (Eigen::Index i = 0; i < report.sigma_bar_eigenvalues.size(); ++i)
    std::cout << ' ' << format_double(report.sigma_bar_eigenvalues[i]);
  std::cout << "\n";
  if (!out.empty()) {
    write_overlap_report(out, report);
    std::cout << "wrote overlap report to " << out << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- cluster

struct ClusterOptions {
  std::string points_path;
  std::string out;
  std::string report_out;
  UnravelConfig cfg;
};

int run_cluster(const ClusterOptions& opt) {
  const PointsFile file = read_points_csv(opt.points_path);
  opt.cfg.validate(static_cast<int>(file.points.cols()), file.points.rows());
  if (!opt.report_out.empty() && !file.labels)
    throw std::invalid_argument("--report requires a label column in the points CSV");

  const PolyhedralPartition partition = unravel::unravel(file.points, opt.cfg);
  for (const std::string& warning : partition.warnings)
    std::cerr << "warning: " << warning << "\n";
  std::cout << "partition has " << partition.leaves << " leaves ("
            << partition.internal_nodes(SeparatorMethod::MeanShift) << " mean-shift, "
            << partition.internal_nodes(SeparatorMethod::Spectral) << " spectral cuts)\n";
  if (!opt.out.empty()) {
    write_partition(opt.out, partition);
    std::cout << "wrote partition to " << opt.out << "\n";
  }

  if (file.labels) {
    LabeledSample labeled{file.points, *file.labels};
    const ErrorReport report = labeled_error(partition, labeled, opt.cfg.k);
    std::cout << "clustering error vs labels = " << format_double(report.error) << "\n";
    if (!opt.report_out.empty()) {
      write_error_report(opt.report_out, report);
      std::cout << "wrote error report to " << opt.report_out << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- classify

int run_classify(const std::string& partition_path, const std::string& points_path,
                 const std::string& out) {
  const PolyhedralPartition partition = read_partition(partition_path);
  const PointsFile file = read_points_csv(points_path);
  if (static_cast<int>(file.points.cols()) != partition.n)
    throw std::invalid_argument("points have dimension " + std::to_string(file.points.cols()) +
                                " but partition expects " + std::to_string(partition.n));
  const std::vector<int> leaves = partition.classify_rows(file.points);
  std::ofstream stream(out);
  if (!stream) throw IoError("cannot open " + out + " for writing");
  stream << "label\n";
  for (const int leaf : leaves) stream << leaf << "\n";
  std::cout << "classified " << leaves.size() << " points into " << partition.leaves
            << " leaves; wrote " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- moments

int run_moments(const std::string& mix_path, double alpha, long long m, std::uint64_t seed) {
  const GaussianMixture mix = read_mixture(mix_path);
  if (alpha <= 0.0) alpha = mix.n / mix.min_weight();

  const ReweightedMoments exact = exact_mixture_moments(mix, alpha);
  const LabeledSample drawn = sample(mix, static_cast<Eigen::Index>(m), seed);
  const ReweightedMoments sampled = sample_reweighted_moments(drawn.points, alpha);

  std::printf("alpha = %.6g, m = %lld\n", alpha, m);
  std::printf("%4s  %22s  %22s  %12s\n", "i", "u_exact", "u_sampled", "abs diff");
  for (int i = 0; i < mix.n; ++i)
    std::printf("%4d  %22.15g  %22.15g  %12.3g\n", i, exact.u[i], sampled.u[i],
                std::abs(exact.u[i] - sampled.u[i]));
  std::printf("||u_exact|| = %.15g   ||u_sampled|| = %.15g\n", exact.u.norm(), sampled.u.norm());

  const Eigen::MatrixXd diff = exact.M - sampled.M;
  std::printf("||M_exact - M_sampled||_F = %.6g  (relative %.6g)\n", diff.norm(),
              diff.norm() / exact.M.norm());
  const SymEig eig_exact = sym_eig(exact.M);
  const SymEig eig_sampled = sym_eig(sampled.M);
  std::printf("%4s  %22s  %22s\n", "j", "lambda_exact", "lambda_sampled");
  for (int j = 0; j < mix.n; ++j)
    std::printf("%4d  %22.15g  %22.15g\n", j, eig_exact.values[mix.n - 1 - j],
                eig_sampled.values[mix.n - 1 - j]);
  return 0;
}

// -------------------------------------------------------------- experiment

struct ExperimentOptions {
  std::string suite = "invariance";
  std::string out;
  std::string mix_path;
  int trials = 20;
  int k = 2;
  int n = 10;
  double d = 1.0;
  double sigma_thin = 0.05;
  double w1 = 0.5;
  double condition = 1000.0;
  double stretch = 30.0;
  double alpha = 0.0;
  double alpha_coeff = 1.0;
  double wmin = 0.0;
  long long m_sample = 100000;
  long long m_eval = 100000;
  std::uint64_t seed = 7;
  int max_depth = 0;
};

UnravelConfig unravel_config_for(const ExperimentOptions& opt) {
  UnravelConfig cfg;
  cfg.k = opt.k;
  cfg.wmin = opt.wmin;
  cfg.alpha = opt.alpha;
  cfg.alpha_coeff = opt.alpha_coeff;
  cfg.seed = opt.seed;
  cfg.max_depth = opt.max_depth;
  return cfg;
}

GaussianMixture experiment_mixture(const ExperimentOptions& opt) {
  if (!opt.mix_path.empty()) return read_mixture(opt.mix_path);
  return parallel_pancakes(opt.n, opt.d, opt.sigma_thin, opt.w1);
}

int run_experiment(const ExperimentOptions& opt) {
  ExperimentConfig cfg;
  cfg.unravel = unravel_config_for(opt);
  cfg.m_sample = static_cast<Eigen::Index>(opt.m_sample);
  cfg.m_eval = static_cast<Eigen::Index>(opt.m_eval);

  std::vector<TrialRow> rows;
  if (opt.suite == "invariance") {
    const GaussianMixture mix = experiment_mixture(opt);
    Rng rng(derive_seed(opt.seed, 42));
    const AffineMap map = random_affine(mix.n, opt.condition, rng);
    const InvarianceResult result = affine_invariance_experiment(mix, map, cfg, opt.trials);
    rows = result.rows;
    std::printf("mean error original    = %.6g\n", result.mean_error_original);
    std::printf("mean error transformed = %.6g\n", result.mean_error_transformed);
    std::printf("difference             = %.6g\n",
                std::abs(result.mean_error_original - result.mean_error_transformed));
  } else if (opt.suite == "pancakes" || opt.suite == "baseline") {
    GaussianMixture mix = experiment_mixture(opt);
    if (opt.suite == "baseline" && opt.mix_path.empty()) {
      // stretch a nuisance coordinate so the raw top principal direction is
      // uninformative about the separation
      AffineMap stretch_map = AffineMap::identity(mix.n);
      stretch_map.linear(mix.n - 1, mix.n - 1) = opt.stretch;
      mix = apply_affine(mix, stretch_map);
    }
    double sum_unravel = 0.0, sum_baseline = 0.0;
    for (int trial = 0; trial < opt.trials; ++trial) {
      const LabeledSample train =
          sample(mix, cfg.m_sample, derive_seed(opt.seed, 1000 + trial));
      const std::uint64_t eval_seed = derive_seed(opt.seed, 5000 + trial);
      UnravelConfig ucfg = cfg.unravel;
      ucfg.seed = derive_seed(opt.seed, 9000 + trial);

      const PolyhedralPartition part = unravel::unravel(train.points, ucfg);
      const ErrorReport err = partition_error(part, mix, cfg.m_eval, eval_seed);
      sum_unravel += err.error;
      rows.push_back({trial, "unravel", err.error, part.leaves,
                      part.internal_nodes(SeparatorMethod::MeanShift),
                      part.internal_nodes(SeparatorMethod::Spectral)});

      if (opt.suite == "baseline") {
        const PolyhedralPartition base = baseline_pca_cluster(train.points, opt.k);
        const ErrorReport base_err = partition_error(base, mix, cfg.m_eval, eval_seed);
        sum_baseline += base_err.error;
        rows.push_back({trial, "baseline", base_err.error, base.leaves, 0,
                        base.internal_nodes(SeparatorMethod::Spectral)});
      }
    }
    std::printf("mean error unravel  = %.6g\n", sum_unravel / opt.trials);
    if (opt.suite == "baseline")
      std::printf("mean error baseline = %.6g\n", sum_baseline / opt.trials);
  } else {
    throw std::invalid_argument("unknown suite '" + opt.suite +
                                "' (expected invariance, pancakes, or baseline)");
  }

  if (!opt.out.empty()) {
    write_trial_csv(opt.out, rows);
    std::cout << "wrote " << rows.size() << " trial rows to " << opt.out << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ demo2d

int run_demo2d(long long m, std::uint64_t seed, const std::string& out,
               const std::string& axes_out) {
  if (m < 2) throw std::invalid_argument("--m must be at least 2");
  Rng rng(seed);
  const Eigen::MatrixXd rotation = random_orthogonal(2, rng);
  const double half_height = std::sqrt(3.0);

  // uniform draw from {-1,1} x [-sqrt(3), sqrt(3)] (isotropic), then rotate
  Eigen::MatrixXd raw(m, 2), circle(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Vector2d p(rng.below(2) == 0 ? -1.0 : 1.0,
                      rng.uniform(-half_height, half_height));
    const Eigen::Vector2d rotated = rotation * p;
    raw.row(i) = rotated.transpose();
    circle.row(i) = rotated.transpose() / rotated.norm();
  }

  const MomentEstimate moments = estimate_moments(circle);
  const SymEig eig = sym_eig(moments.covariance);
  const Eigen::Vector2d axis_major = eig.vectors.col(1), axis_minor = eig.vectors.col(0);
  const Eigen::Vector2d true_x = rotation.col(0), true_y = rotation.col(1);

  std::printf("circle-projection covariance eigenvalues: %.6g (major), %.6g (minor)\n",
              eig.values[1], eig.values[0]);
  std::printf("|major . true_x| = %.6g   |minor . true_y| = %.6g\n",
              std::abs(axis_major.dot(true_x)), std::abs(axis_minor.dot(true_y)));

  std::ofstream stream(out);
  if (!stream) throw IoError("cannot open " + out + " for writing");
  stream << "x0,x1,cx0,cx1\n";
  for (Eigen::Index i = 0; i < m; ++i)
    stream << format_double(raw(i, 0)) << ',' << format_double(raw(i, 1)) << ','
           << format_double(circle(i, 0)) << ',' << format_double(circle(i, 1)) << '\n';
  std::cout << "wrote " << m << " demo rows to " << out << "\n";

  if (!axes_out.empty()) {
    std::ofstream axes(axes_out);
    if (!axes) throw IoError("cannot open " + axes_out + " for writing");
    axes << "{\n  \"rotation\": [[" << format_double(rotation(0, 0)) << ", "
         << format_double(rotation(0, 1)) << "], [" << format_double(rotation(1, 0)) << ", "
         << format_double(rotation(1, 1)) << "]],\n"
         << "  \"major\": [" << format_double(axis_major[0]) << ", "
         << format_double(axis_major[1]) << "],\n  \"minor\": [" << format_double(axis_minor[0])
         << ", " << format_double(axis_minor[1]) << "],\n  \"eigenvalues\": ["
         << format_double(eig.values[1]) << ", " << format_double(eig.values[0]) << "]\n}\n";
    std::cout << "wrote axes to " << axes_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine-invariant Gaussian mixture clustering via isotropic PCA"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Create a mixture (and optional samples)");
  generate->add_option("--preset", gen.preset, "pancakes | random | balanced")
      ->check(CLI::IsMember({"pancakes", "random", "balanced"}));
  generate->add_option("--out", gen.out, "mixture JSON output path");
  generate->add_option("--samples-out", gen.samples_out, "sample CSV output path");
  generate->add_option("--k", gen.k, "components (random/balanced)")->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "dimension")->check(CLI::PositiveNumber);
  generate->add_option("--d", gen.d, "pancake half-separation")->check(CLI::PositiveNumber);
  generate->add_option("--sigma-thin", gen.sigma_thin, "pancake thin standard deviation")
      ->check(CLI::PositiveNumber);
  generate->add_option("--w1", gen.w1, "pancake first-component weight");
  generate->add_option("--target-overlap", gen.target_overlap, "overlap for random/balanced")
      ->check(CLI::PositiveNumber);
  generate->add_option("--samples", gen.samples, "number of samples to draw")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_flag("--no-labels", gen.no_labels, "omit the label column from the sample CSV");

  std::string analyze_mix, analyze_out;
  CLI::App* analyze = app.add_subcommand("analyze", "Overlap and Fisher subspace of a mixture");
  analyze->add_option("--mix", analyze_mix, "mixture JSON")->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_out, "overlap report JSON output path");

  ClusterOptions cl;
  CLI::App* cluster = app.add_subcommand("cluster", "Partition points by recursive isotropic PCA");
  cluster->add_option("--points", cl.points_path, "points CSV")->required()
      ->check(CLI::ExistingFile);
  cluster->add_option("--k", cl.cfg.k, "number of components")->required()
      ->check(CLI::PositiveNumber);
  cluster->add_option("--out", cl.out, "partition JSON output path");
  cluster->add_option("--report", cl.report_out, "error report JSON (needs labeled points)");
  cluster->add_option("--wmin", cl.cfg.wmin, "minimum component weight (default 1/k)");
  cluster->add_option("--alpha", cl.cfg.alpha, "reweighting scale override (default n/wmin)");
  cluster->add_option("--alpha-coeff", cl.cfg.alpha_coeff, "scale on the default n/wmin alpha")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--m1", cl.cfg.m1, "isotropy sample count per node");
  cluster->add_option("--m2", cl.cfg.m2, "moment sample count per node");
  cluster->add_option("--seed", cl.cfg.seed, "random seed");
  cluster->add_option("--max-depth", cl.cfg.max_depth, "recursion depth cap (default 2k)");
  cluster->add_option("--eps-floor", cl.cfg.eps_floor_rel, "relative eigenvalue floor");

  std::string classify_partition, classify_points, classify_out = "labels.csv";
  CLI::App* classify = app.add_subcommand("classify", "Assign points to partition leaves");
  classify->add_option("--partition", classify_partition, "partition JSON")->required()
      ->check(CLI::ExistingFile);
  classify->add_option("--points", classify_points, "points CSV")->required()
      ->check(CLI::ExistingFile);
  classify->add_option("--out", classify_out, "labels CSV output path");

  std::string moments_mix;
  double moments_alpha = 0.0;
  long long moments_m = 100000;
  std::uint64_t moments_seed = 17;
  CLI::App* moments = app.add_subcommand("moments", "Exact vs sampled reweighted moments");
  moments->add_option("--mix", moments_mix, "mixture JSON")->required()
      ->check(CLI::ExistingFile);
  moments->add_option("--alpha", moments_alpha, "reweighting scale (default n/wmin)");
  moments->add_option("--m", moments_m, "sample count")->check(CLI::Range(1000LL, 100000000LL));
  moments->add_option("--seed", moments_seed, "random seed");

  ExperimentOptions ex;
  CLI::App* experiment = app.add_subcommand("experiment", "Run a trial suite to CSV");
  experiment->add_option("--suite", ex.suite, "invariance | pancakes | baseline")
      ->check(CLI::IsMember({"invariance", "pancakes", "baseline"}));
  experiment->add_option("--out", ex.out, "trial CSV output path");
  experiment->add_option("--mix", ex.mix_path, "mixture JSON (default: pancake preset)")
      ->check(CLI::ExistingFile);
  experiment->add_option("--trials", ex.trials, "trials per arm")->check(CLI::PositiveNumber);
  experiment->add_option("--k", ex.k, "number of components")->check(CLI::PositiveNumber);
  experiment->add_option("--n", ex.n, "dimension")->check(CLI::PositiveNumber);
  experiment->add_option("--d", ex.d, "pancake half-separation")->check(CLI::PositiveNumber);
  experiment->add_option("--sigma-thin", ex.sigma_thin, "pancake thin standard deviation")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--w1", ex.w1, "pancake first-component weight");
  experiment->add_option("--condition", ex.condition, "condition number of the random map")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--stretch", ex.stretch, "nuisance-coordinate stretch (baseline suite)")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--alpha", ex.alpha, "reweighting scale override");
  experiment->add_option("--alpha-coeff", ex.alpha_coeff, "scale on the default n/wmin alpha")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--wmin", ex.wmin, "minimum component weight (default 1/k)");
  experiment->add_option("--m-sample", ex.m_sample, "training samples per trial")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--m-eval", ex.m_eval, "evaluation samples per trial")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--seed", ex.seed, "random seed");
  experiment->add_option("--max-depth", ex.max_depth, "recursion depth cap (default 2k)");

  long long demo_m = 2000;
  std::uint64_t demo_seed = 1;
  std::string demo_out = "demo2d.csv", demo_axes;
  CLI::App* demo = app.add_subcommand("demo2d", "Rotated box projected to the unit circle");
  demo->add_option("--m", demo_m, "number of points")->check(CLI::PositiveNumber);
  demo->add_option("--seed", demo_seed, "random seed");
  demo->add_option("--out", demo_out, "demo CSV output path");
  demo->add_option("--axes-out", demo_axes, "recovered axes JSON output path");

  try {
    app.parse(argc, argv);

    if (generate->parsed()) {
      check_writable(gen.out);
      check_writable(gen.samples_out);
      if (gen.out.empty() && gen.samples_out.empty())
        throw std::invalid_argument("generate: nothing to do (need --out or --samples-out)");
      return run_generate(gen);
    }
    if (analyze->parsed()) {
      check_writable(analyze_out);
      return run_analyze(analyze_mix, analyze_out);
    }
    if (cluster->parsed()) {
      check_writable(cl.out);
      check_writable(cl.report_out);
      return run_cluster(cl);
    }
    if (classify->parsed()) {
      check_writable(classify_out);
      return run_classify(classify_partition, classify_points, classify_out);
    }
    if (moments->parsed()) return run_moments(moments_mix, moments_alpha, moments_m, moments_seed);
    if (experiment->parsed()) {
      check_writable(ex.out);
      return run_experiment(ex);
    }
    if (demo->parsed()) {
      check_writable(demo_out);
      check_writable(demo_axes);
      return run_demo2d(demo_m, demo_seed, demo_out, demo_axes);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const unravel::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  }
}
