// Benchmark CLI for the gradient-grouping optimizer and its baselines.
//
// Subcommands:
//   run     one experiment, trace CSV to --out
//   sweep   learning-rate grid for a baseline, summary CSV to --out
//   ablate  group-size grid for the grouping optimizer, summary CSV to --out
//   verify  randomized oracle checks, report to stdout
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gg/error.hpp"
#include "gg/harness.hpp"
#include "gg/verify.hpp"

namespace {

struct CliOptions {
  std::string objective = "synthetic";
  std::string dataset;
  std::string format = "csv";
  std::string optimizer = "gg";
  double lr = 0.01;
  std::size_t steps = 100;
  std::vector<std::uint64_t> seeds = {1};
  std::size_t n_points = 2;
  double alpha = 0.9;
  double epsilon = 1e-4;
  std::size_t gg_batch = 32;
  std::size_t baseline_batch = 64;
  std::string out;
  std::vector<double> lr_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<std::size_t> n_grid = {2, 4, 6, 8, 10};
  int threads = 1;
  bool timing = false;

  // quadratic objective
  std::size_t dim = 100;
  double rho = 1.0;
  // synthetic objective
  std::size_t samples = 5000;
  std::size_t features = 100;
  std::size_t classes = 10;
  std::uint64_t data_seed = 12345;
};

gg::ExperimentConfig to_experiment_config(const CliOptions& opt) {
  gg::ExperimentConfig config;

  if (opt.objective == "quadratic") {
    config.objective.kind = gg::ObjectiveSpec::Kind::kQuadratic;
    config.objective.dimension = opt.dim;
    config.objective.rho = opt.rho;
  } else if (opt.objective == "synthetic") {
    config.objective.kind = gg::ObjectiveSpec::Kind::kSynthetic;
    config.objective.num_samples = opt.samples;
    config.objective.num_features = opt.features;
    config.objective.num_classes = opt.classes;
    config.objective.data_seed = opt.data_seed;
  } else if (opt.objective == "dataset") {
    config.objective.kind = gg::ObjectiveSpec::Kind::kFile;
    config.objective.path = opt.dataset;
    if (opt.dataset.empty()) {
      throw gg::DimensionError("--dataset is required with --objective dataset");
    }
    if (opt.format == "csv") {
      config.objective.format = gg::DataFormat::kCsv;
    } else if (opt.format == "libsvm") {
      config.objective.format = gg::DataFormat::kLibsvm;
    } else {
      throw gg::DimensionError("--format must be csv or libsvm");
    }
  } else {
    throw gg::DimensionError("--objective must be quadratic, synthetic or dataset");
  }

  if (opt.optimizer == "gg") {
    gg::GGConfig gg_config;
    gg_config.n_points = opt.n_points;
    gg_config.alpha = opt.alpha;
    gg_config.epsilon = opt.epsilon;
    config.gg = gg_config;
  } else {
    gg::BaselineConfig baseline;
    baseline.method = gg::baseline_method_from_name(opt.optimizer);
    baseline.lr = opt.lr;
    config.baseline = baseline;
  }

  config.steps = opt.steps;
  config.gg_batch = opt.gg_batch;
  config.baseline_batch = opt.baseline_batch;
  config.lr_grid = opt.lr_grid;
  config.n_grid = opt.n_grid;
  config.seeds = opt.seeds;
  config.output_path = opt.out;
  config.num_threads = opt.threads;
  config.record_timing = opt.timing;
  return config;
}

// Applies "section.key" values from --config as defaults; CLI flags win.
void apply_config_file(const std::string& path, CliOptions& opt) {
  auto values = gg::load_config_file(path);
  auto get = [&](const std::string& key, auto parse, auto& target) {
    auto it = values.find(key);
    if (it != values.end()) target = parse(it->second);
  };
  auto as_string = [](const std::string& s) { return s; };
  auto as_double = [](const std::string& s) { return std::stod(s); };
  auto as_size = [](const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); };
  auto as_u64 = [](const std::string& s) { return std::stoull(s); };

  get("objective", as_string, opt.objective);
  get("dataset", as_string, opt.dataset);
  get("format", as_string, opt.format);
  get("optimizer", as_string, opt.optimizer);
  get("steps", as_size, opt.steps);
  get("out", as_string, opt.out);
  get("quadratic.dim", as_size, opt.dim);
  get("quadratic.rho", as_double, opt.rho);
  get("synthetic.samples", as_size, opt.samples);
  get("synthetic.features", as_size, opt.features);
  get("synthetic.classes", as_size, opt.classes);
  get("synthetic.data_seed", as_u64, opt.data_seed);
  get("gg.n_points", as_size, opt.n_points);
  get("gg.alpha", as_double, opt.alpha);
  get("gg.epsilon", as_double, opt.epsilon);
  get("gg.batch", as_size, opt.gg_batch);
  get("baseline.lr", as_double, opt.lr);
  get("baseline.batch", as_size, opt.baseline_batch);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-grouping optimizer benchmark"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file applied before flags");
    cmd->add_option("--objective", opt.objective, "quadratic | synthetic | dataset");
    cmd->add_option("--dataset", opt.dataset, "data file for --objective dataset");
    cmd->add_option("--format", opt.format, "csv | libsvm");
    cmd->add_option("--steps", opt.steps, "optimizer iterations");
    cmd->add_option("--seeds", opt.seeds, "list of run seeds")->expected(-1);
    cmd->add_option("--n-points", opt.n_points, "parameter vectors maintained by gg");
    cmd->add_option("--alpha", opt.alpha, "gg step-size contraction");
    cmd->add_option("--epsilon", opt.epsilon, "gg eigenvalue floor");
    cmd->add_option("--gg-batch", opt.gg_batch, "batch per gg column per step");
    cmd->add_option("--baseline-batch", opt.baseline_batch, "batch per baseline step");
    cmd->add_option("--out", opt.out, "output CSV path");
    cmd->add_option("--threads", opt.threads, "worker threads");
    cmd->add_option("--dim", opt.dim, "quadratic dimension");
    cmd->add_option("--rho", opt.rho, "quadratic condition number");
    cmd->add_option("--samples", opt.samples, "synthetic sample count");
    cmd->add_option("--features", opt.features, "synthetic feature count");
    cmd->add_option("--classes", opt.classes, "synthetic class count");
    cmd->add_option("--data-seed", opt.data_seed, "synthetic dataset seed");
    cmd->add_flag("--timing", opt.timing, "record wall-clock in trace rows");
  };

  CLI::App* run = app.add_subcommand("run", "single experiment, trace CSV");
  add_common(run);
  run->add_option("--optimizer", opt.optimizer, "gg | sgd | nesterov | adam | rmsprop | lbfgs");
  run->add_option("--lr", opt.lr, "baseline learning rate");

  CLI::App* sweep = app.add_subcommand("sweep", "baseline learning-rate grid");
  add_common(sweep);
  sweep->add_option("--optimizer", opt.optimizer, "baseline to sweep");
  sweep->add_option("--lr-grid", opt.lr_grid, "learning rates")->expected(-1);

  CLI::App* ablate = app.add_subcommand("ablate", "gg group-size grid");
  add_common(ablate);
  ablate->add_option("--n-grid", opt.n_grid, "group sizes")->expected(-1);

  CLI::App* verify = app.add_subcommand("verify", "randomized oracle checks");
  std::uint64_t verify_seed = 20240901;
  verify->add_option("--seed", verify_seed, "check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      apply_config_file(config_path, opt);
      // Re-parse so explicit flags override file values.
      app.clear();
      app.parse(argc, argv);
    }

    if (verify->parsed()) {
      auto reports = gg::run_all_checks(verify_seed);
      gg::print_reports(reports, std::cout);
      return gg::all_pass(reports) ? 0 : 2;
    }

    if (run->parsed()) {
      gg::ExperimentConfig config = to_experiment_config(opt);
      gg::RunTrace trace = gg::run_experiment(config);
      std::printf("steps=%zu avg_loss=%s diverged=%d", trace.num_steps(),
                  gg::format_double(trace.average_loss()).c_str(), trace.diverged ? 1 : 0);
      if (config.gg) {
        std::printf(" reported_column=%zu", trace.reported_column());
      }
      std::printf("\n");
      return 0;
    }

    if (sweep->parsed()) {
      if (opt.optimizer == "gg") {
        throw gg::DimensionError("sweep needs a baseline optimizer (gg has no learning rate)");
      }
      gg::ExperimentConfig config = to_experiment_config(opt);
      gg::SweepSummary summary = gg::lr_sweep(config);
      for (const auto& row : summary.rows) {
        if (row.seed == -1) {
          std::printf("%s lr=%s N=%zu avg_loss=%s +- %s\n", row.method.c_str(),
                      gg::format_double(row.lr).c_str(), row.n_points,
                      gg::format_double(row.avg_loss).c_str(),
                      gg::format_double(row.loss_std).c_str());
        }
      }
      return 0;
    }

    if (ablate->parsed()) {
      opt.optimizer = "gg";
      gg::ExperimentConfig config = to_experiment_config(opt);
      gg::AblationSummary summary = gg::ablate_n(config);
      for (const auto& row : summary.rows) {
        std::printf("gg N=%zu avg_loss=%s +- %s\n", row.n_points,
                    gg::format_double(row.avg_loss).c_str(),
                    gg::format_double(row.loss_std).c_str());
      }
      std::printf("improved_at_max_n=%d\n", summary.improved_at_max_n ? 1 : 0);
      return 0;
    }
  } catch (const gg::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
