// Acceptance suite: every release criterion as one pass/fail line.
// Exits 0 only if all criteria hold.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "gg/baselines.hpp"
#include "gg/executor.hpp"
#include "gg/gg.hpp"
#include "gg/harness.hpp"
#include "gg/matrix.hpp"
#include "gg/objectives.hpp"
#include "gg/rng.hpp"
#include "gg/verify.hpp"

// ---------------------------------------------------------------------------
// Heap accounting for the memory-bound criterion: every allocation in this
// binary goes through a size-stamped malloc, so live/peak byte counts are
// exact for the code under test.

namespace {

std::atomic<std::int64_t> g_live_bytes{0};
std::atomic<std::int64_t> g_peak_bytes{0};

void note_alloc(std::int64_t size) {
  std::int64_t live = g_live_bytes.fetch_add(size) + size;
  std::int64_t peak = g_peak_bytes.load();
  while (live > peak && !g_peak_bytes.compare_exchange_weak(peak, live)) {
  }
}

constexpr std::size_t kHeader = 16;

void* tracked_alloc(std::size_t size) {
  void* raw = std::malloc(size + kHeader);
  if (!raw) throw std::bad_alloc();
  std::memcpy(raw, &size, sizeof(size));
  note_alloc(static_cast<std::int64_t>(size));
  return static_cast<char*>(raw) + kHeader;
}

void tracked_free(void* p) {
  if (!p) return;
  void* raw = static_cast<char*>(p) - kHeader;
  std::size_t size;
  std::memcpy(&size, raw, sizeof(size));
  g_live_bytes.fetch_sub(static_cast<std::int64_t>(size));
  std::free(raw);
}

}  // namespace

void* operator new(std::size_t size) { return tracked_alloc(size); }
void* operator new[](std::size_t size) { return tracked_alloc(size); }
void operator delete(void* p) noexcept { tracked_free(p); }
void operator delete[](void* p) noexcept { tracked_free(p); }
void operator delete(void* p, std::size_t) noexcept { tracked_free(p); }
void operator delete[](void* p, std::size_t) noexcept { tracked_free(p); }

// ---------------------------------------------------------------------------

namespace {

struct Criterion {
  int id;
  std::string description;
  bool pass;
  double seconds;
  std::string detail;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1: condition-number-1 quadratics converge in one update across shapes.
Criterion one_step_convergence() {
  auto start = std::chrono::steady_clock::now();
  gg::CheckReport report = gg::check_one_step({2, 10, 100}, {2, 3, 5}, 20, 90210);
  bool pass = report.pass && report.instances == 180;
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "180 instances, max residual " << report.max_error << ", limit 1e-08";
  return {1, "one-step convergence on rho=1 quadratics", pass && seconds < 5.0, seconds,
          detail.str()};
}

// 2: Hadamard-form step sizes equal the summation-form solve and are
// stationary and minimal for the spread objective.
Criterion step_size_oracles() {
  auto start = std::chrono::steady_clock::now();
  bool pass = true;
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    gg::CheckReport report = gg::check_step_sizes(20, n, 10, 777);
    pass = pass && report.pass;
    worst = std::max(worst, report.max_error);
    instances += report.instances;
  }
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << instances << " instances, max equivalence error " << worst << ", limit 1e-10";
  return {2, "step-size solve vs summation-form oracle, stationarity, minimality",
          pass && seconds < 10.0, seconds, detail.str()};
}

// 3: the broadcast-sum identity behind the Hadamard form.
Criterion broadcast_identity() {
  auto start = std::chrono::steady_clock::now();
  gg::CheckReport report = gg::check_property1(2, 8, 100, 31415);
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << report.instances << " instances, max error " << report.max_error
         << ", limit 1e-12";
  return {3, "broadcast-sum identity equals (1/N) B (.) L", report.pass && seconds < 1.0,
          seconds, detail.str()};
}

// 4: G^T G (.) L stays PSD for random gradients (d=50, N=6, 100 draws).
Criterion schur_psd() {
  auto start = std::chrono::steady_clock::now();
  gg::Rng rng(2653);
  gg::DenseMatrix laplacian = gg::complete_graph_laplacian(6);
  double worst = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 100; ++trial) {
    gg::DenseMatrix grads(50, 6);
    for (std::size_t i = 0; i < 50; ++i) {
      for (std::size_t j = 0; j < 6; ++j) grads(i, j) = rng.normal();
    }
    gg::DenseMatrix system = hadamard(gram(grads, grads), laplacian);
    gg::SymEigDecomposition eig = sym_eig(system);
    double trace = 0.0;
    for (std::size_t i = 0; i < 6; ++i) trace += system(i, i);
    double ratio = eig.eigenvalues.front() / trace;
    worst = std::min(worst, ratio);
    pass = pass && eig.eigenvalues.front() >= -1e-10 * trace;
  }
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "100 instances, min eigenvalue/trace " << worst << ", limit -1e-10";
  return {4, "Hadamard-Laplacian system is PSD", pass && seconds < 1.0, seconds, detail.str()};
}

// 5: analytic gradients of every objective match central finite differences.
Criterion gradient_correctness() {
  auto start = std::chrono::steady_clock::now();
  bool pass = true;
  double worst = 0.0;

  auto check = [&](const gg::Objective& objective, std::span<const int> batch,
                   std::uint64_t seed) {
    gg::Rng rng(seed);
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> params(objective.dimension());
      for (double& x : params) x = rng.normal();
      std::vector<double> analytic = objective.gradient(params, batch);
      double num = 0.0, den = 0.0;
      std::vector<double> point = params;
      for (std::size_t i = 0; i < params.size(); ++i) {
        double h = 1e-5 * (1.0 + std::abs(params[i]));
        point[i] = params[i] + h;
        double up = objective.loss(point, batch);
        point[i] = params[i] - h;
        double down = objective.loss(point, batch);
        point[i] = params[i];
        double fd = (up - down) / (2.0 * h);
        num += (analytic[i] - fd) * (analytic[i] - fd);
        den += fd * fd;
      }
      double rel = std::sqrt(num) / std::max(1.0, std::sqrt(den));
      worst = std::max(worst, rel);
      pass = pass && rel <= 1e-5;
    }
  };

  gg::QuadraticObjective diag_quad = gg::QuadraticObjective::with_condition_number(30, 7.0);
  check(diag_quad, {}, 1);

  gg::DenseMatrix a{{2.0, 0.5, 0.0}, {0.5, 3.0, -0.25}, {0.0, -0.25, 1.5}};
  gg::QuadraticObjective dense_quad(a);
  check(dense_quad, {}, 2);

  auto data = std::make_shared<gg::Dataset>(gg::gen_synthetic(80, 6, 4, 5).with_bias_column());
  gg::SoftmaxObjective softmax(data);
  std::vector<int> batch{0, 7, 13, 21, 40, 55};
  check(softmax, batch, 3);

  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "3 objectives x 10 probes, max relative error " << worst << ", limit 1e-05";
  return {5, "analytic gradients match finite differences", pass && seconds < 2.0, seconds,
          detail.str()};
}

// Shared setup for criteria 6 and 7: the desk-scale classification problem.
gg::ExperimentConfig benchmark_config() {
  gg::ExperimentConfig config;
  config.objective.kind = gg::ObjectiveSpec::Kind::kSynthetic;
  config.objective.num_samples = 5000;
  config.objective.num_features = 100;
  config.objective.num_classes = 10;
  config.objective.data_seed = 12345;
  config.steps = 2000;
  config.gg_batch = 32;
  config.baseline_batch = 64;
  config.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  config.num_threads = 2;
  return config;
}

// 6: untuned grouping optimizer vs learning-rate-swept baselines.
Criterion benchmark_comparison() {
  auto start = std::chrono::steady_clock::now();
  gg::ExperimentConfig config = benchmark_config();
  config.lr_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};

  // Grouping optimizer at fixed defaults (N=2, alpha=0.9, epsilon=1e-4).
  gg::GGConfig gg_defaults;
  config.gg = gg_defaults;
  double gg_sum = 0.0;
  std::size_t diverged = 0;
  for (std::uint64_t seed : config.seeds) {
    gg::RunTrace trace = gg::run_single(config, seed);
    if (trace.diverged) ++diverged;
    gg_sum += trace.average_loss();
  }
  double gg_mean = gg_sum / static_cast<double>(config.seeds.size());
  config.gg.reset();

  // Each baseline swept over the grid; best per-lr mean wins.
  double best_mean = std::numeric_limits<double>::infinity();
  std::string best_name;
  for (gg::BaselineMethod method :
       {gg::BaselineMethod::kSgd, gg::BaselineMethod::kNesterov, gg::BaselineMethod::kAdam,
        gg::BaselineMethod::kRmsprop, gg::BaselineMethod::kLbfgs}) {
    gg::BaselineConfig baseline;
    baseline.method = method;
    config.baseline = baseline;
    gg::SweepSummary summary = gg::lr_sweep(config);
    for (const auto& row : summary.rows) {
      if (row.seed == -1 && row.method == baseline_method_name(method) &&
          row.avg_loss < best_mean) {
        best_mean = row.avg_loss;
        best_name = row.method + " lr=" + gg::format_double(row.lr);
      }
    }
    config.baseline.reset();
  }

  double ratio = gg_mean / best_mean;
  bool pass = ratio <= 1.2 && diverged == 0;
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "gg mean " << gg_mean << " vs best (" << best_name << ") " << best_mean
         << ", ratio " << ratio << " (limit 1.2), diverged " << diverged;
  return {6, "untuned grouping optimizer within 1.2x of best tuned baseline",
          pass && seconds < 300.0, seconds, detail.str()};
}

// 7: more parallel parameter vectors do not hurt (N=10 vs N=2).
Criterion group_size_ablation() {
  auto start = std::chrono::steady_clock::now();
  gg::ExperimentConfig config = benchmark_config();
  gg::GGConfig gg_defaults;
  config.gg = gg_defaults;
  config.n_grid = {2, 4, 6, 8, 10};

  gg::AblationSummary summary = gg::ablate_n(config);
  double at_2 = 0.0, at_10 = 0.0;
  std::ostringstream means;
  for (const auto& row : summary.rows) {
    if (row.n_points == 2) at_2 = row.avg_loss;
    if (row.n_points == 10) at_10 = row.avg_loss;
    means << "N=" << row.n_points << ":" << row.avg_loss << " ";
  }
  bool pass = summary.improved_at_max_n && at_10 <= at_2;
  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << means.str() << "(need N=10 <= N=2)";
  return {7, "group-size ablation improves from N=2 to N=10", pass && seconds < 600.0,
          seconds, detail.str()};
}

// 8: per-step cost scales linearly in d and memory stays O(d*N).
Criterion complexity_scaling() {
  auto start = std::chrono::steady_clock::now();

  auto per_step_seconds = [](std::size_t d) {
    gg::QuadraticObjective objective = gg::QuadraticObjective::isotropic(d, 1.0);
    gg::GGConfig config;
    config.n_points = 2;
    config.seed = 99;
    std::vector<double> samples;
    for (int rep = 0; rep < 7; ++rep) {
      gg::GGState state = gg::init_gg_state(d, config);
      std::vector<gg::BatchSampler> samplers{{1, 1, 1}, {1, 1, 2}};
      std::vector<double> losses(2);
      // Warm the caches before timing.
      for (int t = 0; t < 20; ++t) {
        gg::DenseMatrix grads =
            gg::parallel_loss_gradients(state.theta, objective, samplers, losses, 1);
        state = gg_step(state, grads, config);
      }
      auto t0 = std::chrono::steady_clock::now();
      const int steps = 150;
      for (int t = 0; t < steps; ++t) {
        gg::DenseMatrix grads =
            gg::parallel_loss_gradients(state.theta, objective, samplers, losses, 1);
        state = gg_step(state, grads, config);
      }
      samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count() /
                        steps);
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
  };

  double small = per_step_seconds(1000);
  double large = per_step_seconds(10000);
  double ratio = large / small;
  bool ratio_ok = ratio >= 5.0 && ratio <= 15.0;

  // Peak heap growth during a d=10000 run stays within a small multiple of
  // the d x N working set; any d x d object would blow through this bound.
  const std::size_t d = 10000, n = 2;
  std::int64_t live_before = g_live_bytes.load();
  g_peak_bytes.store(live_before);
  {
    gg::QuadraticObjective objective = gg::QuadraticObjective::isotropic(d, 1.0);
    gg::GGConfig config;
    config.n_points = n;
    config.seed = 7;
    gg::GGState state = gg::init_gg_state(d, config);
    std::vector<gg::BatchSampler> samplers{{1, 1, 1}, {1, 1, 2}};
    std::vector<double> losses(n);
    for (int t = 0; t < 50; ++t) {
      gg::DenseMatrix grads =
          gg::parallel_loss_gradients(state.theta, objective, samplers, losses, 1);
      state = gg_step(state, grads, config);
    }
  }
  std::int64_t peak_delta = g_peak_bytes.load() - live_before;
  std::int64_t budget = 8 * static_cast<std::int64_t>(d * n * sizeof(double)) + (1 << 18);
  bool memory_ok = peak_delta <= budget;

  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "time ratio d=10000/d=1000 " << ratio << " (need [5,15]), peak heap delta "
         << peak_delta << " bytes (budget " << budget << ")";
  return {8, "per-step time linear in d, memory O(d*N)", ratio_ok && memory_ok, seconds,
          detail.str()};
}

// 9: identical config and seed produce byte-identical CSV.
Criterion determinism() {
  auto start = std::chrono::steady_clock::now();
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  gg::ExperimentConfig config;
  config.objective.kind = gg::ObjectiveSpec::Kind::kSynthetic;
  config.objective.num_samples = 500;
  config.objective.num_features = 20;
  config.objective.num_classes = 4;
  config.steps = 200;
  config.seeds = {4242};
  gg::GGConfig gg_defaults;
  config.gg = gg_defaults;

  config.output_path = "/tmp/gg_acceptance_run_a.csv";
  gg::run_experiment(config);
  std::string first = read_file(config.output_path);
  config.output_path = "/tmp/gg_acceptance_run_b.csv";
  gg::run_experiment(config);
  std::string second = read_file(config.output_path);
  bool gg_ok = !first.empty() && first == second;

  gg::BaselineConfig baseline;
  baseline.method = gg::BaselineMethod::kAdam;
  baseline.lr = 0.01;
  config.gg.reset();
  config.baseline = baseline;
  config.output_path = "/tmp/gg_acceptance_run_c.csv";
  gg::run_experiment(config);
  std::string third = read_file(config.output_path);
  config.output_path = "/tmp/gg_acceptance_run_d.csv";
  gg::run_experiment(config);
  std::string fourth = read_file(config.output_path);
  bool baseline_ok = !third.empty() && third == fourth;

  double seconds = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "gg trace " << (gg_ok ? "identical" : "DIFFERS") << ", baseline trace "
         << (baseline_ok ? "identical" : "DIFFERS");
  return {9, "repeated runs emit byte-identical CSV", gg_ok && baseline_ok, seconds,
          detail.str()};
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(one_step_convergence());
  results.push_back(step_size_oracles());
  results.push_back(broadcast_identity());
  results.push_back(schur_psd());
  results.push_back(gradient_correctness());
  results.push_back(benchmark_comparison());
  results.push_back(group_size_ablation());
  results.push_back(complexity_scaling());
  results.push_back(determinism());

  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] criterion %d: %s (%.2fs) - %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.description.c_str(), r.seconds, r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("%s\n", all_pass ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
  return all_pass ? 0 : 1;
}
