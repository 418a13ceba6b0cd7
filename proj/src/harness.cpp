#include "gg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "gg/error.hpp"
#include "gg/rng.hpp"

namespace gg {

void ExperimentConfig::validate() const {
  if (gg.has_value() == baseline.has_value()) {
    throw DimensionError("ExperimentConfig: exactly one of gg/baseline must be set");
  }
  if (gg) gg->validate();
  if (baseline) baseline->validate();
  if (steps < 1) throw DimensionError("ExperimentConfig: steps must be >= 1");
  if (gg_batch < 1 || baseline_batch < 1) {
    throw DimensionError("ExperimentConfig: batch sizes must be >= 1");
  }
  if (seeds.empty()) throw DimensionError("ExperimentConfig: at least one seed required");
  for (double lr : lr_grid) {
    if (!(lr > 0.0)) throw DimensionError("ExperimentConfig: lr grid entries must be positive");
  }
  for (std::size_t n : n_grid) {
    if (n < 2) throw DimensionError("ExperimentConfig: n grid entries must be >= 2");
  }
}

BuiltObjective build_objective(const ObjectiveSpec& spec) {
  BuiltObjective built;
  switch (spec.kind) {
    case ObjectiveSpec::Kind::kQuadratic: {
      built.objective = std::make_shared<QuadraticObjective>(
          QuadraticObjective::with_condition_number(spec.dimension, spec.rho));
      built.sample_count = 1;
      break;
    }
    case ObjectiveSpec::Kind::kSynthetic: {
      auto data = std::make_shared<Dataset>(
          gen_synthetic(spec.num_samples, spec.num_features, spec.num_classes, spec.data_seed)
              .with_bias_column());
      built.sample_count = data->num_samples;
      built.objective = std::make_shared<SoftmaxObjective>(std::move(data));
      break;
    }
    case ObjectiveSpec::Kind::kFile: {
      auto data =
          std::make_shared<Dataset>(load_dataset(spec.path, spec.format).with_bias_column());
      built.sample_count = data->num_samples;
      built.objective = std::make_shared<SoftmaxObjective>(std::move(data));
      break;
    }
  }
  return built;
}

namespace {

std::vector<double> initial_params(std::size_t d, std::uint64_t seed) {
  // Same column scheme as the grouping optimizer's first column.
  std::vector<double> params(d);
  Rng rng(Rng::derive_seed(seed, 0x1417));
  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& x : params) x = scale * rng.normal();
  return params;
}

RunTrace run_baseline(const BuiltObjective& built, const BaselineConfig& baseline,
                      std::size_t steps, std::size_t batch_size, std::uint64_t seed,
                      bool record_timing) {
  const Objective& objective = *built.objective;
  const std::size_t d = objective.dimension();
  std::size_t effective_batch = std::min(batch_size, built.sample_count);
  BatchSampler sampler(built.sample_count, effective_batch, seed);

  BaselineState state = make_baseline_state(initial_params(d, seed), baseline);
  RunTrace trace;
  trace.records.reserve(steps);
  std::vector<double> grad(d);

  for (std::size_t t = 0; t < steps; ++t) {
    auto start = std::chrono::steady_clock::now();
    std::vector<int> batch = sampler.next();

    double loss;
    std::vector<double> eval_point = baseline_eval_point(state, baseline);
    if (baseline.method == BaselineMethod::kNesterov) {
      // Loss is reported at the current parameters, the step consumes the
      // lookahead gradient; both on the same batch.
      loss = objective.loss(state.params, batch);
      objective.loss_and_gradient(eval_point, batch, grad);
    } else {
      loss = objective.loss_and_gradient(state.params, batch, grad);
    }

    StepRecord record;
    record.step = t;
    record.losses = {loss};
    record.etas = {baseline.lr};
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    record.grad_norms = {std::sqrt(gnorm)};

    bool finite = std::isfinite(loss);
    for (double g : grad) finite = finite && std::isfinite(g);
    if (!finite) {
      if (record_timing) {
        record.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
      }
      trace.records.push_back(std::move(record));
      trace.diverged = true;
      break;
    }

    state = baseline_step(std::move(state), grad, baseline);
    if (record_timing) {
      record.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    }
    trace.records.push_back(std::move(record));
  }
  return trace;
}

RunTrace run_gg_experiment(const BuiltObjective& built, GGConfig config, std::size_t steps,
                           std::size_t batch_size, std::uint64_t seed, int num_threads,
                           bool record_timing) {
  config.max_steps = steps;
  config.seed = seed;
  std::vector<BatchSampler> samplers;
  samplers.reserve(config.n_points);
  std::size_t effective_batch = std::min(batch_size, built.sample_count);
  for (std::size_t i = 0; i < config.n_points; ++i) {
    // Column i owns the stream seeded with master seed + i.
    samplers.emplace_back(built.sample_count, effective_batch, seed + i);
  }

  if (!record_timing) {
    return run_gg(*built.objective, samplers, config, num_threads);
  }

  // Timed variant: step manually so per-step wall-clock lands in the record.
  GGState state = init_gg_state(built.objective->dimension(), config);
  RunTrace trace;
  trace.records.reserve(steps);
  std::vector<double> losses(config.n_points);
  for (std::size_t t = 0; t < steps; ++t) {
    auto start = std::chrono::steady_clock::now();
    DenseMatrix grads =
        parallel_loss_gradients(state.theta, *built.objective, samplers, losses, num_threads);
    bool finite = grads.all_finite();
    for (double l : losses) finite = finite && std::isfinite(l);

    StepRecord record;
    record.step = t;
    record.losses = losses;
    record.etas.assign(config.n_points, 0.0);
    record.grad_norms.resize(config.n_points);
    for (std::size_t j = 0; j < config.n_points; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < grads.rows(); ++i) sum += grads(i, j) * grads(i, j);
      record.grad_norms[j] = std::sqrt(sum);
    }
    if (!finite) {
      trace.records.push_back(std::move(record));
      trace.diverged = true;
      break;
    }
    std::vector<double> eta = compute_step_sizes(state.theta, grads, config.epsilon);
    record.etas = eta;
    state.theta = apply_update(state.theta, grads, eta, config.alpha);
    state.step_count += 1;
    record.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    trace.records.push_back(std::move(record));
  }
  return trace;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mu = mean_of(v);
  double sum = 0.0;
  for (double x : v) sum += (x - mu) * (x - mu);
  return std::sqrt(sum / static_cast<double>(v.size()));
}

// Runs fn(i) for i in [0, count) on up to num_workers threads; results land
// in index order so output never depends on scheduling.
std::vector<double> run_indexed(std::size_t count, int num_workers,
                                const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(count, 0.0);
  if (num_workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::future<void>> workers;
  std::size_t worker_count = std::min<std::size_t>(static_cast<std::size_t>(num_workers), count);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < worker_count; ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    }));
  }
  for (auto& w : workers) w.get();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace

RunTrace run_single(const ExperimentConfig& config, std::uint64_t seed) {
  BuiltObjective built = build_objective(config.objective);
  if (config.gg) {
    return run_gg_experiment(built, *config.gg, config.steps, config.gg_batch, seed,
                             config.num_threads, config.record_timing);
  }
  return run_baseline(built, *config.baseline, config.steps, config.baseline_batch, seed,
                      config.record_timing);
}

RunTrace run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunTrace trace = run_single(config, config.seeds.front());
  if (!config.output_path.empty()) {
    write_trace_csv(trace, config.output_path);
  }
  return trace;
}

SweepSummary lr_sweep(const ExperimentConfig& config) {
  config.validate();
  if (!config.baseline) {
    throw DimensionError("lr_sweep: optimizer must be a baseline");
  }
  if (config.lr_grid.empty()) {
    throw DimensionError("lr_sweep: lr grid is empty");
  }

  BuiltObjective built = build_objective(config.objective);
  const std::string method = baseline_method_name(config.baseline->method);
  const std::size_t num_seeds = config.seeds.size();

  // One task per (lr, seed); runs are independent.
  std::size_t total = config.lr_grid.size() * num_seeds;
  std::vector<double> losses = run_indexed(total, config.num_threads, [&](std::size_t i) {
    std::size_t lr_idx = i / num_seeds;
    std::size_t seed_idx = i % num_seeds;
    BaselineConfig bl = *config.baseline;
    bl.lr = config.lr_grid[lr_idx];
    RunTrace trace = run_baseline(built, bl, config.steps, config.baseline_batch,
                                  config.seeds[seed_idx], false);
    return trace.average_loss();
  });

  SweepSummary summary;
  for (std::size_t lr_idx = 0; lr_idx < config.lr_grid.size(); ++lr_idx) {
    std::vector<double> group;
    for (std::size_t s = 0; s < num_seeds; ++s) {
      double loss = losses[lr_idx * num_seeds + s];
      summary.rows.push_back({method, config.lr_grid[lr_idx], 1,
                              static_cast<std::int64_t>(config.seeds[s]), loss, 0.0});
      group.push_back(loss);
    }
    summary.rows.push_back({method, config.lr_grid[lr_idx], 1, -1, mean_of(group), std_of(group)});
  }

  // Reference runs of the grouping optimizer at its fixed defaults.
  GGConfig reference;
  if (config.gg) reference = *config.gg;
  std::vector<double> gg_losses = run_indexed(num_seeds, config.num_threads, [&](std::size_t s) {
    RunTrace trace = run_gg_experiment(built, reference, config.steps, config.gg_batch,
                                       config.seeds[s], 1, false);
    return trace.average_loss();
  });
  summary.rows.push_back(
      {"gg", 0.0, reference.n_points, -1, mean_of(gg_losses), std_of(gg_losses)});

  if (!config.output_path.empty()) {
    write_summary_csv(summary.rows, config.output_path);
  }
  return summary;
}

AblationSummary ablate_n(const ExperimentConfig& config) {
  config.validate();
  if (!config.gg) {
    throw DimensionError("ablate_n: optimizer must be the grouping optimizer");
  }
  if (config.n_grid.empty()) {
    throw DimensionError("ablate_n: n grid is empty");
  }

  BuiltObjective built = build_objective(config.objective);
  const std::size_t num_seeds = config.seeds.size();

  std::size_t total = config.n_grid.size() * num_seeds;
  std::vector<double> losses = run_indexed(total, config.num_threads, [&](std::size_t i) {
    std::size_t n_idx = i / num_seeds;
    std::size_t seed_idx = i % num_seeds;
    GGConfig gg_config = *config.gg;
    gg_config.n_points = config.n_grid[n_idx];
    RunTrace trace = run_gg_experiment(built, gg_config, config.steps, config.gg_batch,
                                       config.seeds[seed_idx], 1, false);
    return trace.average_loss();
  });

  AblationSummary summary;
  for (std::size_t n_idx = 0; n_idx < config.n_grid.size(); ++n_idx) {
    std::vector<double> group(losses.begin() + static_cast<std::ptrdiff_t>(n_idx * num_seeds),
                              losses.begin() +
                                  static_cast<std::ptrdiff_t>((n_idx + 1) * num_seeds));
    summary.rows.push_back(
        {"gg", 0.0, config.n_grid[n_idx], -1, mean_of(group), std_of(group)});
  }

  auto min_it = std::min_element(config.n_grid.begin(), config.n_grid.end());
  auto max_it = std::max_element(config.n_grid.begin(), config.n_grid.end());
  double loss_at_min = summary.rows[static_cast<std::size_t>(
                                        min_it - config.n_grid.begin())].avg_loss;
  double loss_at_max = summary.rows[static_cast<std::size_t>(
                                        max_it - config.n_grid.begin())].avg_loss;
  summary.improved_at_max_n = loss_at_max <= loss_at_min;

  if (!config.output_path.empty()) {
    std::vector<std::string> metadata = {
        "batch_per_column=" + std::to_string(config.gg_batch),
        "total_samples_scale_with_n=1",
        "improved_at_max_n=" + std::string(summary.improved_at_max_n ? "1" : "0"),
    };
    write_summary_csv(summary.rows, config.output_path, metadata);
  }
  return summary;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open '" + path + "'");
  out << "step,column_id,loss,eta,grad_norm,elapsed_us\n";
  for (const auto& r : trace.records) {
    for (std::size_t j = 0; j < r.losses.size(); ++j) {
      out << r.step << ',' << j << ',' << format_double(r.losses[j]) << ','
          << format_double(r.etas[j]) << ',' << format_double(r.grad_norms[j]) << ','
          << r.elapsed_us << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;

  RunTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 6) throw ParseError("expected 6 columns", line_no);
    try {
      std::size_t step = std::stoul(cells[0]);
      std::size_t column = std::stoul(cells[1]);
      if (trace.records.empty() || trace.records.back().step != step) {
        trace.records.push_back(StepRecord{step, {}, {}, {}, 0});
      }
      StepRecord& r = trace.records.back();
      if (column != r.losses.size()) throw std::invalid_argument("column order");
      r.losses.push_back(std::stod(cells[2]));
      r.etas.push_back(std::stod(cells[3]));
      r.grad_norms.push_back(std::stod(cells[4]));
      r.elapsed_us = std::stoll(cells[5]);
    } catch (const std::exception&) {
      throw ParseError("cannot parse row", line_no);
    }
  }
  return trace;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path,
                       const std::vector<std::string>& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open '" + path + "'");
  for (const auto& m : metadata) out << "# " << m << '\n';
  out << "method,lr,N,seed,avg_loss,loss_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.lr) << ',' << r.n_points << ',' << r.seed << ','
        << format_double(r.avg_loss) << ',' << format_double(r.loss_std) << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_summary_csv: cannot open '" + path + "'");
  std::vector<SummaryRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != 6) throw ParseError("expected 6 columns", line_no);
    try {
      SummaryRow r;
      r.method = cells[0];
      r.lr = std::stod(cells[1]);
      r.n_points = std::stoul(cells[2]);
      r.seed = std::stoll(cells[3]);
      r.avg_loss = std::stod(cells[4]);
      r.loss_std = std::stod(cells[5]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParseError("cannot parse row", line_no);
    }
  }
  return rows;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config_file: cannot open '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    auto is_space = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(trimmed.substr(1, trimmed.size() - 2));
      continue;
    }
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    std::string key = trim(trimmed.substr(0, eq));
    std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    values[section.empty() ? key : section + "." + key] = value;
  }
  return values;
}

}  // namespace gg
