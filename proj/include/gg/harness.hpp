#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gg/baselines.hpp"
#include "gg/executor.hpp"
#include "gg/gg.hpp"
#include "gg/objectives.hpp"
#include "gg/trace.hpp"

namespace gg {

// What to optimize. Exactly one of the three kinds.
struct ObjectiveSpec {
  enum class Kind { kQuadratic, kSynthetic, kFile };
  Kind kind = Kind::kSynthetic;

  // quadratic
  std::size_t dimension = 100;
  double rho = 1.0;

  // synthetic
  std::size_t num_samples = 5000;
  std::size_t num_features = 100;
  std::size_t num_classes = 10;
  std::uint64_t data_seed = 12345;

  // file
  std::string path;
  DataFormat format = DataFormat::kCsv;
};

struct ExperimentConfig {
  ObjectiveSpec objective;

  // Exactly one of these drives the run.
  std::optional<GGConfig> gg;
  std::optional<BaselineConfig> baseline;

  std::size_t steps = 100;
  std::size_t gg_batch = 32;        // per column per step
  std::size_t baseline_batch = 64;  // per step
  std::vector<double> lr_grid;
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  std::string output_path;

  int num_threads = 1;
  bool record_timing = false;  // wall-clock in traces breaks byte-stable CSV; opt-in

  void validate() const;
};

// Materialized objective plus the dataset size batches are drawn from.
struct BuiltObjective {
  std::shared_ptr<const Objective> objective;
  std::size_t sample_count = 1;  // 1 for deterministic objectives
};

// Synthetic and file datasets get the constant bias feature appended here,
// so softmax dimension is num_classes * (num_features + 1).
BuiltObjective build_objective(const ObjectiveSpec& spec);

// One optimizer run with the given seed; no file output.
RunTrace run_single(const ExperimentConfig& config, std::uint64_t seed);

// Validates, runs the first configured seed and writes the trace CSV to
// output_path when set.
RunTrace run_experiment(const ExperimentConfig& config);

// One summary line: a single run when seed >= 0, a per-group aggregate over
// seeds when seed == -1 (avg_loss = mean, loss_std = standard deviation).
struct SummaryRow {
  std::string method;
  double lr = 0.0;
  std::size_t n_points = 1;
  std::int64_t seed = -1;
  double avg_loss = 0.0;
  double loss_std = 0.0;
};

struct SweepSummary {
  std::vector<SummaryRow> rows;
};

// Baseline over config.lr_grid x config.seeds, then the grouping optimizer at
// its fixed defaults appended as a reference aggregate (lr column 0).
SweepSummary lr_sweep(const ExperimentConfig& config);

struct AblationSummary {
  std::vector<SummaryRow> rows;  // one aggregate per N
  bool improved_at_max_n = false;
};

// Grouping optimizer over config.n_grid x config.seeds; batch size stays
// per-column, so total samples per step grow with N.
AblationSummary ablate_n(const ExperimentConfig& config);

// CSV: header step,column_id,loss,eta,grad_norm,elapsed_us; one row per
// (step, column); 17 significant digits so values round-trip exactly.
void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);

// CSV: header method,lr,N,seed,avg_loss,loss_std. Lines starting with '#'
// are metadata and are skipped by the reader.
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path,
                       const std::vector<std::string>& metadata = {});
std::vector<SummaryRow> read_summary_csv(const std::string& path);

// Formats a double with 17 significant digits (exact round-trip).
std::string format_double(double value);

// Flat key=value config file with [section] headers; returns
// "section.key" -> value ("" section for keys before any header).
std::map<std::string, std::string> load_config_file(const std::string& path);

}  // namespace gg
