#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace gg {

// One optimizer iteration. Vectors hold one entry per maintained parameter
// column (a single entry for the scalar baselines). etas holds the solved
// step sizes for the grouping optimizer and the learning rate for baselines.
struct StepRecord {
  std::size_t step = 0;
  std::vector<double> losses;
  std::vector<double> etas;
  std::vector<double> grad_norms;
  std::int64_t elapsed_us = 0;
};

struct RunTrace {
  std::vector<StepRecord> records;
  bool diverged = false;

  std::size_t num_steps() const { return records.size(); }

  // Arithmetic mean of every recorded mini-batch loss; +inf for diverged runs.
  double average_loss() const {
    if (diverged) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
      for (double l : r.losses) {
        sum += l;
        ++count;
      }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  }

  // The column reported as the run's answer: lowest most-recent loss
  // estimate (ties break toward the lower index).
  std::size_t reported_column() const {
    if (records.empty()) return 0;
    const auto& last = records.back().losses;
    std::size_t best = 0;
    for (std::size_t j = 1; j < last.size(); ++j) {
      if (last[j] < last[best]) best = j;
    }
    return best;
  }
};

}  // namespace gg
