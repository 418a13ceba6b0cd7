#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gg/matrix.hpp"
#include "gg/objectives.hpp"
#include "gg/trace.hpp"

namespace gg {

// Grouping optimizer settings. alpha contracts the solved step sizes so the
// columns never coincide exactly after an update; epsilon is the eigenvalue
// floor applied to the G^T G (.) L system before solving.
struct GGConfig {
  std::size_t n_points = 2;
  double alpha = 0.9;
  double epsilon = 1e-4;
  std::size_t max_steps = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GGState {
  DenseMatrix theta;  // d x N, one parameter vector per column
  std::size_t step_count = 0;
};

// Gaussian columns at scale 1/sqrt(d), a distinct sub-seed per column.
GGState init_gg_state(std::size_t dimension, const GGConfig& config);

// Step sizes eta = -(G^T G (.) L)^{-1} (G^T Theta (.) L) 1, the minimizer of
// the post-update column spread when the floored system is positive definite.
// Every d-sized reduction happens through gram(); nothing d-by-d is formed.
std::vector<double> compute_step_sizes(const DenseMatrix& theta, const DenseMatrix& grads,
                                       double epsilon);

// Column i of the result is theta_i + alpha * eta_i * g_i.
DenseMatrix apply_update(const DenseMatrix& theta, const DenseMatrix& grads,
                         std::span<const double> eta, double alpha);

// One full iteration: solve for the step sizes at the given gradients, apply
// the contracted update, bump the step counter.
GGState gg_step(const GGState& state, const DenseMatrix& grads, const GGConfig& config);

// Runs max_steps iterations from a fresh seeded initialization. One sampler
// per column supplies the batches; gradients for the columns may be computed
// concurrently (num_threads > 1) without changing any result.
RunTrace run_gg(const Objective& objective, std::span<BatchSampler> samplers,
                const GGConfig& config, int num_threads = 1);

// Diagnostic N x N right-multiplier (G^T G)^{-1} (G^T Theta) approximating
// Newton pre-conditioning from the gradient side; not part of the update.
DenseMatrix post_condition_matrix(const DenseMatrix& grads, const DenseMatrix& theta);

}  // namespace gg
