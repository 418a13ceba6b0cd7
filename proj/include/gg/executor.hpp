#pragma once

#include <span>
#include <vector>

#include "gg/matrix.hpp"
#include "gg/objectives.hpp"

namespace gg {

// Evaluates one gradient per column of theta, column i on the next batch of
// samplers[i]. Batches are drawn on the calling thread in column order, so
// the result is identical for any worker count; only the gradient evaluations
// run concurrently (num_threads <= 1 keeps everything on the caller).
// losses_out, when non-empty, receives the per-column mini-batch losses.
DenseMatrix parallel_loss_gradients(const DenseMatrix& theta, const Objective& objective,
                                    std::span<BatchSampler> samplers,
                                    std::span<double> losses_out, int num_threads);

DenseMatrix parallel_gradients(const DenseMatrix& theta, const Objective& objective,
                               std::span<BatchSampler> samplers, int num_threads = 1);

}  // namespace gg
