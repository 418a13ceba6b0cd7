#include "gg/executor.hpp"

#include <future>
#include <string>

#include "gg/error.hpp"

namespace gg {

DenseMatrix parallel_loss_gradients(const DenseMatrix& theta, const Objective& objective,
                                    std::span<BatchSampler> samplers,
                                    std::span<double> losses_out, int num_threads) {
  const std::size_t n = theta.cols();
  const std::size_t d = theta.rows();
  if (samplers.size() != n) {
    throw DimensionError("parallel_gradients: " + std::to_string(samplers.size()) +
                         " samplers for " + std::to_string(n) + " columns");
  }
  if (d != objective.dimension()) {
    throw DimensionError("parallel_gradients: theta has " + std::to_string(d) +
                         " rows but objective dimension is " +
                         std::to_string(objective.dimension()));
  }
  if (!losses_out.empty() && losses_out.size() != n) {
    throw DimensionError("parallel_gradients: loss output length mismatch");
  }

  // Batches come off the samplers on this thread, in column order; worker
  // scheduling can then not affect which column sees which batch.
  std::vector<std::vector<int>> batches(n);
  for (std::size_t i = 0; i < n; ++i) batches[i] = samplers[i].next();

  DenseMatrix grads(d, n);
  std::vector<std::vector<double>> columns(n, std::vector<double>(d));
  std::vector<double> params(d);

  auto eval_column = [&](std::size_t i, std::span<double> param_buf) {
    theta.copy_column(i, param_buf);
    double loss = objective.loss_and_gradient(param_buf, batches[i], columns[i]);
    if (!losses_out.empty()) losses_out[i] = loss;
  };

  if (num_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        eval_column(i, params);
      } catch (const std::exception& e) {
        throw std::runtime_error("gradient evaluation failed for column " + std::to_string(i) +
                                 ": " + e.what());
      }
    }
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(n);
    std::vector<std::vector<double>> param_bufs(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] { eval_column(i, param_bufs[i]); }));
    }
    std::string failure;
    for (std::size_t i = 0; i < n; ++i) {
      try {
        futures[i].get();
      } catch (const std::exception& e) {
        if (failure.empty()) {
          failure = "gradient evaluation failed for column " + std::to_string(i) + ": " + e.what();
        }
      }
    }
    if (!failure.empty()) throw std::runtime_error(failure);
  }

  for (std::size_t i = 0; i < n; ++i) grads.set_column(i, columns[i]);
  return grads;
}

DenseMatrix parallel_gradients(const DenseMatrix& theta, const Objective& objective,
                               std::span<BatchSampler> samplers, int num_threads) {
  return parallel_loss_gradients(theta, objective, samplers, {}, num_threads);
}

}  // namespace gg
