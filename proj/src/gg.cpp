#include "gg/gg.hpp"

#include <cmath>
#include <string>

#include "gg/error.hpp"
#include "gg/executor.hpp"
#include "gg/rng.hpp"

namespace gg {

void GGConfig::validate() const {
  if (n_points < 2) {
    throw DimensionError("GGConfig: n_points must be >= 2, got " + std::to_string(n_points));
  }
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw DimensionError("GGConfig: alpha must be in (0, 1]");
  }
  if (!(epsilon > 0.0)) {
    throw DimensionError("GGConfig: epsilon must be positive");
  }
}

GGState init_gg_state(std::size_t dimension, const GGConfig& config) {
  config.validate();
  if (dimension == 0) throw DimensionError("init_gg_state: dimension must be positive");

  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  GGState state;
  state.theta = DenseMatrix(dimension, config.n_points);
  std::vector<double> column(dimension);
  for (std::size_t j = 0; j < config.n_points; ++j) {
    Rng rng(Rng::derive_seed(config.seed, 0x1417 + j));
    for (std::size_t i = 0; i < dimension; ++i) column[i] = scale * rng.normal();
    state.theta.set_column(j, column);
  }

  // Gaussian draws collide with probability zero, but the distinct-columns
  // requirement is part of the contract, so check it.
  for (std::size_t a = 0; a < config.n_points; ++a) {
    for (std::size_t b = a + 1; b < config.n_points; ++b) {
      bool same = true;
      for (std::size_t i = 0; i < dimension && same; ++i) {
        same = state.theta(i, a) == state.theta(i, b);
      }
      if (same) {
        throw NumericError("init_gg_state: columns " + std::to_string(a) + " and " +
                           std::to_string(b) + " coincide");
      }
    }
  }
  return state;
}

std::vector<double> compute_step_sizes(const DenseMatrix& theta, const DenseMatrix& grads,
                                       double epsilon) {
  if (theta.rows() != grads.rows() || theta.cols() != grads.cols()) {
    throw DimensionError("compute_step_sizes: theta and grads shapes differ");
  }
  const std::size_t n = theta.cols();
  if (n < 2) {
    throw DimensionError("compute_step_sizes: need at least 2 columns");
  }
  if (!grads.all_finite()) {
    throw NumericError("compute_step_sizes: non-finite gradient entries");
  }

  DenseMatrix laplacian = complete_graph_laplacian(n);
  DenseMatrix system = hadamard(gram(grads, grads), laplacian);
  DenseMatrix cross = hadamard(gram(grads, theta), laplacian);

  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += cross(i, j);
    rhs[i] = -row_sum;
  }
  return clipped_solve(system, epsilon, rhs);
}

DenseMatrix apply_update(const DenseMatrix& theta, const DenseMatrix& grads,
                         std::span<const double> eta, double alpha) {
  if (theta.rows() != grads.rows() || theta.cols() != grads.cols()) {
    throw DimensionError("apply_update: theta and grads shapes differ");
  }
  if (eta.size() != theta.cols()) {
    throw DimensionError("apply_update: eta length " + std::to_string(eta.size()) +
                         " does not match " + std::to_string(theta.cols()) + " columns");
  }
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw DimensionError("apply_update: alpha must be in (0, 1]");
  }
  DenseMatrix out(theta.rows(), theta.cols());
  for (std::size_t i = 0; i < theta.rows(); ++i) {
    for (std::size_t j = 0; j < theta.cols(); ++j) {
      out(i, j) = theta(i, j) + alpha * eta[j] * grads(i, j);
    }
  }
  return out;
}

GGState gg_step(const GGState& state, const DenseMatrix& grads, const GGConfig& config) {
  config.validate();
  std::vector<double> eta = compute_step_sizes(state.theta, grads, config.epsilon);
  GGState next;
  next.theta = apply_update(state.theta, grads, eta, config.alpha);
  next.step_count = state.step_count + 1;
  return next;
}

RunTrace run_gg(const Objective& objective, std::span<BatchSampler> samplers,
                const GGConfig& config, int num_threads) {
  config.validate();
  if (samplers.size() != config.n_points) {
    throw DimensionError("run_gg: " + std::to_string(samplers.size()) + " samplers for " +
                         std::to_string(config.n_points) + " columns");
  }

  GGState state = init_gg_state(objective.dimension(), config);
  const std::size_t n = config.n_points;

  RunTrace trace;
  trace.records.reserve(config.max_steps);
  std::vector<double> losses(n);

  for (std::size_t t = 0; t < config.max_steps; ++t) {
    DenseMatrix grads;
    try {
      grads = parallel_loss_gradients(state.theta, objective, samplers, losses, num_threads);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_gg: step " + std::to_string(t) + ": " + e.what());
    }

    bool finite = grads.all_finite();
    for (double l : losses) finite = finite && std::isfinite(l);

    StepRecord record;
    record.step = t;
    record.losses = losses;
    record.etas.assign(n, 0.0);
    record.grad_norms.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < grads.rows(); ++i) sum += grads(i, j) * grads(i, j);
      record.grad_norms[j] = std::sqrt(sum);
    }

    if (!finite) {
      trace.records.push_back(std::move(record));
      trace.diverged = true;
      break;
    }

    std::vector<double> eta;
    try {
      eta = compute_step_sizes(state.theta, grads, config.epsilon);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_gg: step " + std::to_string(t) + ": " + e.what());
    }
    record.etas = eta;
    trace.records.push_back(std::move(record));

    state.theta = apply_update(state.theta, grads, eta, config.alpha);
    state.step_count += 1;
  }
  return trace;
}

DenseMatrix post_condition_matrix(const DenseMatrix& grads, const DenseMatrix& theta) {
  if (theta.rows() != grads.rows() || theta.cols() != grads.cols()) {
    throw DimensionError("post_condition_matrix: theta and grads shapes differ");
  }
  const std::size_t n = grads.cols();
  DenseMatrix gtg = gram(grads, grads);
  SymEigDecomposition eig = sym_eig(gtg);

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gtg(i, i);
  if (eig.eigenvalues.front() <= 1e-10 * trace) {
    throw SingularMatrixError("post_condition_matrix: G^T G is numerically singular (min "
                              "eigenvalue " +
                              std::to_string(eig.eigenvalues.front()) + ")");
  }

  DenseMatrix gt_theta = gram(grads, theta);
  // (G^T G)^{-1} column by column through the eigenbasis.
  DenseMatrix out(n, n);
  std::vector<double> rhs(n), x(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = gt_theta(i, col);
    for (std::size_t k = 0; k < n; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += eig.eigenvectors(i, k) * rhs[i];
      x[k] = dot / eig.eigenvalues[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += eig.eigenvectors(i, k) * x[k];
      out(i, col) = acc;
    }
  }
  return out;
}

}  // namespace gg
