#pragma once

#include <deque>
#include <span>
#include <string>
#include <vector>

namespace gg {

enum class BaselineMethod { kSgd, kNesterov, kAdam, kRmsprop, kLbfgs };

std::string baseline_method_name(BaselineMethod method);
BaselineMethod baseline_method_from_name(const std::string& name);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kSgd;
  double lr = 0.01;
  double momentum = 0.9;      // nesterov
  double beta1 = 0.9;         // adam
  double beta2 = 0.999;       // adam
  double rho = 0.9;           // rmsprop
  double eps_stabilizer = 1e-8;
  std::size_t history = 10;   // lbfgs memory

  void validate() const;
};

struct CurvaturePair {
  std::vector<double> s;  // parameter displacement
  std::vector<double> y;  // gradient displacement
  double rho = 0.0;       // 1 / (s^T y)
};

struct BaselineState {
  std::vector<double> params;
  std::vector<double> velocity;       // nesterov
  std::vector<double> first_moment;   // adam
  std::vector<double> second_moment;  // adam, rmsprop
  std::size_t step_count = 0;

  std::deque<CurvaturePair> lbfgs_history;
  std::vector<double> prev_params;
  std::vector<double> prev_grad;
  bool has_prev = false;
};

BaselineState make_baseline_state(std::vector<double> init_params, const BaselineConfig& config);

// theta <- theta - lr * g.
BaselineState step_sgd(BaselineState state, std::span<const double> grad,
                       const BaselineConfig& config);

// v <- mu v - lr * g_lookahead; theta <- theta + v. The gradient must be
// evaluated at theta + mu * v (the caller owns the lookahead evaluation).
BaselineState step_nesterov(BaselineState state, std::span<const double> grad_at_lookahead,
                            const BaselineConfig& config);

// Bias-corrected first/second moments; theta <- theta - lr * mhat / (sqrt(vhat) + eps).
BaselineState step_adam(BaselineState state, std::span<const double> grad,
                        const BaselineConfig& config);

// v <- rho v + (1 - rho) g^2; theta <- theta - lr * g / (sqrt(v) + eps).
BaselineState step_rmsprop(BaselineState state, std::span<const double> grad,
                           const BaselineConfig& config);

// Two-loop recursion over at most `history` stored (s, y) pairs; gamma =
// s^T y / y^T y initial scaling; theta <- theta + lr * direction. Pairs are
// appended only when s^T y > 1e-10; fixed lr, no line search.
BaselineState step_lbfgs(BaselineState state, std::span<const double> grad,
                         const BaselineConfig& config);

// Dispatch on config.method. For nesterov the gradient must already be the
// lookahead gradient.
BaselineState baseline_step(BaselineState state, std::span<const double> grad,
                            const BaselineConfig& config);

// Where the next gradient should be evaluated: theta + mu * v for nesterov,
// the current parameters for everything else.
std::vector<double> baseline_eval_point(const BaselineState& state, const BaselineConfig& config);

}  // namespace gg
