#include "gg/baselines.hpp"

#include <cmath>

#include "gg/error.hpp"

namespace gg {

std::string baseline_method_name(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kSgd: return "sgd";
    case BaselineMethod::kNesterov: return "nesterov";
    case BaselineMethod::kAdam: return "adam";
    case BaselineMethod::kRmsprop: return "rmsprop";
    case BaselineMethod::kLbfgs: return "lbfgs";
  }
  throw DimensionError("unknown baseline method");
}

BaselineMethod baseline_method_from_name(const std::string& name) {
  if (name == "sgd") return BaselineMethod::kSgd;
  if (name == "nesterov") return BaselineMethod::kNesterov;
  if (name == "adam") return BaselineMethod::kAdam;
  if (name == "rmsprop") return BaselineMethod::kRmsprop;
  if (name == "lbfgs") return BaselineMethod::kLbfgs;
  throw DimensionError("unknown baseline method '" + name + "'");
}

void BaselineConfig::validate() const {
  if (!(lr > 0.0)) throw DimensionError("BaselineConfig: lr must be positive");
  auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
  if (!in_unit(momentum) || !in_unit(beta1) || !in_unit(beta2) || !in_unit(rho)) {
    throw DimensionError("BaselineConfig: decay parameters must lie in [0, 1)");
  }
  if (!(eps_stabilizer > 0.0)) {
    throw DimensionError("BaselineConfig: eps_stabilizer must be positive");
  }
  if (history == 0) throw DimensionError("BaselineConfig: lbfgs history must be >= 1");
}

namespace {

void require_grad_shape(const BaselineState& state, std::span<const double> grad) {
  if (grad.size() != state.params.size()) {
    throw DimensionError("baseline step: gradient length " + std::to_string(grad.size()) +
                         " does not match parameter length " +
                         std::to_string(state.params.size()));
  }
}

}  // namespace

BaselineState make_baseline_state(std::vector<double> init_params,
                                  const BaselineConfig& config) {
  config.validate();
  if (init_params.empty()) throw DimensionError("make_baseline_state: empty parameters");
  BaselineState state;
  const std::size_t d = init_params.size();
  state.params = std::move(init_params);
  switch (config.method) {
    case BaselineMethod::kNesterov:
      state.velocity.assign(d, 0.0);
      break;
    case BaselineMethod::kAdam:
      state.first_moment.assign(d, 0.0);
      state.second_moment.assign(d, 0.0);
      break;
    case BaselineMethod::kRmsprop:
      state.second_moment.assign(d, 0.0);
      break;
    default:
      break;
  }
  return state;
}

BaselineState step_sgd(BaselineState state, std::span<const double> grad,
                       const BaselineConfig& config) {
  require_grad_shape(state, grad);
  for (std::size_t i = 0; i < state.params.size(); ++i) {
    state.params[i] -= config.lr * grad[i];
  }
  state.step_count += 1;
  return state;
}

BaselineState step_nesterov(BaselineState state, std::span<const double> grad_at_lookahead,
                            const BaselineConfig& config) {
  require_grad_shape(state, grad_at_lookahead);
  for (std::size_t i = 0; i < state.params.size(); ++i) {
    state.velocity[i] = config.momentum * state.velocity[i] - config.lr * grad_at_lookahead[i];
    state.params[i] += state.velocity[i];
  }
  state.step_count += 1;
  return state;
}

BaselineState step_adam(BaselineState state, std::span<const double> grad,
                        const BaselineConfig& config) {
  require_grad_shape(state, grad);
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < state.params.size(); ++i) {
    state.first_moment[i] = config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * grad[i];
    state.second_moment[i] =
        config.beta2 * state.second_moment[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    double mhat = state.first_moment[i] / correction1;
    double vhat = state.second_moment[i] / correction2;
    state.params[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps_stabilizer);
  }
  return state;
}

BaselineState step_rmsprop(BaselineState state, std::span<const double> grad,
                           const BaselineConfig& config) {
  require_grad_shape(state, grad);
  for (std::size_t i = 0; i < state.params.size(); ++i) {
    state.second_moment[i] =
        config.rho * state.second_moment[i] + (1.0 - config.rho) * grad[i] * grad[i];
    state.params[i] -= config.lr * grad[i] / (std::sqrt(state.second_moment[i]) +
                                              config.eps_stabilizer);
  }
  state.step_count += 1;
  return state;
}

BaselineState step_lbfgs(BaselineState state, std::span<const double> grad,
                         const BaselineConfig& config) {
  require_grad_shape(state, grad);
  const std::size_t d = state.params.size();

  // Fold the newest displacement pair into the history (curvature guard).
  if (state.has_prev) {
    CurvaturePair pair;
    pair.s.resize(d);
    pair.y.resize(d);
    double sy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      pair.s[i] = state.params[i] - state.prev_params[i];
      pair.y[i] = grad[i] - state.prev_grad[i];
      sy += pair.s[i] * pair.y[i];
    }
    if (sy > 1e-10) {
      pair.rho = 1.0 / sy;
      state.lbfgs_history.push_back(std::move(pair));
      while (state.lbfgs_history.size() > config.history) {
        state.lbfgs_history.pop_front();
      }
    }
  }

  // Two-loop recursion: r = H * grad, H seeded with gamma * I.
  std::vector<double> q(grad.begin(), grad.end());
  std::vector<double> alpha(state.lbfgs_history.size());
  for (std::size_t k = state.lbfgs_history.size(); k-- > 0;) {
    const CurvaturePair& pair = state.lbfgs_history[k];
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += pair.s[i] * q[i];
    alpha[k] = pair.rho * dot;
    for (std::size_t i = 0; i < d; ++i) q[i] -= alpha[k] * pair.y[i];
  }
  if (!state.lbfgs_history.empty()) {
    const CurvaturePair& last = state.lbfgs_history.back();
    double sy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      sy += last.s[i] * last.y[i];
      yy += last.y[i] * last.y[i];
    }
    double gamma = yy > 0.0 ? sy / yy : 1.0;
    for (double& x : q) x *= gamma;
  }
  for (std::size_t k = 0; k < state.lbfgs_history.size(); ++k) {
    const CurvaturePair& pair = state.lbfgs_history[k];
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += pair.y[i] * q[i];
    double beta = pair.rho * dot;
    for (std::size_t i = 0; i < d; ++i) q[i] += pair.s[i] * (alpha[k] - beta);
  }

  state.prev_params = state.params;
  state.prev_grad.assign(grad.begin(), grad.end());
  state.has_prev = true;

  for (std::size_t i = 0; i < d; ++i) {
    state.params[i] -= config.lr * q[i];
  }
  state.step_count += 1;
  return state;
}

BaselineState baseline_step(BaselineState state, std::span<const double> grad,
                            const BaselineConfig& config) {
  switch (config.method) {
    case BaselineMethod::kSgd: return step_sgd(std::move(state), grad, config);
    case BaselineMethod::kNesterov: return step_nesterov(std::move(state), grad, config);
    case BaselineMethod::kAdam: return step_adam(std::move(state), grad, config);
    case BaselineMethod::kRmsprop: return step_rmsprop(std::move(state), grad, config);
    case BaselineMethod::kLbfgs: return step_lbfgs(std::move(state), grad, config);
  }
  throw DimensionError("unknown baseline method");
}

std::vector<double> baseline_eval_point(const BaselineState& state,
                                        const BaselineConfig& config) {
  if (config.method != BaselineMethod::kNesterov) return state.params;
  std::vector<double> point(state.params.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    point[i] = state.params[i] + config.momentum * state.velocity[i];
  }
  return point;
}

}  // namespace gg
