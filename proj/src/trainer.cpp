#include "mongoose/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mongoose/parallel.hpp"

namespace mongoose {

void TrainConfig::validate() const {
  if (dimension < 1 || hidden_size < 1 || batch_size < 1)
    throw std::invalid_argument("TrainConfig: dimension, hidden_size and "
                                "batch_size must be >= 1");
  if (horizon_schedule.empty())
    throw std::invalid_argument("TrainConfig: empty horizon_schedule");
  for (std::size_t i = 0; i + 1 < horizon_schedule.size(); ++i)
    if (horizon_schedule[i] >= horizon_schedule[i + 1])
      throw std::invalid_argument(
          "TrainConfig: horizon_schedule must be strictly increasing");
  if (horizon_schedule.front() < 1)
    throw std::invalid_argument("TrainConfig: horizons must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("TrainConfig: alpha < 0");
  if (steps_per_phase < 1)
    throw std::invalid_argument("TrainConfig: steps_per_phase must be >= 1");
}

void adam_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                 AdamState& state, double lr) {
  if (params.size() != grad.size())
    throw std::invalid_argument("adam_update: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.t = 0;
  }
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -= lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + state.eps);
}

ObjectiveInstance sample_training_instance(const LengthscalePrior& prior,
                                           const TrainConfig& config,
                                           RngStream& rng) {
  ObjectiveInstance obj;
  obj.dimension = config.dimension;
  obj.noise_variance = config.noise_variance;
  KernelSpec kernel = sample_kernel_spec(prior, config.dimension, rng);
  obj.fourier = sample_fourier_features(kernel, config.num_features, rng);
  if (config.include_bowl)
    obj.bowl = sample_quadratic_bowl(config.dimension, rng);
  return obj;
}

TrainResult curriculum_train(const TrainConfig& config,
                             const MetricsCallback& on_step,
                             const PhaseCallback& on_phase_end) {
  config.validate();
  RngStream init_rng = RngStream::child(config.seed, 0xFFFFFFFFULL);
  PolicyParams params =
      init_params(config.dimension, config.hidden_size, init_rng);
  return curriculum_train(config, std::move(params), AdamState{}, 0, on_step,
                          on_phase_end);
}

TrainResult curriculum_train(const TrainConfig& config, PolicyParams params,
                             AdamState adam, long start_step,
                             const MetricsCallback& on_step,
                             const PhaseCallback& on_phase_end) {
  config.validate();
  const LengthscalePrior prior = fit_inverse_gamma(
      config.lengthscale_lo, config.lengthscale_hi, config.lengthscale_mass);

  const long phase_count = static_cast<long>(config.horizon_schedule.size());
  long max_steps = phase_count * config.steps_per_phase;
  if (config.total_steps > 0)
    max_steps = std::min(max_steps, config.total_steps);

  TrainResult result;
  result.params = params;
  result.adam = adam;
  result.steps_completed = start_step;

  const int B = config.batch_size;
  for (long step = start_step; step < max_steps; ++step) {
    const long phase = std::min(step / config.steps_per_phase, phase_count - 1);
    const int horizon =
        config.horizon_schedule[static_cast<std::size_t>(phase)];
    const double lr = horizon >= config.lr_switch_horizon ? config.lr_reduced
                                                          : config.lr_initial;
    const auto t_start = std::chrono::steady_clock::now();

    const std::uint64_t step_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(step));
    std::vector<ObjectiveInstance> batch(B);
    parallel_for(B, config.workers, [&](int b) {
      RngStream rng = RngStream::child(step_seed,
                                       static_cast<std::uint64_t>(b));
      batch[b] = sample_training_instance(prior, config, rng);
    });

    RolloutLossConfig rollout_config;
    rollout_config.horizon = horizon;
    rollout_config.loss = config.loss_options();
    rollout_config.noise_seed = derive_seed(step_seed, 0xA5A5A5A5ULL);
    rollout_config.workers = config.workers;

    BackpropResult bp;
    try {
      bp = backprop_rollout(params, batch, rollout_config);
    } catch (const std::runtime_error& e) {
      result.aborted = true;
      result.abort_reason = e.what();
      return result;
    }
    if (!std::isfinite(bp.loss) || !bp.grad.allFinite()) {
      result.aborted = true;
      result.abort_reason = "non-finite loss or gradient at step " +
                            std::to_string(step);
      return result;
    }

    // Ascent direction (the composite loss is maximised), then global-norm
    // clipping at grad_clip.
    Eigen::VectorXd descent_grad = -bp.grad;
    const double gnorm = descent_grad.norm();
    if (config.grad_clip > 0.0 && gnorm > config.grad_clip)
      descent_grad *= config.grad_clip / gnorm;
    adam_update(params.flat, descent_grad, adam, lr);

    double mean_cost = 0.0;
    for (const auto& traj : bp.trajectories)
      mean_cost += trajectory_cost(traj, config.cost_norm);
    mean_cost /= static_cast<double>(B);

    TrainMetrics metrics;
    metrics.step = step;
    metrics.horizon = horizon;
    metrics.loss = bp.loss;
    metrics.mean_improvement = mc_improvement(bp.trajectories);
    metrics.mean_cost = mean_cost;
    metrics.grad_norm = gnorm;
    metrics.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    result.metrics.push_back(metrics);
    if (on_step) on_step(metrics);

    result.params = params;
    result.adam = adam;
    result.steps_completed = step + 1;

    const bool phase_end = (step + 1) % config.steps_per_phase == 0 ||
                           step + 1 == max_steps;
    if (phase_end && on_phase_end)
      on_phase_end(params, adam, horizon, step + 1);
  }
  return result;
}

}  // namespace mongoose
