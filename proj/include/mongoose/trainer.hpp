#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mongoose/diffcore.hpp"
#include "mongoose/loss.hpp"
#include "mongoose/policy.hpp"
#include "mongoose/prior.hpp"

namespace mongoose {

struct TrainConfig {
  int dimension = 2;
  int hidden_size = 128;
  int batch_size = 128;
  int steps_per_phase = 5000;
  std::vector<int> horizon_schedule;  // strictly increasing, ends at target T
  double alpha = 0.0;
  CostNorm cost_norm = CostNorm::L2;
  LossForm loss_form = LossForm::Divide;
  bool myopic_detach = false;
  bool include_bowl = true;
  double noise_variance = 0.0;
  int num_features = 100;
  double lr_initial = 1e-3;
  double lr_reduced = 1e-4;
  int lr_switch_horizon = 40;
  long total_steps = 0;  // 0 means run every phase in full
  std::uint64_t seed = 0;
  int workers = 1;
  double grad_clip = 10.0;
  double lengthscale_lo = 0.1;
  double lengthscale_hi = 0.4;
  double lengthscale_mass = 0.99;

  void validate() const;
  LossOptions loss_options() const {
    return {loss_form, alpha, cost_norm, myopic_detach};
  }
};

struct TrainMetrics {
  long step = 0;
  int horizon = 0;
  double loss = 0.0;
  double mean_improvement = 0.0;
  double mean_cost = 0.0;
  double grad_norm = 0.0;
  double wall_time = 0.0;  // seconds for this step
};

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam minimisation step with bias correction; the trainer passes
// the negated composite-loss gradient since it maximises.
void adam_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                 AdamState& state, double lr);

// One fresh training instance: lengthscale draw -> Fourier features ->
// optional quadratic bowl, all from the given stream.
ObjectiveInstance sample_training_instance(const LengthscalePrior& prior,
                                           const TrainConfig& config,
                                           RngStream& rng);

struct TrainResult {
  PolicyParams params;
  AdamState adam;
  std::vector<TrainMetrics> metrics;
  bool aborted = false;
  std::string abort_reason;
  long steps_completed = 0;
};

using MetricsCallback = std::function<void(const TrainMetrics&)>;
using PhaseCallback =
    std::function<void(const PolicyParams&, const AdamState&, int horizon,
                       long step)>;

// Curriculum meta-training: for each horizon in the schedule, steps_per_phase
// optimisation steps, each on a fresh batch of sampled instances. The
// learning rate drops to lr_reduced once the phase horizon reaches
// lr_switch_horizon. A non-finite loss aborts with the last good parameters.
TrainResult curriculum_train(const TrainConfig& config,
                             const MetricsCallback& on_step = {},
                             const PhaseCallback& on_phase_end = {});

// Resume variant: continues from existing parameters and optimiser state at
// the given global step index.
TrainResult curriculum_train(const TrainConfig& config, PolicyParams params,
                             AdamState adam, long start_step,
                             const MetricsCallback& on_step = {},
                             const PhaseCallback& on_phase_end = {});

}  // namespace mongoose
