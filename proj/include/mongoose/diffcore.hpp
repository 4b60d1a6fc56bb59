#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mongoose/loss.hpp"
#include "mongoose/policy.hpp"
#include "mongoose/prior.hpp"

namespace mongoose {

struct RolloutLossConfig {
  int horizon = 1;
  LossOptions loss;
  // Base seed for the per-instance observation-noise streams; instance b in
  // the batch uses the child stream (noise_seed, b).
  std::uint64_t noise_seed = 0;
  int workers = 1;
};

struct BackpropResult {
  double loss = 0.0;
  Eigen::VectorXd grad;  // same flat layout as PolicyParams
  std::vector<Trajectory> trajectories;
};

// Exact reverse-mode gradient of composite_loss through the full rollout for
// every instance in the batch, including the dependence of later improvement
// terms on earlier query locations. With loss.myopic_detach set, the running
// best in each improvement term is treated as a constant during the backward
// pass (the forward value is unchanged).
BackpropResult backprop_rollout(const PolicyParams& params,
                                const std::vector<ObjectiveInstance>& batch,
                                const RolloutLossConfig& config);

// Forward-only loss on the same noise streams; bit-identical to the loss
// reported by backprop_rollout.
double forward_loss(const PolicyParams& params,
                    const std::vector<ObjectiveInstance>& batch,
                    const RolloutLossConfig& config);

struct GradientReport {
  double max_rel_err = 0.0;
  std::string worst_segment;
  int worst_index = 0;
  int num_checked = 0;
};

// Central differences per coordinate, compared against analytic_grad with
// denominator max(|analytic|, |numeric|, 1e-8).
GradientReport finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss_fn,
    const PolicyParams& params, const Eigen::VectorXd& analytic_grad,
    const std::vector<int>& coords, double h);

}  // namespace mongoose
