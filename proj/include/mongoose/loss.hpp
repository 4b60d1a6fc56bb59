#pragma once

#include <vector>

#include "mongoose/policy.hpp"

namespace mongoose {

enum class LossForm { Divide, Add };

struct LossOptions {
  LossForm form = LossForm::Divide;
  double alpha = 0.0;
  CostNorm norm = CostNorm::L2;
  bool myopic_detach = false;
};

// Mean over the batch of observed improvement relative to the first chosen
// point: (1/B) sum_b (y_b(x_1) - min_{t=1..T} y_b(x_t)).
double mc_improvement(const std::vector<Trajectory>& trajectories);

// Movement cost over the index range t = 1..T-1; the x_0 -> x_1 hop is
// excluded here (evaluation accounting charges it separately).
double trajectory_cost(const Trajectory& traj, CostNorm norm);

// Divide form: improvement / (1 + alpha * mean cost);
// add form: improvement - alpha * mean cost. Larger is better in both.
double composite_loss(const std::vector<Trajectory>& trajectories,
                      const LossOptions& options);

}  // namespace mongoose
