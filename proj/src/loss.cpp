#include "mongoose/loss.hpp"

#include <stdexcept>

namespace mongoose {

double mc_improvement(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty())
    throw std::invalid_argument("mc_improvement: empty batch");
  const int T = trajectories.front().horizon();
  double total = 0.0;
  for (const Trajectory& traj : trajectories) {
    if (traj.horizon() != T)
      throw std::invalid_argument("mc_improvement: unequal horizons");
    double best = traj.observed_values[1];
    for (int t = 2; t <= T; ++t)
      if (traj.observed_values[t] < best) best = traj.observed_values[t];
    total += traj.observed_values[1] - best;
  }
  return total / static_cast<double>(trajectories.size());
}

double trajectory_cost(const Trajectory& traj, CostNorm norm) {
  const int T = traj.horizon();
  double total = 0.0;
  for (int t = 1; t < T; ++t)
    total += step_norm(traj.points.row(t), traj.points.row(t + 1), norm);
  return total;
}

double composite_loss(const std::vector<Trajectory>& trajectories,
                      const LossOptions& options) {
  const double improvement = mc_improvement(trajectories);
  double mean_cost = 0.0;
  for (const Trajectory& traj : trajectories)
    mean_cost += trajectory_cost(traj, options.norm);
  mean_cost /= static_cast<double>(trajectories.size());
  if (options.form == LossForm::Divide)
    return improvement / (1.0 + options.alpha * mean_cost);
  return improvement - options.alpha * mean_cost;
}

}  // namespace mongoose
