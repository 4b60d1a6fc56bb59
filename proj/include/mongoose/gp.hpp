#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "mongoose/policy.hpp"
#include "mongoose/prior.hpp"
#include "mongoose/rng.hpp"

namespace mongoose {

struct GpModel {
  KernelSpec kernel;
  Eigen::MatrixXd inputs;  // n x d
  Eigen::VectorXd targets;
  double target_mean = 0.0;
  double noise_variance = 0.0;
  double jitter = 0.0;           // value that made the factorisation succeed
  Eigen::MatrixXd chol;          // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_vec;     // solve of centred targets
};

enum class BaselineMethod { EI, EIpu, Random };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::EI;
  double gamma = 1.0;  // EIpu cost offset
  int warm_start_per_dim = 10;
  int acq_restarts = 0;  // 0 -> 64 * d
  double noise_variance = 0.0;
  CostNorm cost_norm = CostNorm::L2;
  int max_points = 256;
  std::uint64_t seed = 0;
};

// Exact Cholesky fit; jitter starts at 1e-8 and escalates x10 up to 1e-4
// before failing.
GpModel gp_fit(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets, double noise_variance);

// Posterior mean and variance (clamped at zero) at one point.
std::pair<double, double> gp_posterior(const GpModel& model,
                                       const Eigen::VectorXd& x);

// Expected improvement for minimisation.
double ei_acquisition(const GpModel& model, const Eigen::VectorXd& x,
                      double best_y);

double eipu_acquisition(const GpModel& model, const Eigen::VectorXd& x_current,
                        const Eigen::VectorXd& x, double best_y, double gamma,
                        CostNorm norm);

// Scrambled Halton design on [0,1]^d (Cranley-Patterson rotation).
Eigen::MatrixXd low_discrepancy_design(int n, int d, RngStream& rng);

// Maximum-marginal-likelihood lengthscales (profiled variance): isotropic
// grid search then per-coordinate golden-section refinement in log space.
KernelSpec warm_start_mle(const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& targets,
                          double noise_variance);

// Multi-start acquisition maximisation over [0,1]^d.
Eigen::VectorXd maximize_acquisition(
    const std::function<double(const Eigen::VectorXd&)>& acq, int d,
    int restarts, RngStream& rng);

// Full baseline run under the shared trajectory/cost accounting: x_0 at the
// origin, warm-start MLE on an uncharged design, then T acquisition steps.
Trajectory run_baseline_loop(const Objective& objective, int T,
                             const BaselineConfig& config, RngStream& rng);

}  // namespace mongoose
