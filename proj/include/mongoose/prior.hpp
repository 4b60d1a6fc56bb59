#pragma once

#include <Eigen/Core>
#include <optional>

#include "mongoose/rng.hpp"

namespace mongoose {

enum class KernelFamily { Matern52 };

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  Eigen::VectorXd lengthscales;  // per input dimension, fraction of unit cube
  double variance = 1.0;
};

// Inverse-Gamma lengthscale prior, parameterised so that the central `mass`
// probability interval is [lo, hi].
struct LengthscalePrior {
  double shape = 0.0;
  double scale = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

// Truncated spectral expansion of a GP sample:
//   f(x) = amplitude * sum_m weights[m] * cos(frequencies.row(m) . x + phases[m])
struct FourierSample {
  int num_features = 0;
  Eigen::MatrixXd frequencies;  // M x d
  Eigen::VectorXd phases;       // in [0, 2pi)
  Eigen::VectorXd weights;      // standard normal draws
  double amplitude = 0.0;       // sqrt(2 * variance / M)
};

// Convex quadratic (1/d)(x - center)^T W (x - center) + offset,
// offset = (1/(8d)) * sum_ij W_ij.
struct QuadraticBowl {
  Eigen::MatrixXd W;
  Eigen::VectorXd center;
  double offset = 0.0;
};

struct ObjectiveInstance {
  FourierSample fourier;
  std::optional<QuadraticBowl> bowl;
  double noise_variance = 0.0;
  int dimension = 0;
};

// Solves (shape, scale) so the inverse-Gamma quantiles at (1-mass)/2 and
// 1-(1-mass)/2 equal lo and hi. Throws std::runtime_error with the residuals
// if root finding does not converge.
LengthscalePrior fit_inverse_gamma(double lo, double hi, double mass);

// Inverse-Gamma quantile (smallest x with CDF >= p).
double inverse_gamma_quantile(double shape, double scale, double p);

KernelSpec sample_kernel_spec(const LengthscalePrior& prior, int d,
                              RngStream& rng);

FourierSample sample_fourier_features(const KernelSpec& kernel, int M,
                                      RngStream& rng);

QuadraticBowl sample_quadratic_bowl(int d, RngStream& rng);

// Noiseless value; if grad is non-null it receives the exact analytic
// derivative. Throws on dimension mismatch.
double eval_objective(const ObjectiveInstance& obj, const Eigen::VectorXd& x,
                      Eigen::VectorXd* grad = nullptr);

double observe_noisy(const ObjectiveInstance& obj, const Eigen::VectorXd& x,
                     RngStream& rng);

// Matern 5/2 covariance with ARD lengthscales.
double matern52(const KernelSpec& kernel, const Eigen::VectorXd& a,
                const Eigen::VectorXd& b);

}  // namespace mongoose
