#include "mongoose/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mongoose {

namespace {

Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel,
                              const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = kernel.variance;
    for (int j = 0; j < i; ++j) {
      const double k = matern52(kernel, X.row(i), X.row(j));
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

constexpr double kNormConst = 0.3989422804014327;  // 1/sqrt(2*pi)

double norm_pdf(double z) { return kNormConst * std::exp(-0.5 * z * z); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Golden-section maximisation of a 1-d function on [lo, hi].
double golden_max(const std::function<double(double)>& fn, double lo,
                  double hi, int iterations, double* best_val = nullptr) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  const double x = fc > fd ? c : d;
  if (best_val) *best_val = fc > fd ? fc : fd;
  return x;
}

}  // namespace

GpModel gp_fit(const KernelSpec& kernel, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets, double noise_variance) {
  const int n = static_cast<int>(inputs.rows());
  if (n < 1) throw std::invalid_argument("gp_fit: need at least one point");
  if (targets.size() != n)
    throw std::invalid_argument("gp_fit: inputs/targets size mismatch");

  GpModel model;
  model.kernel = kernel;
  model.inputs = inputs;
  model.targets = targets;
  model.target_mean = targets.mean();
  model.noise_variance = noise_variance;

  Eigen::MatrixXd K = kernel_matrix(kernel, inputs);
  for (double jitter = 1e-8; jitter <= 1e-4 * 1.0001; jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      model.jitter = jitter;
      model.chol = llt.matrixL();
      Eigen::VectorXd centred =
          targets.array() - model.target_mean;
      model.alpha_vec = llt.solve(centred);
      return model;
    }
  }
  throw std::runtime_error("gp_fit: Cholesky failed at maximum jitter 1e-4");
}

std::pair<double, double> gp_posterior(const GpModel& model,
                                       const Eigen::VectorXd& x) {
  const int n = static_cast<int>(model.inputs.rows());
  Eigen::VectorXd k_star(n);
  for (int i = 0; i < n; ++i)
    k_star[i] = matern52(model.kernel, model.inputs.row(i), x);
  const double mean = model.target_mean + k_star.dot(model.alpha_vec);
  Eigen::VectorXd v =
      model.chol.triangularView<Eigen::Lower>().solve(k_star);
  const double var = model.kernel.variance - v.squaredNorm();
  return {mean, std::max(var, 0.0)};
}

double ei_acquisition(const GpModel& model, const Eigen::VectorXd& x,
                      double best_y) {
  const auto [mean, var] = gp_posterior(model, x);
  const double sd = std::sqrt(var);
  const double gap = best_y - mean;
  if (sd < 1e-12) return std::max(gap, 0.0);
  const double z = gap / sd;
  return gap * norm_cdf(z) + sd * norm_pdf(z);
}

double eipu_acquisition(const GpModel& model, const Eigen::VectorXd& x_current,
                        const Eigen::VectorXd& x, double best_y, double gamma,
                        CostNorm norm) {
  if (gamma <= 0.0) throw std::invalid_argument("eipu: gamma must be > 0");
  return ei_acquisition(model, x, best_y) /
         (gamma + step_norm(x_current, x, norm));
}

Eigen::MatrixXd low_discrepancy_design(int n, int d, RngStream& rng) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (d > static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    throw std::invalid_argument("low_discrepancy_design: dimension too large");
  Eigen::VectorXd shift(d);
  for (int j = 0; j < d; ++j) shift[j] = rng.uniform();
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      // radical inverse in base primes[j] of index i+1
      double value = 0.0, f = 1.0;
      int k = i + 1;
      while (k > 0) {
        f /= primes[j];
        value += f * (k % primes[j]);
        k /= primes[j];
      }
      X(i, j) = std::fmod(value + shift[j], 1.0);
    }
  }
  return X;
}

KernelSpec warm_start_mle(const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& targets,
                          double noise_variance) {
  const int n = static_cast<int>(inputs.rows());
  const int d = static_cast<int>(inputs.cols());
  const Eigen::VectorXd centred = targets.array() - targets.mean();

  // Profiled-variance log marginal likelihood on the correlation matrix.
  auto neg_half_lml = [&](const Eigen::VectorXd& log_ell) {
    KernelSpec spec;
    spec.lengthscales = log_ell.array().exp();
    spec.variance = 1.0;
    Eigen::MatrixXd R = kernel_matrix(spec, inputs);
    R.diagonal().array() += std::max(1e-8, noise_variance);
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const double quad = centred.dot(llt.solve(centred));
    if (quad <= 0.0) return -std::numeric_limits<double>::infinity();
    double log_det = 0.0;
    for (int i = 0; i < n; ++i)
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (n * std::log(quad / n) + log_det);
  };

  // Isotropic grid over lengthscale, then coordinate refinement.
  double best_log_ell = std::log(0.2);
  double best_score = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < 20; ++g) {
    const double log_ell =
        std::log(0.05) + g * (std::log(1.0) - std::log(0.05)) / 19.0;
    const double score =
        neg_half_lml(Eigen::VectorXd::Constant(d, log_ell));
    if (score > best_score) {
      best_score = score;
      best_log_ell = log_ell;
    }
  }
  Eigen::VectorXd log_ell = Eigen::VectorXd::Constant(d, best_log_ell);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int j = 0; j < d; ++j) {
      log_ell[j] = golden_max(
          [&](double v) {
            Eigen::VectorXd trial = log_ell;
            trial[j] = v;
            return neg_half_lml(trial);
          },
          std::log(0.02), std::log(2.0), 25);
    }
  }

  KernelSpec spec;
  spec.lengthscales = log_ell.array().exp();
  spec.variance = 1.0;
  Eigen::MatrixXd R = kernel_matrix(spec, inputs);
  R.diagonal().array() += std::max(1e-8, noise_variance);
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() == Eigen::Success) {
    const double quad = centred.dot(llt.solve(centred));
    if (quad > 0.0) spec.variance = quad / n;
  }
  return spec;
}

Eigen::VectorXd maximize_acquisition(
    const std::function<double(const Eigen::VectorXd&)>& acq, int d,
    int restarts, RngStream& rng) {
  Eigen::VectorXd best_x = Eigen::VectorXd::Constant(d, 0.5);
  double best_val = -std::numeric_limits<double>::infinity();
  const int line_search_budget = 100;  // golden shrink iterations per start
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    int used = 0;
    int coord = 0;
    while (used < line_search_budget) {
      const int iters = std::min(25, line_search_budget - used);
      x[coord] = golden_max(
          [&](double v) {
            Eigen::VectorXd trial = x;
            trial[coord] = v;
            return acq(trial);
          },
          0.0, 1.0, iters);
      used += iters;
      coord = (coord + 1) % d;
    }
    const double val = acq(x);
    if (val > best_val) {
      best_val = val;
      best_x = x;
    }
  }
  return best_x;
}

Trajectory run_baseline_loop(const Objective& objective, int T,
                             const BaselineConfig& config, RngStream& rng) {
  if (T < 1) throw std::invalid_argument("run_baseline_loop: T must be >= 1");
  const int d = objective.dimension;
  if (d < 1)
    throw std::invalid_argument("run_baseline_loop: objective dimension");
  const double noise_sd = std::sqrt(objective.noise_variance);

  KernelSpec kernel;
  kernel.lengthscales = Eigen::VectorXd::Constant(d, 0.2);
  kernel.variance = 1.0;
  if (config.method != BaselineMethod::Random) {
    // Warm-start design: hyperparameters only. The evaluations are not added
    // to the surrogate and the movement is not charged.
    const int n_warm = config.warm_start_per_dim * d;
    Eigen::MatrixXd Xw = low_discrepancy_design(n_warm, d, rng);
    Eigen::VectorXd yw(n_warm);
    for (int i = 0; i < n_warm; ++i)
      yw[i] = objective.f(Xw.row(i), nullptr) + noise_sd * rng.normal();
    kernel = warm_start_mle(Xw, yw, config.noise_variance);
  }

  Trajectory traj;
  traj.points.resize(T + 1, d);
  traj.true_values.resize(T + 1);
  traj.observed_values.resize(T + 1);
  traj.step_costs.resize(T);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  traj.points.row(0) = x.transpose();
  traj.true_values[0] = objective.f(x, nullptr);
  traj.observed_values[0] = traj.true_values[0] + noise_sd * rng.normal();

  const int restarts =
      config.acq_restarts > 0 ? config.acq_restarts : 64 * d;
  for (int t = 1; t <= T; ++t) {
    Eigen::VectorXd x_next(d);
    if (config.method == BaselineMethod::Random) {
      for (int j = 0; j < d; ++j) x_next[j] = rng.uniform();
    } else {
      const int n = std::min(t, config.max_points);
      const int start = t - n;
      GpModel model =
          gp_fit(kernel, traj.points.middleRows(start, n),
                 traj.observed_values.segment(start, n),
                 config.noise_variance);
      const double best_y = traj.observed_values.head(t).minCoeff();
      std::function<double(const Eigen::VectorXd&)> acq;
      if (config.method == BaselineMethod::EI) {
        acq = [&](const Eigen::VectorXd& xc) {
          return ei_acquisition(model, xc, best_y);
        };
      } else {
        const Eigen::VectorXd x_cur = x;
        acq = [&, x_cur](const Eigen::VectorXd& xc) {
          return eipu_acquisition(model, x_cur, xc, best_y, config.gamma,
                                  config.cost_norm);
        };
      }
      x_next = maximize_acquisition(acq, d, restarts, rng);
    }
    traj.points.row(t) = x_next.transpose();
    traj.true_values[t] = objective.f(x_next, nullptr);
    traj.observed_values[t] = traj.true_values[t] + noise_sd * rng.normal();
    traj.step_costs[t - 1] = step_norm(x, x_next, config.cost_norm);
    x = x_next;
  }
  return traj;
}

}  // namespace mongoose
