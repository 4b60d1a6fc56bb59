#include "mongoose/prior.hpp"

#include <boost/math/distributions/inverse_gamma.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mongoose {

double inverse_gamma_quantile(double shape, double scale, double p) {
  boost::math::inverse_gamma_distribution<double> dist(shape, scale);
  return boost::math::quantile(dist, p);
}

LengthscalePrior fit_inverse_gamma(double lo, double hi, double mass) {
  if (!(0.0 < lo && lo < hi)) throw std::invalid_argument("need 0 < lo < hi");
  if (!(0.0 < mass && mass < 1.0))
    throw std::invalid_argument("need 0 < mass < 1");

  const double p_lo = 0.5 * (1.0 - mass);
  const double p_hi = 1.0 - p_lo;
  const double target_ratio = hi / lo;

  // Quantiles scale linearly in the scale parameter, so the quantile ratio
  // depends on shape alone; bisect on shape, then read off the scale.
  auto ratio = [&](double shape) {
    return inverse_gamma_quantile(shape, 1.0, p_hi) /
           inverse_gamma_quantile(shape, 1.0, p_lo);
  };

  double a_lo = 1e-2, a_hi = 1e3;
  if (!(ratio(a_lo) > target_ratio && ratio(a_hi) < target_ratio))
    throw std::runtime_error("fit_inverse_gamma: bracket failure");

  const int max_iter = 200;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (ratio(mid) > target_ratio)
      a_lo = mid;
    else
      a_hi = mid;
  }
  const double shape = 0.5 * (a_lo + a_hi);
  const double scale = lo / inverse_gamma_quantile(shape, 1.0, p_lo);

  const double r_lo = inverse_gamma_quantile(shape, scale, p_lo) - lo;
  const double r_hi = inverse_gamma_quantile(shape, scale, p_hi) - hi;
  if (std::abs(r_lo) > 1e-6 || std::abs(r_hi) > 1e-6) {
    std::ostringstream msg;
    msg << "fit_inverse_gamma did not converge: residuals (" << r_lo << ", "
        << r_hi << ") for interval [" << lo << ", " << hi << "] mass " << mass;
    throw std::runtime_error(msg.str());
  }
  return LengthscalePrior{shape, scale, lo, hi, mass};
}

KernelSpec sample_kernel_spec(const LengthscalePrior& prior, int d,
                              RngStream& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  KernelSpec spec;
  spec.family = KernelFamily::Matern52;
  spec.lengthscales.resize(d);
  for (int i = 0; i < d; ++i)
    spec.lengthscales[i] = rng.inverse_gamma(prior.shape, prior.scale);
  spec.variance = 1.0;
  return spec;
}

FourierSample sample_fourier_features(const KernelSpec& kernel, int M,
                                      RngStream& rng) {
  if (M < 1) throw std::invalid_argument("num_features must be >= 1");
  const int d = static_cast<int>(kernel.lengthscales.size());
  FourierSample fs;
  fs.num_features = M;
  fs.frequencies.resize(M, d);
  fs.phases.resize(M);
  fs.weights.resize(M);
  // Matern 5/2 spectral measure: per feature one chi^2_5 draw shared across
  // dimensions (a multivariate-t frequency), scaled per dimension by 1/ell.
  for (int m = 0; m < M; ++m) {
    double u = 0.0;
    do {
      u = rng.chi_squared(5.0);
    } while (u == 0.0);
    const double t_scale = std::sqrt(5.0 / u);
    for (int j = 0; j < d; ++j)
      fs.frequencies(m, j) = rng.normal() * t_scale / kernel.lengthscales[j];
    fs.phases[m] = rng.uniform(0.0, 2.0 * M_PI);
    fs.weights[m] = rng.normal();
  }
  fs.amplitude = std::sqrt(2.0 * kernel.variance / static_cast<double>(M));
  return fs;
}

QuadraticBowl sample_quadratic_bowl(int d, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  // Wishart(I/d, d) by Bartlett: W = (1/d) A A^T with A lower triangular,
  // sqrt(chi^2) diagonal and standard-normal subdiagonal.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(rng.chi_squared(static_cast<double>(d - i)));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  QuadraticBowl bowl;
  bowl.W = (A * A.transpose()) / static_cast<double>(d);
  bowl.W = 0.5 * (bowl.W + bowl.W.transpose().eval());  // kill rounding skew
  bowl.center.resize(d);
  for (int i = 0; i < d; ++i) bowl.center[i] = rng.uniform(0.2, 0.8);
  bowl.offset = bowl.W.sum() / (8.0 * static_cast<double>(d));
  return bowl;
}

double eval_objective(const ObjectiveInstance& obj, const Eigen::VectorXd& x,
                      Eigen::VectorXd* grad) {
  const int d = obj.dimension;
  if (x.size() != d)
    throw std::invalid_argument("eval_objective: x has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(d));
  const FourierSample& fs = obj.fourier;
  Eigen::ArrayXd phase = (fs.frequencies * x + fs.phases).array();
  double value = fs.amplitude * (fs.weights.array() * phase.cos()).sum();
  if (grad) {
    Eigen::VectorXd wsin = (fs.weights.array() * phase.sin()).matrix();
    *grad = -fs.amplitude * (fs.frequencies.transpose() * wsin);
  }
  if (obj.bowl) {
    const QuadraticBowl& b = *obj.bowl;
    Eigen::VectorXd r = x - b.center;
    Eigen::VectorXd Wr = b.W * r;
    value += r.dot(Wr) / static_cast<double>(d) + b.offset;
    if (grad) *grad += (2.0 / static_cast<double>(d)) * Wr;
  }
  return value;
}

double observe_noisy(const ObjectiveInstance& obj, const Eigen::VectorXd& x,
                     RngStream& rng) {
  return eval_objective(obj, x) + std::sqrt(obj.noise_variance) * rng.normal();
}

double matern52(const KernelSpec& kernel, const Eigen::VectorXd& a,
                const Eigen::VectorXd& b) {
  double r2 = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double u = (a[i] - b[i]) / kernel.lengthscales[i];
    r2 += u * u;
  }
  const double s = std::sqrt(5.0 * r2);
  return kernel.variance * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
}

}  // namespace mongoose
