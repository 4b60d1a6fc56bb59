#include "mongoose/diffcore.hpp"

#include <cmath>
#include <stdexcept>

#include "mongoose/parallel.hpp"

namespace mongoose {

namespace {

struct StepRecord {
  Eigen::VectorXd u;       // (d+1) input
  Eigen::ArrayXd gi, gf, gg, go;
  Eigen::VectorXd cell_prev, cell, tanh_cell, hidden_prev, hidden;
  Eigen::VectorXd x_next;  // decoder output
};

struct InstanceTape {
  Trajectory traj;
  std::vector<StepRecord> steps;        // T entries
  std::vector<Eigen::VectorXd> grad_f;  // analytic objective gradient, 0..T
};

void check_finite(const Eigen::VectorXd& v, int t, const char* tensor) {
  if (!v.allFinite())
    throw std::runtime_error("backprop_rollout: non-finite " +
                             std::string(tensor) + " at timestep " +
                             std::to_string(t));
}

InstanceTape forward_instance(const PolicyParams& params,
                              const ObjectiveInstance& obj, int T,
                              CostNorm norm, RngStream rng, bool record) {
  const int d = params.dimension;
  const int H = params.hidden_size;
  InstanceTape tape;
  tape.traj.points.resize(T + 1, d);
  tape.traj.true_values.resize(T + 1);
  tape.traj.observed_values.resize(T + 1);
  tape.traj.step_costs.resize(T);
  if (record) {
    tape.steps.resize(T);
    tape.grad_f.resize(T + 1);
  }

  const double noise_sd = std::sqrt(obj.noise_variance);
  PolicyState state = zero_state(H);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int t = 0; t <= T; ++t) {
    tape.traj.points.row(t) = x.transpose();
    tape.traj.true_values[t] =
        eval_objective(obj, x, record ? &tape.grad_f[t] : nullptr);
    tape.traj.observed_values[t] =
        tape.traj.true_values[t] + noise_sd * rng.normal();
    if (!std::isfinite(tape.traj.observed_values[t]))
      throw std::runtime_error(
          "backprop_rollout: non-finite observation at timestep " +
          std::to_string(t));
    if (t == T) break;

    // Mirrors policy_step exactly so taped and untaped rollouts agree
    // bit-for-bit.
    Eigen::VectorXd u(d + 1);
    u.head(d) = x;
    u[d] = tape.traj.observed_values[t];
    Eigen::VectorXd z = params.input_weights().transpose() * u +
                        params.recurrent_weights().transpose() * state.hidden +
                        params.gate_biases();
    check_finite(z, t, "gate preactivation");
    Eigen::ArrayXd gi = z.segment(0, H).array().unaryExpr([](double v) {
      return 1.0 / (1.0 + std::exp(-v));
    });
    Eigen::ArrayXd gf = z.segment(H, H).array().unaryExpr([](double v) {
      return 1.0 / (1.0 + std::exp(-v));
    });
    Eigen::ArrayXd gg = z.segment(2 * H, H).array().tanh();
    Eigen::ArrayXd go = z.segment(3 * H, H).array().unaryExpr([](double v) {
      return 1.0 / (1.0 + std::exp(-v));
    });

    Eigen::VectorXd cell_prev = state.cell;
    Eigen::VectorXd hidden_prev = state.hidden;
    state.cell = (gf * state.cell.array() + gi * gg).matrix();
    state.hidden = (go * state.cell.array().tanh()).matrix();
    check_finite(state.cell, t, "cell state");

    Eigen::VectorXd a = params.decoder_weights().transpose() * state.hidden +
                        params.decoder_bias();
    Eigen::VectorXd x_next(d);
    for (int i = 0; i < d; ++i) x_next[i] = 1.0 / (1.0 + std::exp(-a[i]));

    tape.traj.step_costs[t] = step_norm(x, x_next, norm);
    if (record) {
      StepRecord& rec = tape.steps[t];
      rec.u = u;
      rec.gi = gi;
      rec.gf = gf;
      rec.gg = gg;
      rec.go = go;
      rec.cell_prev = cell_prev;
      rec.cell = state.cell;
      rec.tanh_cell = state.cell.array().tanh().matrix();
      rec.hidden_prev = hidden_prev;
      rec.hidden = state.hidden;
      rec.x_next = x_next;
    }
    x = x_next;
  }
  return tape;
}

int earliest_argmin(const Eigen::VectorXd& values, int from, int to) {
  int best = from;
  for (int t = from + 1; t <= to; ++t)
    if (values[t] < values[best]) best = t;
  return best;
}

// Backward pass for one instance. weight_improvement and weight_cost are the
// derivatives of the composite loss with respect to this instance's
// improvement and trajectory-cost terms.
void backward_instance(const PolicyParams& params, const InstanceTape& tape,
                       const LossOptions& loss, double weight_improvement,
                       double weight_cost, Eigen::VectorXd& grad_out) {
  const int d = params.dimension;
  const int H = params.hidden_size;
  const int T = tape.traj.horizon();
  const Eigen::VectorXd& y = tape.traj.observed_values;

  std::vector<Eigen::VectorXd> gx(T + 1, Eigen::VectorXd::Zero(d));
  Eigen::VectorXd gy = Eigen::VectorXd::Zero(T + 1);

  // Improvement term: baseline at x_1, running minimum over t = 1..T.
  if (!loss.myopic_detach) {
    const int m = earliest_argmin(y, 1, T);
    gy[1] += weight_improvement;
    gy[m] -= weight_improvement;
  } else {
    // Cumulative-improvement form with the running best held constant:
    // each step's gradient sees only its own improvement term.
    double best = y[1];
    for (int t = 2; t <= T; ++t) {
      if (y[t] < best) {
        gy[t] -= weight_improvement;
        best = y[t];
      }
    }
  }

  // Cost terms over segments t = 1..T-1.
  for (int t = 1; t < T; ++t) {
    Eigen::VectorXd diff =
        tape.traj.points.row(t + 1) - tape.traj.points.row(t);
    Eigen::VectorXd dseg(d);
    if (loss.norm == CostNorm::L2) {
      const double n = diff.norm();
      dseg = n > 0.0 ? Eigen::VectorXd(diff / n) : Eigen::VectorXd::Zero(d);
    } else {
      for (int i = 0; i < d; ++i)
        dseg[i] = diff[i] > 0.0 ? 1.0 : (diff[i] < 0.0 ? -1.0 : 0.0);
    }
    gx[t + 1] += weight_cost * dseg;
    gx[t] -= weight_cost * dseg;
  }

  PolicyParams grad(d, H);  // zero-initialised accumulator views
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);

  for (int t = T - 1; t >= 0; --t) {
    const StepRecord& rec = tape.steps[t];
    // Total gradient w.r.t. x_{t+1}: loss terms plus the input path from the
    // later step (already folded into gx/gy), plus the observation chain.
    Eigen::VectorXd dx_next = gx[t + 1] + gy[t + 1] * tape.grad_f[t + 1];

    Eigen::VectorXd da =
        (dx_next.array() * rec.x_next.array() * (1.0 - rec.x_next.array()))
            .matrix();
    grad.decoder_weights() += rec.hidden * da.transpose();
    grad.decoder_bias() += da;

    Eigen::VectorXd dh = params.decoder_weights() * da + dh_next;
    Eigen::ArrayXd dc = dh.array() * rec.go *
                            (1.0 - rec.tanh_cell.array().square()) +
                        dc_next.array();
    Eigen::ArrayXd dzo = dh.array() * rec.tanh_cell.array() * rec.go *
                         (1.0 - rec.go);
    Eigen::ArrayXd dzf =
        dc * rec.cell_prev.array() * rec.gf * (1.0 - rec.gf);
    Eigen::ArrayXd dzi = dc * rec.gg * rec.gi * (1.0 - rec.gi);
    Eigen::ArrayXd dzg = dc * rec.gi * (1.0 - rec.gg.square());

    Eigen::VectorXd dz(4 * H);
    dz.segment(0, H) = dzi.matrix();
    dz.segment(H, H) = dzf.matrix();
    dz.segment(2 * H, H) = dzg.matrix();
    dz.segment(3 * H, H) = dzo.matrix();

    grad.input_weights() += rec.u * dz.transpose();
    grad.recurrent_weights() += rec.hidden_prev * dz.transpose();
    grad.gate_biases() += dz;

    Eigen::VectorXd du = params.input_weights() * dz;
    gx[t] += du.head(d);
    gy[t] += du[d];

    dh_next = params.recurrent_weights() * dz;
    dc_next = (dc * rec.gf).matrix();
  }
  // x_0 is the fixed origin, so gradients into gx[0]/gy[0] vanish.
  grad_out = grad.flat;
}

}  // namespace

BackpropResult backprop_rollout(const PolicyParams& params,
                                const std::vector<ObjectiveInstance>& batch,
                                const RolloutLossConfig& config) {
  if (batch.empty())
    throw std::invalid_argument("backprop_rollout: empty batch");
  if (config.horizon < 1)
    throw std::invalid_argument("backprop_rollout: horizon must be >= 1");
  const int B = static_cast<int>(batch.size());
  const int T = config.horizon;

  std::vector<InstanceTape> tapes(B);
  parallel_for(B, config.workers, [&](int b) {
    tapes[b] = forward_instance(
        params, batch[b], T, config.loss.norm,
        RngStream::child(config.noise_seed, static_cast<std::uint64_t>(b)),
        /*record=*/true);
  });

  BackpropResult result;
  result.trajectories.reserve(B);
  for (auto& tape : tapes) result.trajectories.push_back(tape.traj);
  result.loss = composite_loss(result.trajectories, config.loss);

  // Derivatives of the composite loss with respect to the per-instance
  // improvement and cost terms.
  double mean_cost = 0.0;
  for (const auto& traj : result.trajectories)
    mean_cost += trajectory_cost(traj, config.loss.norm);
  mean_cost /= static_cast<double>(B);
  const double improvement = mc_improvement(result.trajectories);

  double w_imp = 0.0, w_cost = 0.0;
  if (config.loss.form == LossForm::Divide) {
    const double denom = 1.0 + config.loss.alpha * mean_cost;
    w_imp = 1.0 / (static_cast<double>(B) * denom);
    w_cost = -config.loss.alpha * improvement /
             (static_cast<double>(B) * denom * denom);
  } else {
    w_imp = 1.0 / static_cast<double>(B);
    w_cost = -config.loss.alpha / static_cast<double>(B);
  }

  std::vector<Eigen::VectorXd> grads(B);
  parallel_for(B, config.workers, [&](int b) {
    backward_instance(params, tapes[b], config.loss, w_imp, w_cost, grads[b]);
  });

  // Fixed-order reduction: result independent of worker count.
  result.grad = Eigen::VectorXd::Zero(params.total_size());
  for (int b = 0; b < B; ++b) result.grad += grads[b];
  return result;
}

double forward_loss(const PolicyParams& params,
                    const std::vector<ObjectiveInstance>& batch,
                    const RolloutLossConfig& config) {
  const int B = static_cast<int>(batch.size());
  std::vector<Trajectory> trajectories(B);
  parallel_for(B, config.workers, [&](int b) {
    trajectories[b] =
        forward_instance(
            params, batch[b], config.horizon, config.loss.norm,
            RngStream::child(config.noise_seed, static_cast<std::uint64_t>(b)),
            /*record=*/false)
            .traj;
  });
  return composite_loss(trajectories, config.loss);
}

GradientReport finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss_fn,
    const PolicyParams& params, const Eigen::VectorXd& analytic_grad,
    const std::vector<int>& coords, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_gradient: h <= 0");
  if (coords.empty())
    throw std::invalid_argument("finite_diff_gradient: no coordinates");

  GradientReport report;
  report.num_checked = static_cast<int>(coords.size());
  for (int c : coords) {
    Eigen::VectorXd p = params.flat;
    p[c] += h;
    const double plus = loss_fn(p);
    p[c] = params.flat[c] - h;
    const double minus = loss_fn(p);
    const double numeric = (plus - minus) / (2.0 * h);
    const double analytic = analytic_grad[c];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      auto [name, idx] = params.locate(c);
      report.worst_segment = name;
      report.worst_index = idx;
    }
  }
  return report;
}

}  // namespace mongoose
