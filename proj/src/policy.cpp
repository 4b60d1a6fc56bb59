#include "mongoose/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace mongoose {

double step_norm(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 CostNorm norm) {
  return norm == CostNorm::L2 ? (b - a).norm() : (b - a).lpNorm<1>();
}

std::vector<ParamSegment> PolicyParams::layout(int d, int H) {
  std::vector<ParamSegment> segs;
  int off = 0;
  auto add = [&](const std::string& name, int rows, int cols) {
    segs.push_back({name, off, rows, cols});
    off += rows * cols;
  };
  add("input_weights", d + 1, 4 * H);
  add("recurrent_weights", H, 4 * H);
  add("gate_biases", 4 * H, 1);
  add("decoder_weights", H, d);
  add("decoder_bias", d, 1);
  return segs;
}

PolicyParams::PolicyParams(int d, int H) : dimension(d), hidden_size(H) {
  segments_ = layout(d, H);
  int total = 0;
  for (const auto& s : segments_) total += s.size();
  flat = Eigen::VectorXd::Zero(total);
}

namespace {
const ParamSegment& seg(const std::vector<ParamSegment>& segs, int i) {
  return segs[static_cast<std::size_t>(i)];
}
}  // namespace

Eigen::Map<const Eigen::MatrixXd> PolicyParams::input_weights() const {
  const auto& s = seg(segments_, 0);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<const Eigen::MatrixXd> PolicyParams::recurrent_weights() const {
  const auto& s = seg(segments_, 1);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<const Eigen::VectorXd> PolicyParams::gate_biases() const {
  const auto& s = seg(segments_, 2);
  return {flat.data() + s.offset, s.rows};
}
Eigen::Map<const Eigen::MatrixXd> PolicyParams::decoder_weights() const {
  const auto& s = seg(segments_, 3);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<const Eigen::VectorXd> PolicyParams::decoder_bias() const {
  const auto& s = seg(segments_, 4);
  return {flat.data() + s.offset, s.rows};
}

Eigen::Map<Eigen::MatrixXd> PolicyParams::input_weights() {
  const auto& s = seg(segments_, 0);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<Eigen::MatrixXd> PolicyParams::recurrent_weights() {
  const auto& s = seg(segments_, 1);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<Eigen::VectorXd> PolicyParams::gate_biases() {
  const auto& s = seg(segments_, 2);
  return {flat.data() + s.offset, s.rows};
}
Eigen::Map<Eigen::MatrixXd> PolicyParams::decoder_weights() {
  const auto& s = seg(segments_, 3);
  return {flat.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<Eigen::VectorXd> PolicyParams::decoder_bias() {
  const auto& s = seg(segments_, 4);
  return {flat.data() + s.offset, s.rows};
}

std::pair<std::string, int> PolicyParams::locate(int flat_index) const {
  for (const auto& s : segments_) {
    if (flat_index < s.offset + s.size())
      return {s.name, flat_index - s.offset};
  }
  return {"<out-of-range>", flat_index};
}

PolicyState zero_state(int H) {
  return {Eigen::VectorXd::Zero(H), Eigen::VectorXd::Zero(H)};
}

Objective Objective::from_instance(const ObjectiveInstance& obj) {
  Objective o;
  o.dimension = obj.dimension;
  o.noise_variance = obj.noise_variance;
  o.f = [obj](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    return eval_objective(obj, x, grad);
  };
  return o;
}

PolicyParams init_params(int d, int H, RngStream& rng) {
  if (d < 1 || H < 1) throw std::invalid_argument("need d >= 1 and H >= 1");
  PolicyParams p(d, H);
  const double s = 1.0 / std::sqrt(static_cast<double>(H));
  for (int i = 0; i < p.total_size(); ++i) p.flat[i] = rng.uniform(-s, s);
  p.gate_biases().segment(H, H).setConstant(1.0);  // forget gate
  p.decoder_bias().setZero();
  return p;
}

namespace {
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

Eigen::VectorXd policy_step(const PolicyParams& params, PolicyState& state,
                            const Eigen::VectorXd& x_t, double y_t) {
  const int d = params.dimension;
  const int H = params.hidden_size;
  if (x_t.size() != d)
    throw std::invalid_argument("policy_step: dimension mismatch");
  if (!x_t.allFinite() || !std::isfinite(y_t))
    throw std::invalid_argument("policy_step: non-finite input");

  Eigen::VectorXd u(d + 1);
  u.head(d) = x_t;
  u[d] = y_t;

  Eigen::VectorXd z = params.input_weights().transpose() * u +
                      params.recurrent_weights().transpose() * state.hidden +
                      params.gate_biases();
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

  state.cell = (gf * state.cell.array() + gi * gg).matrix();
  state.hidden = (go * state.cell.array().tanh()).matrix();

  Eigen::VectorXd a =
      params.decoder_weights().transpose() * state.hidden + params.decoder_bias();
  Eigen::VectorXd x_next(d);
  for (int i = 0; i < d; ++i) x_next[i] = sigmoid(a[i]);
  return x_next;
}

Trajectory rollout(const PolicyParams& params, const Objective& obj, int T,
                   RngStream& rng, CostNorm norm) {
  if (T < 1) throw std::invalid_argument("rollout: T must be >= 1");
  const int d = params.dimension;
  Trajectory traj;
  traj.points.resize(T + 1, d);
  traj.true_values.resize(T + 1);
  traj.observed_values.resize(T + 1);
  traj.step_costs.resize(T);

  const double noise_sd = std::sqrt(obj.noise_variance);
  PolicyState state = zero_state(params.hidden_size);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int t = 0; t <= T; ++t) {
    traj.points.row(t) = x.transpose();
    traj.true_values[t] = obj.f(x, nullptr);
    traj.observed_values[t] = traj.true_values[t] + noise_sd * rng.normal();
    if (t < T) {
      Eigen::VectorXd x_next =
          policy_step(params, state, x, traj.observed_values[t]);
      traj.step_costs[t] = step_norm(x, x_next, norm);
      x = x_next;
    }
  }
  return traj;
}

Trajectory rollout(const PolicyParams& params, const ObjectiveInstance& obj,
                   int T, RngStream& rng, CostNorm norm) {
  return rollout(params, Objective::from_instance(obj), T, rng, norm);
}

}  // namespace mongoose
