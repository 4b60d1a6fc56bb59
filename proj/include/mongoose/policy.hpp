#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "mongoose/prior.hpp"
#include "mongoose/rng.hpp"

namespace mongoose {

enum class CostNorm { L1, L2 };

double step_norm(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                 CostNorm norm);

struct ParamSegment {
  std::string name;
  int offset = 0;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  int size() const { return rows * cols; }
};

// All learnable weights of the LSTM cell and sigmoid decoder, stored flat so
// checkpoints and gradients share one layout. Gate order within the 4H axis
// is [input, forget, cell, output].
struct PolicyParams {
  int dimension = 0;
  int hidden_size = 0;
  Eigen::VectorXd flat;

  PolicyParams() = default;
  PolicyParams(int d, int H);

  static std::vector<ParamSegment> layout(int d, int H);
  const std::vector<ParamSegment>& segments() const { return segments_; }
  int total_size() const { return static_cast<int>(flat.size()); }

  Eigen::Map<const Eigen::MatrixXd> input_weights() const;     // (d+1) x 4H
  Eigen::Map<const Eigen::MatrixXd> recurrent_weights() const; // H x 4H
  Eigen::Map<const Eigen::VectorXd> gate_biases() const;       // 4H
  Eigen::Map<const Eigen::MatrixXd> decoder_weights() const;   // H x d
  Eigen::Map<const Eigen::VectorXd> decoder_bias() const;      // d

  Eigen::Map<Eigen::MatrixXd> input_weights();
  Eigen::Map<Eigen::MatrixXd> recurrent_weights();
  Eigen::Map<Eigen::VectorXd> gate_biases();
  Eigen::Map<Eigen::MatrixXd> decoder_weights();
  Eigen::Map<Eigen::VectorXd> decoder_bias();

  // Segment name + local index for a flat coordinate.
  std::pair<std::string, int> locate(int flat_index) const;

 private:
  std::vector<ParamSegment> segments_;
};

struct PolicyState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
};

PolicyState zero_state(int H);

struct Trajectory {
  Eigen::MatrixXd points;          // (T+1) x d, row 0 is the origin
  Eigen::VectorXd true_values;     // T+1
  Eigen::VectorXd observed_values; // T+1
  Eigen::VectorXd step_costs;      // T, norm of successive differences
  int horizon() const { return static_cast<int>(step_costs.size()); }
};

// Any evaluable objective on [0,1]^d: value plus optional analytic gradient.
struct Objective {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> f;
  double noise_variance = 0.0;

  static Objective from_instance(const ObjectiveInstance& obj);
};

// Weights ~ U(-s, s) with s = 1/sqrt(H); forget-gate bias +1; decoder bias 0.
PolicyParams init_params(int d, int H, RngStream& rng);

// One LSTM cell update on input (x_t, y_t) followed by the sigmoid decoder.
// Returns the next query, strictly inside (0,1)^d. Throws on non-finite
// input.
Eigen::VectorXd policy_step(const PolicyParams& params, PolicyState& state,
                            const Eigen::VectorXd& x_t, double y_t);

Trajectory rollout(const PolicyParams& params, const Objective& obj, int T,
                   RngStream& rng, CostNorm norm = CostNorm::L2);

Trajectory rollout(const PolicyParams& params, const ObjectiveInstance& obj,
                   int T, RngStream& rng, CostNorm norm = CostNorm::L2);

}  // namespace mongoose
