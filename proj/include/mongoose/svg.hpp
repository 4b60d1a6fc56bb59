#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mongoose/bench.hpp"

namespace mongoose {

// Heat map of a grid evaluation on [0,1]^2; values is n x n with row index
// along x1.
std::string svg_heatmap(const Eigen::MatrixXd& values, int pixels = 480);

// Heat map with a trajectory overlay (points in [0,1]^2, joined in order).
std::string svg_trajectory(const Eigen::MatrixXd& values,
                           const Eigen::MatrixXd& points, int pixels = 480);

// Regret-versus-cost curves, one polyline per actor summary.
std::string svg_regret_cost(const std::vector<ActorSummary>& actors,
                            int width = 640, int height = 480);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mongoose
