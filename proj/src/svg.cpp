#include "mongoose/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mongoose {

namespace {

// viridis-like three-stop ramp
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  double rgb[3];
  if (t < 0.5) {
    const double u = t * 2.0;
    for (int i = 0; i < 3; ++i)
      rgb[i] = stops[0][i] + u * (stops[1][i] - stops[0][i]);
  } else {
    const double u = (t - 0.5) * 2.0;
    for (int i = 0; i < 3; ++i)
      rgb[i] = stops[1][i] + u * (stops[2][i] - stops[1][i]);
  }
  std::ostringstream os;
  os << "rgb(" << static_cast<int>(rgb[0]) << "," << static_cast<int>(rgb[1])
     << "," << static_cast<int>(rgb[2]) << ")";
  return os.str();
}

void heatmap_cells(std::ostringstream& os, const Eigen::MatrixXd& values,
                   int pixels) {
  const int n = static_cast<int>(values.rows());
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  const double cell = static_cast<double>(pixels) / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double t = (values(i, j) - lo) / span;
      os << "<rect x='" << i * cell << "' y='" << (n - 1 - j) * cell
         << "' width='" << cell + 0.5 << "' height='" << cell + 0.5
         << "' fill='" << ramp_color(t) << "'/>\n";
    }
  }
}

}  // namespace

std::string svg_heatmap(const Eigen::MatrixXd& values, int pixels) {
  if (values.rows() != values.cols() || values.rows() < 2)
    throw std::invalid_argument("svg_heatmap: need a square grid");
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << pixels
     << "' height='" << pixels << "'>\n";
  heatmap_cells(os, values, pixels);
  os << "</svg>\n";
  return os.str();
}

std::string svg_trajectory(const Eigen::MatrixXd& values,
                           const Eigen::MatrixXd& points, int pixels) {
  if (points.cols() != 2)
    throw std::invalid_argument("svg_trajectory: points must be 2-d");
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << pixels
     << "' height='" << pixels << "'>\n";
  if (values.size() > 0) heatmap_cells(os, values, pixels);
  os << "<polyline fill='none' stroke='white' stroke-width='2' points='";
  for (int t = 0; t < points.rows(); ++t)
    os << points(t, 0) * pixels << "," << (1.0 - points(t, 1)) * pixels << " ";
  os << "'/>\n";
  const int T = static_cast<int>(points.rows()) - 1;
  for (int t = 0; t < points.rows(); ++t) {
    // early points orange, late points yellow
    const double u = T > 0 ? static_cast<double>(t) / T : 0.0;
    os << "<circle cx='" << points(t, 0) * pixels << "' cy='"
       << (1.0 - points(t, 1)) * pixels << "' r='4' fill='rgb(255,"
       << static_cast<int>(140 + 100 * u) << ",0)'/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_regret_cost(const std::vector<ActorSummary>& actors,
                            int width, int height) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  double cost_max = 0.0;
  double regret_max = 0.0;
  double regret_min = std::numeric_limits<double>::infinity();
  for (const auto& a : actors) {
    for (const auto& p : a.cum_cost) cost_max = std::max(cost_max, p.mean);
    for (const auto& p : a.regret) {
      regret_max = std::max(regret_max, p.mean);
      regret_min = std::min(regret_min, p.mean);
    }
  }
  if (cost_max <= 0.0) cost_max = 1.0;
  const double rspan = regret_max > regret_min ? regret_max - regret_min : 1.0;
  const int margin = 40;
  auto px = [&](double c) {
    return margin + c / cost_max * (width - 2 * margin);
  };
  auto py = [&](double r) {
    return height - margin -
           (r - regret_min) / rspan * (height - 2 * margin);
  };

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
     << "' height='" << height << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
     << width - margin << "' y2='" << height - margin
     << "' stroke='black'/>\n";
  os << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin
     << "' y2='" << height - margin << "' stroke='black'/>\n";
  int color = 0;
  for (const auto& a : actors) {
    const char* stroke = palette[color % 6];
    ++color;
    os << "<polyline fill='none' stroke='" << stroke
       << "' stroke-width='2' points='";
    for (std::size_t t = 0; t < a.regret.size(); ++t)
      os << px(a.cum_cost[t].mean) << "," << py(a.regret[t].mean) << " ";
    os << "'/>\n";
    os << "<text x='" << width - margin - 120 << "' y='"
       << margin + 16 * color << "' fill='" << stroke << "'>" << a.actor
       << "</text>\n";
  }
  os << "<text x='" << width / 2 << "' y='" << height - 8
     << "'>cumulative cost</text>\n";
  os << "<text x='8' y='" << margin - 12 << "'>regret</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace mongoose
