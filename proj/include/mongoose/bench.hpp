#pragma once

#include <map>
#include <string>
#include <vector>

#include "mongoose/gp.hpp"
#include "mongoose/policy.hpp"
#include "mongoose/rng.hpp"

namespace mongoose {

// Analytic benchmark on [0,1]^d (affine-mapped from the native domain),
// standardised as raw/max * 6 - 3 + f_opt with max estimated by random
// search and f_opt ~ U[0,1].
struct BenchmarkFn {
  std::string name;
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> raw;  // min 0 except branin
  double raw_min = 0.0;
  double max_estimate = 0.0;
  double f_opt = 0.0;

  double normalized(const Eigen::VectorXd& x) const {
    return raw(x) / max_estimate * 6.0 - 3.0 + f_opt;
  }
  double optimum() const {
    return raw_min / max_estimate * 6.0 - 3.0 + f_opt;
  }
  Objective objective(double noise_variance = 0.0) const;
};

std::vector<std::string> benchmark_registry();

// names: sphere, rastrigin, rosenbrock, ackley (any d); branin (d=2),
// hartmann3 (d=3), hartmann6 (d=6). Throws listing the registry for unknown
// names or incompatible dimensions.
BenchmarkFn make_benchmark(const std::string& name, int d, RngStream& rng,
                           int max_search_probes = 100000);

struct Actor {
  enum class Kind { Policy, Baseline } kind = Kind::Baseline;
  std::string label;
  PolicyParams params;      // Kind::Policy
  BaselineConfig baseline;  // Kind::Baseline
};

struct SeedSeries {
  std::uint64_t seed = 0;
  Eigen::VectorXd regret;    // T+1 entries, step 0 at the origin
  Eigen::VectorXd cum_cost;  // T+1 entries; includes the x_0 -> x_1 hop
  double wall_time = 0.0;    // seconds for the full run
};

struct EvalReport {
  std::string actor;
  std::string fn;
  int horizon = 0;
  std::vector<SeedSeries> seeds;
};

// Per seed: roll the actor out on the benchmark, compute simple regret from
// true (noiseless) normalised values and cumulative movement cost.
EvalReport run_eval(const Actor& actor, const BenchmarkFn& fn, int T,
                    const std::vector<std::uint64_t>& seeds,
                    double noise_variance = 0.0,
                    CostNorm norm = CostNorm::L2, int workers = 1);

struct CurvePoint {
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

struct ActorSummary {
  std::string actor;
  std::vector<CurvePoint> regret;    // per step
  std::vector<CurvePoint> cum_cost;  // per step
};

struct AggregateReport {
  int horizon = 0;
  std::vector<ActorSummary> actors;
  // matched tables: per actor, cost to first reach each regret level and
  // best regret within each cost budget (NaN where unreached)
  std::vector<double> regret_levels;
  std::vector<double> cost_budgets;
  std::map<std::string, std::vector<double>> cost_at_regret;
  std::map<std::string, std::vector<double>> regret_at_cost;
};

AggregateReport aggregate_report(const std::vector<EvalReport>& reports);

// Linear-interpolation percentile of a sample (numpy convention).
double percentile(std::vector<double> values, double p);

}  // namespace mongoose
