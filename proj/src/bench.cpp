#include "mongoose/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mongoose/parallel.hpp"

namespace mongoose {

namespace {

double sphere_raw(const Eigen::VectorXd& u) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double x = 10.0 * u[i] - 5.0;
    s += x * x;
  }
  return s;
}

double rastrigin_raw(const Eigen::VectorXd& u) {
  double s = 10.0 * static_cast<double>(u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double x = 10.24 * u[i] - 5.12;
    s += x * x - 10.0 * std::cos(2.0 * M_PI * x);
  }
  return s;
}

double rosenbrock_raw(const Eigen::VectorXd& u) {
  double s = 0.0;
  for (int i = 0; i + 1 < u.size(); ++i) {
    const double x = 4.096 * u[i] - 2.048;
    const double x1 = 4.096 * u[i + 1] - 2.048;
    s += 100.0 * (x1 - x * x) * (x1 - x * x) + (1.0 - x) * (1.0 - x);
  }
  return s;
}

double ackley_raw(const Eigen::VectorXd& u) {
  const double d = static_cast<double>(u.size());
  double sq = 0.0, cs = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double x = 65.536 * u[i] - 32.768;
    sq += x * x;
    cs += std::cos(2.0 * M_PI * x);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) +
         20.0 + M_E;
}

double branin_raw(const Eigen::VectorXd& u) {
  const double x1 = 15.0 * u[0] - 5.0;
  const double x2 = 15.0 * u[1];
  const double a = 1.0, b = 5.1 / (4.0 * M_PI * M_PI), c = 5.0 / M_PI;
  const double r = 6.0, s = 10.0, t = 1.0 / (8.0 * M_PI);
  const double inner = x2 - b * x1 * x1 + c * x1 - r;
  return a * inner * inner + s * (1.0 - t) * std::cos(x1) + s;
}

// Hartmann families on [0,1]^d, shifted by the known minimum so raw >= 0.
double hartmann3_raw(const Eigen::VectorXd& u) {
  static const double A[4][3] = {{3.0, 10.0, 30.0},
                                 {0.1, 10.0, 35.0},
                                 {3.0, 10.0, 30.0},
                                 {0.1, 10.0, 35.0}};
  static const double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                 {0.4699, 0.4387, 0.7470},
                                 {0.1091, 0.8732, 0.5547},
                                 {0.0381, 0.5743, 0.8828}};
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j)
      e += A[i][j] * (u[j] - P[i][j]) * (u[j] - P[i][j]);
    s += alpha[i] * std::exp(-e);
  }
  return -s + 3.86278214782076;
}

double hartmann6_raw(const Eigen::VectorXd& u) {
  static const double A[4][6] = {
      {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
      {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
      {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
      {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
  static const double P[4][6] = {
      {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
      {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
      {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
      {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j)
      e += A[i][j] * (u[j] - P[i][j]) * (u[j] - P[i][j]);
    s += alpha[i] * std::exp(-e);
  }
  return -s + 3.32236801141551;
}

struct RegistryEntry {
  std::function<double(const Eigen::VectorXd&)> raw;
  int fixed_dimension;  // 0 means any d >= 1 (rosenbrock needs d >= 2)
  int min_dimension;
  double raw_min;
};

const std::map<std::string, RegistryEntry>& registry() {
  static const std::map<std::string, RegistryEntry> reg = {
      {"sphere", {sphere_raw, 0, 1, 0.0}},
      {"rastrigin", {rastrigin_raw, 0, 1, 0.0}},
      {"rosenbrock", {rosenbrock_raw, 0, 2, 0.0}},
      {"ackley", {ackley_raw, 0, 1, 0.0}},
      {"branin", {branin_raw, 2, 2, 0.39788735772973816}},
      {"hartmann3", {hartmann3_raw, 3, 3, 0.0}},
      {"hartmann6", {hartmann6_raw, 6, 6, 0.0}},
  };
  return reg;
}

}  // namespace

Objective BenchmarkFn::objective(double noise_variance) const {
  Objective o;
  o.dimension = dimension;
  o.noise_variance = noise_variance;
  const BenchmarkFn self = *this;
  o.f = [self](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (grad)
      throw std::logic_error("benchmark objectives have no analytic gradient");
    return self.normalized(x);
  };
  return o;
}

std::vector<std::string> benchmark_registry() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : registry()) names.push_back(name);
  return names;
}

BenchmarkFn make_benchmark(const std::string& name, int d, RngStream& rng,
                           int max_search_probes) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::ostringstream msg;
    msg << "unknown benchmark '" << name << "'; registry:";
    for (const auto& n : benchmark_registry()) msg << " " << n;
    throw std::invalid_argument(msg.str());
  }
  const RegistryEntry& entry = it->second;
  if (entry.fixed_dimension != 0 && d != entry.fixed_dimension)
    throw std::invalid_argument(name + " requires dimension " +
                                std::to_string(entry.fixed_dimension));
  if (d < entry.min_dimension)
    throw std::invalid_argument(name + " requires dimension >= " +
                                std::to_string(entry.min_dimension));

  BenchmarkFn fn;
  fn.name = name;
  fn.dimension = d;
  fn.raw = entry.raw;
  fn.raw_min = entry.raw_min;
  fn.f_opt = rng.uniform();

  double max_val = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd probe(d);
  for (int i = 0; i < max_search_probes; ++i) {
    for (int j = 0; j < d; ++j) probe[j] = rng.uniform();
    max_val = std::max(max_val, fn.raw(probe));
  }
  fn.max_estimate = max_val;
  return fn;
}

EvalReport run_eval(const Actor& actor, const BenchmarkFn& fn, int T,
                    const std::vector<std::uint64_t>& seeds,
                    double noise_variance, CostNorm norm, int workers) {
  if (T < 1) throw std::invalid_argument("run_eval: T must be >= 1");
  if (actor.kind == Actor::Kind::Policy &&
      actor.params.dimension != fn.dimension)
    throw std::invalid_argument(
        "run_eval: checkpoint dimension " +
        std::to_string(actor.params.dimension) + " does not match benchmark " +
        fn.name + " (d=" + std::to_string(fn.dimension) + ")");

  EvalReport report;
  report.actor = actor.label;
  report.fn = fn.name;
  report.horizon = T;
  report.seeds.resize(seeds.size());

  const double f_min = fn.optimum();
  parallel_for(static_cast<int>(seeds.size()), workers, [&](int s) {
    RngStream rng(seeds[static_cast<std::size_t>(s)]);
    const auto t_start = std::chrono::steady_clock::now();
    Trajectory traj;
    if (actor.kind == Actor::Kind::Policy) {
      traj = rollout(actor.params, fn.objective(noise_variance), T, rng, norm);
    } else {
      BaselineConfig cfg = actor.baseline;
      cfg.noise_variance = noise_variance;
      cfg.cost_norm = norm;
      traj = run_baseline_loop(fn.objective(noise_variance), T, cfg, rng);
    }
    SeedSeries& series = report.seeds[static_cast<std::size_t>(s)];
    series.seed = seeds[static_cast<std::size_t>(s)];
    series.regret.resize(T + 1);
    series.cum_cost.resize(T + 1);
    double best = traj.true_values[0];
    series.regret[0] = best - f_min;
    series.cum_cost[0] = 0.0;
    for (int t = 1; t <= T; ++t) {
      best = std::min(best, traj.true_values[t]);
      series.regret[t] = best - f_min;
      series.cum_cost[t] = series.cum_cost[t - 1] + traj.step_costs[t - 1];
    }
    series.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
  });
  return report;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

AggregateReport aggregate_report(const std::vector<EvalReport>& reports) {
  if (reports.empty())
    throw std::invalid_argument("aggregate_report: no reports");
  const int T = reports.front().horizon;
  for (const auto& r : reports)
    if (r.horizon != T)
      throw std::invalid_argument("aggregate_report: mismatched horizons");

  // Fold seed series by actor in sorted key order.
  std::map<std::string, std::vector<const SeedSeries*>> by_actor;
  for (const auto& r : reports)
    for (const auto& s : r.seeds) by_actor[r.actor].push_back(&s);

  AggregateReport agg;
  agg.horizon = T;

  double regret_max = -std::numeric_limits<double>::infinity();
  double regret_min = std::numeric_limits<double>::infinity();
  double cost_max = 0.0;
  for (const auto& [actor, series] : by_actor) {
    ActorSummary summary;
    summary.actor = actor;
    summary.regret.resize(T + 1);
    summary.cum_cost.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
      std::vector<double> rv, cv;
      for (const SeedSeries* s : series) {
        rv.push_back(s->regret[t]);
        cv.push_back(s->cum_cost[t]);
      }
      double rmean = 0.0, cmean = 0.0;
      for (double v : rv) rmean += v;
      for (double v : cv) cmean += v;
      rmean /= static_cast<double>(rv.size());
      cmean /= static_cast<double>(cv.size());
      summary.regret[t] = {rmean, percentile(rv, 5.0), percentile(rv, 95.0)};
      summary.cum_cost[t] = {cmean, percentile(cv, 5.0), percentile(cv, 95.0)};
      regret_max = std::max(regret_max, rmean);
      regret_min = std::min(regret_min, rmean);
      cost_max = std::max(cost_max, cmean);
    }
    agg.actors.push_back(std::move(summary));
  }

  const int levels = 8;
  for (int i = 0; i < levels; ++i) {
    agg.regret_levels.push_back(
        regret_min + (regret_max - regret_min) *
                         static_cast<double>(levels - 1 - i) /
                         static_cast<double>(levels - 1));
    agg.cost_budgets.push_back(cost_max * static_cast<double>(i + 1) /
                               static_cast<double>(levels));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [actor, series] : by_actor) {
    std::vector<double> cost_at(levels, nan), regret_at(levels, nan);
    for (int i = 0; i < levels; ++i) {
      // Mean over seeds of the cost at which the regret level is first
      // reached; NaN when no seed reaches it.
      double total = 0.0;
      int reached = 0;
      for (const SeedSeries* s : series) {
        for (int t = 0; t <= T; ++t) {
          if (s->regret[t] <= agg.regret_levels[static_cast<std::size_t>(i)]) {
            total += s->cum_cost[t];
            ++reached;
            break;
          }
        }
      }
      if (reached > 0) cost_at[static_cast<std::size_t>(i)] = total / reached;

      // Mean best regret attained within the cost budget.
      double rtotal = 0.0;
      int rcount = 0;
      for (const SeedSeries* s : series) {
        double best = std::numeric_limits<double>::infinity();
        for (int t = 0; t <= T; ++t) {
          if (s->cum_cost[t] > agg.cost_budgets[static_cast<std::size_t>(i)])
            break;
          best = std::min(best, s->regret[t]);
        }
        if (std::isfinite(best)) {
          rtotal += best;
          ++rcount;
        }
      }
      if (rcount > 0)
        regret_at[static_cast<std::size_t>(i)] = rtotal / rcount;
    }
    agg.cost_at_regret[actor] = std::move(cost_at);
    agg.regret_at_cost[actor] = std::move(regret_at);
  }
  return agg;
}

}  // namespace mongoose
